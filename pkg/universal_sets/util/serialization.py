"""Reading and writing sets, traces and tables.

Integers that can exceed 64 bits are written as decimal strings; readers
accept strings and plain JSON integers.
"""
from __future__ import annotations

import json
import typing

import pandas as pd
from schema import And, Or, Schema, SchemaError, Use
from schema import Optional as SchemaOptional

from ..algo.constructor import ConstructionStep, ConstructionTrace
from ..exceptions import InputFileError
from ..field.primes import FactoredIdeal, PrimeIdeal
from ..field.quadratic import FieldCtx, QuadInt, parse_field
from ..ordering.universality import PointSet

_INTEGER = Or(And(int, lambda x: not isinstance(x, bool)),
              And(str, Use(int), error="coordinates must be integers or decimal strings"))

element_schema = Schema({"a": _INTEGER, SchemaOptional("b", default=0): _INTEGER})


def quadint_to_json(x: QuadInt) -> dict:
    return {"a": str(x.a), "b": str(x.b)}


def quadint_from_json(obj: typing.Any, ctx: FieldCtx) -> QuadInt:
    """
    Parse ``{"a": ..., "b": ...}``.

    Raises
    ------
    schema.SchemaError
        If the object is malformed
    ValueError
        If `b` is nonzero in the rational field
    """
    values = element_schema.validate(obj)
    return QuadInt(values["a"], values["b"], ctx)


def prime_to_json(prime: PrimeIdeal) -> dict:
    return {"p": prime.p, "kind": prime.kind.value, "conjugate_index": prime.conjugate_index,
            "norm": prime.residue_norm, "label": prime.label}


def factored_to_json(ideal: FactoredIdeal) -> list[dict]:
    return [{"prime": prime_to_json(prime), "exponent": exponent}
            for prime, exponent in ideal.factors.items()]


def point_set_to_json(points: PointSet) -> list[dict]:
    return [quadint_to_json(x) for x in points]


def point_set_from_json(data: typing.Any, ctx: FieldCtx) -> PointSet:
    """
    Parse a JSON array of elements.

    Raises
    ------
    InputFileError
        Naming the index of the first malformed or duplicate element
    """
    if not isinstance(data, list):
        raise InputFileError(f"expected a JSON array of elements, got {type(data).__name__}")
    elements = []
    for index, obj in enumerate(data):
        try:
            elements.append(quadint_from_json(obj, ctx))
        except (SchemaError, ValueError) as e:
            raise InputFileError(f"element {index}: {e}") from e
    try:
        return PointSet(ctx, tuple(elements))
    except ValueError as e:
        raise InputFileError(str(e)) from e


def _load_json(path: str) -> typing.Any:
    try:
        with open(path, "r") as file:
            return json.load(file)
    except json.JSONDecodeError as e:
        raise InputFileError(f"{path}: invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from e
    except OSError as e:
        raise InputFileError(f"{path} cannot be read: {e}") from e


def read_set(path: str, ctx: FieldCtx) -> PointSet:
    """Read a set file, a JSON array of elements"""
    try:
        return point_set_from_json(_load_json(path), ctx)
    except InputFileError as e:
        if str(e).startswith(path):
            raise
        raise InputFileError(f"{path}: {e}") from e


def write_json(path: str, payload: dict, config: typing.Optional[dict] = None):
    """Write a JSON document with the run configuration under ``"config"``"""
    document = {"config": config} if config is not None else {}
    document.update(payload)
    with open(path, "w") as file:
        json.dump(document, file, indent=2)
        file.write("\n")


def write_set(path: str, points: PointSet):
    with open(path, "w") as file:
        json.dump(point_set_to_json(points), file, indent=2)
        file.write("\n")


def step_to_json(step: ConstructionStep) -> dict:
    return {"n": step.n,
            "divisor_primes": [prime_to_json(p) for p in step.divisor_primes],
            "bad_primes": [prime_to_json(p) for p in step.bad_primes],
            "congruences": [{"prime": prime_to_json(c.prime), "exponent": c.exponent,
                             "residue": quadint_to_json(c.residue), "mode": c.mode}
                            for c in step.congruences],
            "element": quadint_to_json(step.element),
            "candidates_rejected": step.candidates_rejected,
            "coordinate_bits": step.coordinate_bits,
            "log_excess": step.log_excess}


def trace_to_json(trace: ConstructionTrace) -> dict:
    return {"field": trace.ctx.label,
            "chain": [point_set_to_json(points) for points in trace.chain],
            "steps": [step_to_json(step) for step in trace.steps]}


trace_schema = Schema({SchemaOptional("config"): Or(None, dict),
                       "field": str,
                       "chain": And(list, lambda chain: len(chain) >= 1, error="chain must not be empty"),
                       "steps": list})


def read_trace(path: str) -> tuple[FieldCtx, list[PointSet]]:
    """
    Read back the chain of a construction trace.

    Raises
    ------
    InputFileError
        If the document or one of its sets is malformed
    """
    data = _load_json(path)
    try:
        trace_schema.validate(data)
        ctx = parse_field(data["field"])
    except (SchemaError, ValueError) as e:
        raise InputFileError(f"{path}: {e}") from e
    chain = []
    for index, points in enumerate(data["chain"]):
        try:
            chain.append(point_set_from_json(points, ctx))
        except InputFileError as e:
            raise InputFileError(f"{path}: chain entry {index}: {e}") from e
    return ctx, chain


def write_csv(path: str, table: pd.DataFrame, config: typing.Optional[dict] = None):
    """Write a table after a ``# config: {...}`` comment line"""
    with open(path, "w") as file:
        if config is not None:
            file.write(f"# config: {json.dumps(config, sort_keys=True)}\n")
        table.to_csv(file, index=False)


def read_csv(path: str) -> tuple[typing.Optional[dict], pd.DataFrame]:
    """Read a table written by `write_csv`, with its configuration"""
    config = None
    with open(path, "r") as file:
        first = file.readline()
    if first.startswith("# config: "):
        config = json.loads(first[len("# config: "):])
    return config, pd.read_csv(path, comment="#")
