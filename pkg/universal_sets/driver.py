import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field

import yaml
from schema import And, Optional, Or, Schema, SchemaError, Use

from .algo import SearchBox, build_universal, search_optimal
from .analytics import (Box, gamma_estimate, gamma_trajectory, ihara_bound_check, log_ineq_check,
                        log_potential_integral)
from .exceptions import BudgetExceededError, IntegrityError
from .field import parse_field
from .ordering import factorial_ideal, is_n_optimal, is_n_universal, newton_prefix_length, volume
from .util import (factored_to_json, point_set_to_json, prime_to_json, read_set, trace_to_json,
                   write_csv, write_json)
from .walk import ScalingMode, WalkConfig, simulate, sweep_M, tail_fraction

logger = logging.getLogger("universal_sets")

THREADS_VARIABLE = "UNIVERSAL_SETS_THREADS"

EXIT_OK = 0
EXIT_FALSE = 1
EXIT_INPUT = 2
EXIT_FAILURE = 3

SECTIONS = ("factorial", "check", "construct", "search", "gamma", "bound", "potential", "simulate")

master_schema = Schema({Optional(f"{section}_inputs"): dict for section in SECTIONS})


def _positive(name: str):
    return And(int, lambda x: x >= 1, error=f"{name} must be an integer >= 1")


def _non_negative(name: str):
    return And(int, lambda x: x >= 0, error=f"{name} must be an integer >= 0")


_FIELD = And(str, Use(parse_field), error="field must look like 'Q' or 'Q(sqrt d)'")
_OUTPUT = Or(None, str)

section_schemas = {
    "factorial": Schema({"field": _FIELD, "n": _non_negative("n"),
                         Optional("output", default=None): _OUTPUT}),
    "check": Schema({"field": _FIELD, "set": str, "n": _non_negative("n"),
                     Optional("optimal", default=False): bool,
                     Optional("newton", default=False): bool,
                     Optional("factor_bound", default=10 ** 6): _positive("factor_bound"),
                     Optional("output", default=None): _OUTPUT}),
    "construct": Schema({"field": _FIELD, "n": _non_negative("n"),
                         Optional("pin_bound", default=2000): And(int, lambda x: x >= 2,
                                                                  error="pin_bound must be >= 2"),
                         Optional("residue_guard", default=10 ** 6): _positive("residue_guard"),
                         Optional("factor_bound", default=10 ** 6): _positive("factor_bound"),
                         Optional("trace", default=None): _OUTPUT}),
    "search": Schema({"field": _FIELD, "n": _non_negative("n"),
                      "box": And(str, Use(SearchBox.parse), error="box must look like WxH"),
                      Optional("prune", default=True): bool,
                      Optional("budget", default=5 * 10 ** 7): _positive("budget"),
                      Optional("collapsed_only", default=False): bool,
                      Optional("units", default=False): bool,
                      Optional("conj", default=False): bool,
                      Optional("output", default=None): _OUTPUT}),
    "gamma": Schema({"field": _FIELD, "n": And(int, lambda x: x >= 2, error="n must be >= 2"),
                     Optional("trajectory", default=None): Or(None, [And(int, lambda x: x >= 2)]),
                     Optional("csv", default=None): _OUTPUT,
                     Optional("output", default=None): _OUTPUT}),
    "bound": Schema({"field": _FIELD, "n": And(int, lambda x: x >= 2, error="n must be >= 2"),
                     Optional("tol", default=0.05): And(Use(float), lambda x: x >= 0,
                                                        error="tol must be >= 0"),
                     Optional("output", default=None): _OUTPUT}),
    "potential": Schema({"boxes": Or(str, list),
                         "samples": And(int, lambda x: x >= 2, error="samples must be >= 2"),
                         Optional("seed", default=0): _non_negative("seed"),
                         Optional("field", default=None): Or(None, _FIELD),
                         Optional("gamma_n", default=10 ** 5): And(int, lambda x: x >= 2),
                         Optional("tol", default=0.05): And(Use(float), lambda x: x >= 0),
                         Optional("output", default=None): _OUTPUT}),
    "simulate": Schema({"field": _FIELD, "n": _non_negative("n"), "L": _positive("L"),
                        "M": _non_negative("M"), "trials": _positive("trials"),
                        Optional("seed", default=0): _non_negative("seed"),
                        Optional("modulus", default="conductor"): And(
                            str, Use(ScalingMode), error="modulus must be 'conductor' or 'factorial'"),
                        Optional("sweep_M", default=None): Or(None, [_non_negative("M")]),
                        Optional("tail", default=False): bool,
                        Optional("threads", default=None): Or(None, _positive("threads")),
                        Optional("csv", default=None): _OUTPUT,
                        Optional("output", default=None): _OUTPUT}),
}

run_config_schema = Schema({"subcommand": Or(*SECTIONS, "batch"),
                            "inputs": dict,
                            "threads": _positive("threads")})


def default_threads() -> int:
    """Thread count from the environment, 1 when unset"""
    raw = os.environ.get(THREADS_VARIABLE, "1")
    return Schema(And(Use(int), lambda x: x >= 1),
                  error=f"{THREADS_VARIABLE} must be an integer >= 1, got {raw!r}").validate(raw)


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce a run.

    Attributes
    ----------
    subcommand : str
        The section that was run
    inputs : dict
        The raw inputs of that section, as given on the command line or in the
        batch file
    threads : int
        Concurrency cap
    """
    subcommand: str
    inputs: dict = field(default_factory=dict)
    threads: int = 1

    def __post_init__(self):
        run_config_schema.validate(self.to_dict())

    def to_dict(self) -> dict:
        return {"subcommand": self.subcommand, "inputs": dict(self.inputs), "threads": self.threads}


def _emit(payload: dict, config: RunConfig, output: str = None):
    if output is None:
        print(json.dumps({"config": config.to_dict(), **payload}, indent=2))
    else:
        write_json(output, payload, config.to_dict())


def run_factorial(config: RunConfig) -> int:
    """
    Validate and run the factorial section

    Parameters
    ----------
    config
        The run configuration holding the "factorial_inputs" dictionary
    """
    inputs = section_schemas["factorial"].validate(dict(config.inputs))
    ideal = factorial_ideal(inputs["field"], inputs["n"])
    payload = {"field": inputs["field"].label, "n": inputs["n"],
               "factors": factored_to_json(ideal), "norm": str(ideal.norm())}
    _emit(payload, config, inputs["output"])
    return EXIT_OK


def run_check(config: RunConfig) -> int:
    """
    Validate and run the check section

    Parameters
    ----------
    config
        The run configuration holding the "check_inputs" dictionary
    """
    inputs = section_schemas["check"].validate(dict(config.inputs))
    ctx, n = inputs["field"], inputs["n"]
    points = read_set(inputs["set"], ctx)
    report = is_n_universal(points, n, factor_bound=inputs["factor_bound"])
    payload = {"field": ctx.label, "n": n, "size": report.size, "universal": report.verdict,
               "relevant_primes": [prime_to_json(p) for p in report.relevant_primes],
               "failures": [{"prime": prime_to_json(f.prime) if f.prime else None, "level": f.level,
                             "cofactor": str(f.cofactor) if f.cofactor else None, "reason": f.reason}
                            for f in report.failures],
               "skipped": report.skipped}
    verdict = report.verdict
    if inputs["optimal"]:
        optimal = len(points) == n + 1 and is_n_optimal(points, inputs["factor_bound"])
        _, factored = volume(points, inputs["factor_bound"])
        payload.update({"optimal": optimal, "volume_norm": str(factored.norm())})
        verdict = verdict and optimal
    if inputs["newton"]:
        length = newton_prefix_length(list(points))
        payload.update({"newton_length": length, "newton_elements": length + 1,
                        "newton": length == len(points) - 1})
        verdict = verdict and length == len(points) - 1
    _emit(payload, config, inputs["output"])
    return EXIT_OK if verdict else EXIT_FALSE


def run_construct(config: RunConfig) -> int:
    """
    Validate and run the construct section

    Parameters
    ----------
    config
        The run configuration holding the "construct_inputs" dictionary
    """
    inputs = section_schemas["construct"].validate(dict(config.inputs))
    trace = build_universal(inputs["field"], inputs["n"], pin_bound=inputs["pin_bound"],
                            residue_guard=inputs["residue_guard"], factor_bound=inputs["factor_bound"])
    if inputs["trace"] is not None:
        write_json(inputs["trace"], trace_to_json(trace), config.to_dict())
    else:
        _emit({"field": trace.ctx.label, "set": point_set_to_json(trace.final)}, config)
    return EXIT_OK


def run_search(config: RunConfig) -> int:
    """
    Validate and run the search section

    Parameters
    ----------
    config
        The run configuration holding the "search_inputs" dictionary
    """
    inputs = section_schemas["search"].validate(dict(config.inputs))
    ctx, box = inputs["field"], inputs["box"]
    result = search_optimal(ctx, inputs["n"], box, prune=inputs["prune"], budget=inputs["budget"],
                            collapsed_only=inputs["collapsed_only"], units=inputs["units"],
                            conj=inputs["conj"])
    payload = {"field": ctx.label, "n": result.n, "box": box.label,
               "justification": box.justification, "symmetry": result.symmetry,
               "collapsed_only": result.collapsed_only, "nodes": result.nodes,
               "box_relative": result.box_relative,
               "sets": [point_set_to_json(points) for points in result.sets]}
    _emit(payload, config, inputs["output"])
    return EXIT_OK if result.sets else EXIT_FALSE


def run_gamma(config: RunConfig) -> int:
    """
    Validate and run the gamma section

    Parameters
    ----------
    config
        The run configuration holding the "gamma_inputs" dictionary
    """
    inputs = section_schemas["gamma"].validate(dict(config.inputs))
    ctx, n = inputs["field"], inputs["n"]
    estimate = gamma_estimate(ctx, n)
    payload = {"field": ctx.label, "n": n, "estimate": estimate.estimate,
               "gamma_q": estimate.gamma_q, "c_dk": estimate.c_dk,
               "trajectory": [{"n": m, "estimate": value} for m, value in estimate.trajectory]}
    if inputs["csv"] is not None:
        ns = inputs["trajectory"] or [m for m in (n // 8, n // 4, n // 2, n) if m >= 2]
        write_csv(inputs["csv"], gamma_trajectory(ctx, ns), config.to_dict())
    _emit(payload, config, inputs["output"])
    return EXIT_OK


def run_bound(config: RunConfig) -> int:
    """
    Validate and run the check-bound section

    Parameters
    ----------
    config
        The run configuration holding the "bound_inputs" dictionary
    """
    inputs = section_schemas["bound"].validate(dict(config.inputs))
    check = ihara_bound_check(inputs["field"], inputs["n"], inputs["tol"])
    payload = {"field": inputs["field"].label, "n": inputs["n"], "bound": check.bound,
               "estimate": check.estimate, "satisfied": check.satisfied, "tolerance": check.tolerance,
               "in_hypothesis": check.in_hypothesis, "comparison_line": check.comparison_line}
    _emit(payload, config, inputs["output"])
    return EXIT_OK if check.satisfied else EXIT_FALSE


box_schema = Schema([{"lower": [Or(int, float)], "upper": [Or(int, float)]}])


def parse_boxes(boxes) -> list:
    """Boxes from a JSON file, inline JSON text or an already parsed list"""
    if isinstance(boxes, str):
        text = boxes.strip()
        if text.startswith("["):
            boxes = json.loads(text)
        else:
            with open(boxes, "r") as file:
                boxes = json.load(file)
    return [Box(tuple(b["lower"]), tuple(b["upper"])) for b in box_schema.validate(boxes)]


def run_potential(config: RunConfig) -> int:
    """
    Validate and run the potential section

    Parameters
    ----------
    config
        The run configuration holding the "potential_inputs" dictionary
    """
    inputs = section_schemas["potential"].validate(dict(config.inputs))
    try:
        boxes = parse_boxes(inputs["boxes"])
    except (OSError, json.JSONDecodeError) as e:
        raise ValueError(f"boxes cannot be read: {e}") from e
    if not boxes:
        raise ValueError("at least one box is needed")
    ctx = inputs["field"]
    if ctx is None:
        value, stderr = log_potential_integral(boxes, boxes[0].dimension, inputs["samples"], inputs["seed"])
        payload = {"value": value, "stderr": stderr, "measure": sum(b.measure for b in boxes)}
        code = EXIT_OK
    else:
        check = log_ineq_check(ctx, boxes, inputs["samples"], inputs["seed"], inputs["gamma_n"], inputs["tol"])
        payload = {"field": ctx.label, "value": check.lhs, "stderr": check.stderr, "rhs": check.rhs,
                   "c_dk": check.c_dk, "satisfied": check.satisfied}
        code = EXIT_OK if check.satisfied else EXIT_FALSE
    _emit(payload, config, inputs["output"])
    return code


def run_simulate(config: RunConfig) -> int:
    """
    Validate and run the simulate section

    Parameters
    ----------
    config
        The run configuration holding the "simulate_inputs" dictionary
    """
    inputs = section_schemas["simulate"].validate(dict(config.inputs))
    walk = WalkConfig(inputs["field"], inputs["n"], inputs["L"], inputs["M"], inputs["trials"],
                      inputs["seed"], inputs["modulus"], threads=inputs["threads"] or config.threads)
    if inputs["sweep_M"]:
        table = sweep_M(walk, inputs["sweep_M"])
        if inputs["csv"] is not None:
            write_csv(inputs["csv"], table, config.to_dict())
        _emit({"sweep": table.to_dict(orient="records")}, config, inputs["output"])
        return EXIT_OK

    result = simulate(walk)
    payload = {"field": walk.ctx.label, "n": walk.n, "L": walk.L, "M": walk.M,
               "trials": result.trials, "modulus": str(result.modulus),
               "base_points": [{"a": str(x.a), "b": str(x.b)} for x in walk.base_points],
               "p_hat": result.p_hat, "ci_low": result.ci_low, "ci_high": result.ci_high,
               "stderr": result.stderr, "failures_by_prime": result.failures_by_prime}
    if inputs["tail"]:
        payload["tail_fraction"] = tail_fraction(walk)
    _emit(payload, config, inputs["output"])
    return EXIT_OK


runners = {"factorial": run_factorial, "check": run_check, "construct": run_construct,
           "search": run_search, "gamma": run_gamma, "bound": run_bound,
           "potential": run_potential, "simulate": run_simulate}


def execute(inputs: dict, threads: int = 1) -> int:
    """
    Run every section of a batch file, in a fixed order

    Parameters
    ----------
    inputs
        yml file in dictionary format
    threads
        Default concurrency cap

    Returns
    -------
    The largest exit code of the sections run
    """
    master_schema.validate(inputs)
    code = EXIT_OK
    for section in SECTIONS:
        key = f"{section}_inputs"
        if key in inputs:
            logger.info("Running batch section %s", key)
            code = max(code, runners[section](RunConfig(section, inputs[key], threads)))
    return code


def read_and_run(input_yml: str, threads: int = 1) -> int:
    """
    Parse the yml input and run

    Parameters
    ----------
    input_yml
        Path to the yml file to parse
    """
    try:
        with open(input_yml, 'r') as file:
            inputs = yaml.safe_load(file)
    except (IOError, FileNotFoundError, yaml.YAMLError) as e:
        print(f"Error parsing YAML file: {input_yml}", file=sys.stderr)
        if isinstance(e, (IOError, FileNotFoundError)):
            print(f"File could not be read: {e}", file=sys.stderr)
        elif hasattr(e, "problem_mark"):
            print(f"  parser says\n{e.problem_mark}\n  {e.problem}", file=sys.stderr)
            if e.context is not None:
                print(f" {e.context}", file=sys.stderr)
            print("Please correct and retry.", file=sys.stderr)
        else:
            print(f"Something went wrong while parsing yaml file: {e}", file=sys.stderr)
        return EXIT_INPUT
    if not isinstance(inputs, dict):
        print(f"{input_yml} must contain a mapping of *_inputs sections", file=sys.stderr)
        return EXIT_INPUT
    return execute(inputs, threads)


def _add_field(parser: argparse.ArgumentParser):
    parser.add_argument("--field", required=True, help="Field such as Q, 'Q(sqrt -1)' or 'Q(sqrt 5)'")
    parser.add_argument("--n", type=int, required=True, help="Degree")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="universal_sets",
                                     description="Universal and optimal sets in quadratic fields")
    levels = ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL')
    parser.add_argument('--log-level', default='INFO', choices=levels,
                        help="Granularity of logging to print at")
    parser.add_argument("--log-file", default="universal_sets.log",
                        help="File to output log to")
    parser.add_argument("--threads", type=int, default=None,
                        help=f"Concurrency cap, default from {THREADS_VARIABLE} or 1")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    factorial = sub.add_parser("factorial", help="Factor the generalized factorial n!_K")
    _add_field(factorial)
    factorial.add_argument("--output", help="JSON file to write instead of printing")

    check = sub.add_parser("check", help="Decide n-universality of a set")
    _add_field(check)
    check.add_argument("--set", required=True, help="JSON array of {a, b} elements")
    check.add_argument("--optimal", action="store_true", help="Also certify n-optimality")
    check.add_argument("--newton", action="store_true", help="Also check the set is a Newton sequence")
    check.add_argument("--factor-bound", type=int, help="Trial division bound for factoring differences")
    check.add_argument("--output")

    construct = sub.add_parser("construct", help="Build n-universal sets with n + 2 elements")
    _add_field(construct)
    construct.add_argument("--trace", help="JSON file for the full construction trace")
    construct.add_argument("--pin-bound", type=int, default=2000)
    construct.add_argument("--residue-guard", type=int, help="Largest residue system enumerated per prime power")
    construct.add_argument("--factor-bound", type=int, help="Trial division bound for factoring volumes")

    search = sub.add_parser("search-optimal", help="Search n-optimal sets in a box")
    _add_field(search)
    search.add_argument("--box", required=True, help="WxH, for example 7x7")
    search.add_argument("--no-prune", action="store_true")
    search.add_argument("--budget", type=int, default=5 * 10 ** 7)
    search.add_argument("--collapsed-only", action="store_true")
    search.add_argument("--units", action="store_true", help="Identify sets up to roots of unity")
    search.add_argument("--conj", action="store_true", help="Identify conjugate sets")
    search.add_argument("--output")

    gamma = sub.add_parser("gamma", help="Estimate the Euler-Kronecker constant")
    _add_field(gamma)
    gamma.add_argument("--csv", help="CSV file for the convergence trajectory")
    gamma.add_argument("--output")

    bound = sub.add_parser("check-bound", help="Compare the gamma estimate with its lower bound")
    _add_field(bound)
    bound.add_argument("--tol", type=float, default=0.05)
    bound.add_argument("--output")

    potential = sub.add_parser("potential", help="Monte Carlo log-potential integral")
    potential.add_argument("--boxes", required=True, help="JSON file or inline JSON list of boxes")
    potential.add_argument("--samples", type=int, required=True)
    potential.add_argument("--seed", type=int, default=0)
    potential.add_argument("--field", help="Real quadratic field for the inequality check")
    potential.add_argument("--gamma-n", type=int, help="n used to estimate gamma_K for the inequality check")
    potential.add_argument("--tol", type=float, help="Slack allowed in the inequality check")
    potential.add_argument("--output")

    sim = sub.add_parser("simulate", help="Simulate random universal sets from lattice walks")
    _add_field(sim)
    sim.add_argument("--L", type=int, required=True)
    sim.add_argument("--M", type=int, required=True)
    sim.add_argument("--trials", type=int, required=True)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--modulus", choices=("conductor", "factorial"), default="conductor")
    sim.add_argument("--sweep-M", help="Comma separated walk lengths")
    sim.add_argument("--tail", action="store_true", help="Also report the tail fraction")
    sim.add_argument("--csv")
    sim.add_argument("--output")

    batch = sub.add_parser("batch", help="Run the sections of a YAML file")
    batch.add_argument("input", help="YAML file with *_inputs sections")
    return parser


_SECTION_OF = {"search-optimal": "search", "check-bound": "bound"}
_GLOBAL_KEYS = ("log_level", "log_file", "threads", "subcommand")


def _inputs_from_args(args: argparse.Namespace) -> dict:
    inputs = {key: value for key, value in vars(args).items()
              if key not in _GLOBAL_KEYS and value is not None}
    if "no_prune" in inputs:
        inputs["prune"] = not inputs.pop("no_prune")
    if "sweep_M" in inputs:
        try:
            inputs["sweep_M"] = [int(m) for m in inputs["sweep_M"].split(",") if m.strip()]
        except ValueError as e:
            raise ValueError(f"--sweep-M must be comma separated integers: {e}") from e
    return inputs


def run(argv=None) -> int:
    """
    Parse the command line, run one subcommand and return its exit code

    Parameters
    ----------
    argv
        Arguments without the program name, sys.argv[1:] by default
    """
    args = build_parser().parse_args(argv)

    fh = logging.FileHandler(args.log_file)
    fh.setLevel(args.log_level)
    fh.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s %(message)s"))
    logger.addHandler(fh)
    logger.setLevel(args.log_level)

    try:
        threads = args.threads if args.threads is not None else default_threads()
        if args.subcommand == "batch":
            return read_and_run(args.input, threads)
        section = _SECTION_OF.get(args.subcommand, args.subcommand)
        config = RunConfig(section, _inputs_from_args(args), threads)
        return runners[section](config)
    except (SchemaError, ValueError) as e:
        logger.error("Invalid input: %s", e)
        print(f"Invalid input: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (BudgetExceededError, IntegrityError) as e:
        logger.error("%s: %s", type(e).__name__, e)
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAILURE
    finally:
        logger.removeHandler(fh)
        fh.close()


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
