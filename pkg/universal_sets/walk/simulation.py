"""
Monte Carlo simulation of universal sets built from lattice walks.

Fix L > 2(n+1) and k = n + d base points a_1, ..., a_k of O_K whose first
n + 1 entries are almost uniformly distributed modulo every power P^j with
N(P) <= L and j up to the stabilization level of P. Each trial runs k
independent walks psi_i of M steps, every step adding +-1 to each coordinate,
and forms xi_i = a_i + Lambda psi_i with a scaling modulus Lambda divisible by
every P^j above. Reductions modulo those prime powers are untouched, so a
trial can only fail at a prime of norm greater than L; the failure
probability tends to 0 as M and then L grow.
"""
from __future__ import annotations

import asyncio
import logging
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Iterable, Iterator, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.stats import norm

from ..exceptions import BudgetExceededError, IntegrityError
from ..field.primes import PrimeIdeal, primes_up_to_norm, valuation
from ..field.quadratic import FieldCtx, QuadInt
from ..ordering.factorials import stabilization_level
from ..ordering.universality import DEFAULT_SCAN_BOUND, PointSet, is_aud, is_n_universal

logger = logging.getLogger(__name__)

DEFAULT_BOX_GUARD = 10 ** 4
DEFAULT_CONFIDENCE = 0.95
FACTORIAL_MODE_LIMIT = 12


class ScalingMode(Enum):
    """How the scaling modulus Lambda is chosen.

    CONDUCTOR uses prod p^m over the rational primes below the primes of norm
    at most L, m the largest stabilization level above p. EXACT_L_FACTORIAL
    uses L! and is only allowed for small L.
    """
    CONDUCTOR = "conductor"
    EXACT_L_FACTORIAL = "factorial"


def _constraints(ctx: FieldCtx, n: int, L: int) -> list[tuple[PrimeIdeal, int]]:
    """(P, m_P) for every prime with N(P) <= L"""
    return [(prime, stabilization_level(prime, n + 1)) for prime in primes_up_to_norm(ctx, L)]


def scaling_modulus(ctx: FieldCtx, n: int, L: int, mode: ScalingMode = ScalingMode.CONDUCTOR) -> int:
    """
    The rational integer Lambda the walks are multiplied by.

    Raises
    ------
    ValueError
        If EXACT_L_FACTORIAL is requested for L above the supported limit
    IntegrityError
        If Lambda misses a required prime power
    """
    constraints = _constraints(ctx, n, L)
    if mode is ScalingMode.EXACT_L_FACTORIAL:
        if L > FACTORIAL_MODE_LIMIT:
            raise ValueError(f"L! scaling is limited to L <= {FACTORIAL_MODE_LIMIT}, got L = {L}")
        modulus = math.factorial(L)
    else:
        exponents = {}
        for prime, level in constraints:
            exponents[prime.p] = max(exponents.get(prime.p, 0), level)
        modulus = math.prod(p ** e for p, e in exponents.items())
    for prime, level in constraints:
        if valuation(ctx.element(modulus), prime) < level:
            raise IntegrityError(f"scaling modulus {modulus} is not divisible by {prime.label}^{level}")
    return modulus


def _canonical_points(ctx: FieldCtx) -> Iterator[QuadInt]:
    """O_K in the order (|a| + |b|, a, b)"""
    radius = 0
    while True:
        if ctx.is_rational:
            shell = sorted({(-radius, 0), (radius, 0)})
        else:
            shell = sorted({(a, sign * (radius - abs(a))) for a in range(-radius, radius + 1)
                            for sign in (1, -1)})
        for a, b in shell:
            yield ctx.element(a, b)
        radius += 1


def _distinct_mod(x: QuadInt, y: QuadInt, modulus: int) -> bool:
    difference = x - y
    return difference.a % modulus != 0 or difference.b % modulus != 0


def find_base_points(ctx: FieldCtx, n: int, L: int, mode: ScalingMode = ScalingMode.CONDUCTOR,
                     box_guard: int = DEFAULT_BOX_GUARD) -> list[QuadInt]:
    """
    Deterministic base points for the walk.

    The first n + 1 points are chosen greedily in canonical order so that
    every prefix is almost uniformly distributed modulo P^j for N(P) <= L and
    j up to the stabilization level of P; the remaining d - 1 points are the
    next ones distinct from all others modulo the scaling modulus.

    Parameters
    ----------
    ctx
        The field, of degree d
    n
        The universality degree
    L
        The norm cutoff, L > 2(n+1)
    mode
        The scaling modulus used for the distinctness requirement
    box_guard
        Largest number of candidates examined

    Raises
    ------
    ValueError
        If L <= 2(n+1)
    BudgetExceededError
        If the guard is exceeded
    """
    if L <= 2 * (n + 1):
        raise ValueError(f"L must exceed 2(n+1) = {2 * (n + 1)}, got {L}")
    constraints = _constraints(ctx, n, L)
    modulus = scaling_modulus(ctx, n, L, mode)
    count = n + ctx.degree
    chosen: list[QuadInt] = []
    for examined, candidate in enumerate(_canonical_points(ctx)):
        if len(chosen) == count:
            break
        if examined >= box_guard:
            raise BudgetExceededError("box_guard", examined, f"base points for n = {n}, L = {L} in {ctx}")
        if not all(_distinct_mod(candidate, x, modulus) for x in chosen):
            continue
        if len(chosen) <= n:
            extended = chosen + [candidate]
            if not all(is_aud(extended, prime, j) for prime, level in constraints
                       for j in range(1, level + 1)):
                continue
        chosen.append(candidate)
    logger.debug("Base points for n = %d, L = %d in %s: %s", n, L, ctx, [str(x) for x in chosen])
    return chosen


@dataclass(frozen=True)
class WalkConfig:
    """Parameters of a walk simulation.

    Base points are computed with `find_base_points` when not given, and
    checked otherwise.

    Attributes
    ----------
    ctx : FieldCtx
        The field
    n : int
        Target universality degree
    L : int
        Norm cutoff, L > 2(n+1)
    M : int
        Number of walk steps
    trials : int
        Number of independent experiments
    seed : int
        Master seed; trial t draws from SeedSequence(seed, spawn_key=(t,))
    mode : ScalingMode
        How Lambda is chosen
    base_points : tuple of QuadInt
        a_1, ..., a_{n+d}
    threads : int
        Number of shards run concurrently
    """
    ctx: FieldCtx
    n: int
    L: int
    M: int
    trials: int
    seed: int = 0
    mode: ScalingMode = ScalingMode.CONDUCTOR
    base_points: Optional[tuple] = None
    threads: int = 1

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"degree must be >= 0, got {self.n}")
        if self.L <= 2 * (self.n + 1):
            raise ValueError(f"L must exceed 2(n+1) = {2 * (self.n + 1)}, got {self.L}")
        if self.M < 0:
            raise ValueError(f"number of steps must be >= 0, got {self.M}")
        if self.trials < 1:
            raise ValueError(f"number of trials must be >= 1, got {self.trials}")
        if self.threads < 1:
            raise ValueError(f"number of threads must be >= 1, got {self.threads}")
        if self.base_points is None:
            object.__setattr__(self, "base_points",
                               tuple(find_base_points(self.ctx, self.n, self.L, self.mode)))
        else:
            object.__setattr__(self, "base_points", tuple(self.base_points))
            self._check_base_points()

    @property
    def walks(self) -> int:
        return self.n + self.ctx.degree

    @property
    def modulus(self) -> int:
        return scaling_modulus(self.ctx, self.n, self.L, self.mode)

    def _check_base_points(self):
        points = self.base_points
        if len(points) != self.walks:
            raise ValueError(f"expected {self.walks} base points, got {len(points)}")
        prefix = list(points[:self.n + 1])
        for prime, level in _constraints(self.ctx, self.n, self.L):
            for j in range(1, level + 1):
                if not is_aud(prefix, prime, j):
                    raise ValueError(f"base points are not almost uniformly distributed "
                                     f"modulo {prime.label}^{j}")
        modulus = self.modulus
        distinct = len({(x.a % modulus, x.b % modulus) for x in points})
        if distinct < self.n + 1:
            raise ValueError(f"only {distinct} base points are distinct modulo {modulus}")


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


def walk_endpoints(config: WalkConfig, trial: int) -> np.ndarray:
    """Endpoints psi_i of the walks of one trial, shape (n + d, d)"""
    rng = _trial_rng(config.seed, trial)
    return 2 * rng.binomial(config.M, 0.5, size=(config.walks, config.ctx.degree)) - config.M


@dataclass
class TrialOutcome:
    """Result of one experiment.

    Attributes
    ----------
    trial : int
        Index of the trial, which also selects its random stream
    failed : bool
        Whether the scaled endpoints were not n-universal
    witness : str, optional
        Label of the smallest failing prime; "duplicates" when walks met and
        "unnamed" when the report names no prime
    witness_norm : int, optional
        N(P) of the failing prime
    """
    trial: int
    failed: bool
    witness: Optional[str]
    witness_norm: Optional[int]


def run_trial(config: WalkConfig, trial: int, modulus: int) -> TrialOutcome:
    """
    One experiment: form the scaled walk endpoints and check n-universality.

    Raises
    ------
    IntegrityError
        If a failure is witnessed by a prime of norm at most L
    """
    ctx = config.ctx
    endpoints = walk_endpoints(config, trial)
    elements = []
    for base, coordinates in zip(config.base_points, endpoints):
        psi = ctx.element(*(int(c) for c in coordinates))
        elements.append(base + modulus * psi)
    distinct = list(dict.fromkeys(elements))
    report = is_n_universal(PointSet(ctx, tuple(distinct)), config.n,
                            scan_bound=max(DEFAULT_SCAN_BOUND, config.L))
    if report.verdict:
        return TrialOutcome(trial, False, None, None)
    failure = report.failures[0]
    if failure.prime is None:
        witness = "duplicates" if len(distinct) < config.n + 1 else "unnamed"
        return TrialOutcome(trial, True, witness, None)
    if failure.prime.residue_norm <= config.L:
        raise IntegrityError(f"trial {trial} failed at {failure.prime.label} "
                             f"of norm {failure.prime.residue_norm} <= L = {config.L}")
    return TrialOutcome(trial, True, failure.prime.label, failure.prime.residue_norm)


def _run_shard(config: WalkConfig, trials: Sequence[int], modulus: int) -> list[TrialOutcome]:
    return [run_trial(config, t, modulus) for t in trials]


async def _gather_shards(config: WalkConfig, modulus: int) -> list[TrialOutcome]:
    shards = [range(start, config.trials, config.threads) for start in range(config.threads)]
    tasks = [asyncio.to_thread(_run_shard, config, shard, modulus) for shard in shards]
    results = await asyncio.gather(*tasks)
    return sorted((outcome for shard in results for outcome in shard), key=lambda o: o.trial)


def wilson_interval(failures: int, trials: int, confidence: float = DEFAULT_CONFIDENCE) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion"""
    if trials < 1:
        raise ValueError("an interval needs at least one trial")
    z = norm.ppf(1 - (1 - confidence) / 2)
    p_hat = failures / trials
    denominator = 1 + z * z / trials
    centre = (p_hat + z * z / (2 * trials)) / denominator
    half = z * math.sqrt(p_hat * (1 - p_hat) / trials + z * z / (4 * trials * trials)) / denominator
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass
class SimulationResult:
    """Outcome of `simulate`.

    Attributes
    ----------
    p_hat : float
        Fraction of trials whose set was not n-universal
    ci_low, ci_high : float
        Wilson confidence interval for the failure probability
    stderr : float
        sqrt(p_hat (1 - p_hat) / trials)
    failures_by_prime : dict
        Number of failures per smallest witnessing prime label
    trials : int
        Number of trials run
    modulus : int
        The scaling modulus used
    witness_norms : list of int
        N(P) of the prime witnessing each failure, in trial order; failures
        with no named prime are left out
    """
    p_hat: float
    ci_low: float
    ci_high: float
    stderr: float
    failures_by_prime: dict = field(default_factory=dict)
    trials: int = 0
    modulus: int = 1
    witness_norms: list = field(default_factory=list)


def simulate(config: WalkConfig, confidence: float = DEFAULT_CONFIDENCE) -> SimulationResult:
    """
    Estimate the probability that the scaled walk endpoints fail to be
    n-universal.

    Trials are split into `config.threads` shards run concurrently; each trial
    draws from its own stream, so the result does not depend on the number
    of shards.
    """
    modulus = config.modulus
    logger.info("Simulating %d trials in %s: n = %d, L = %d, M = %d, modulus %d, %d shards",
                config.trials, config.ctx, config.n, config.L, config.M, modulus, config.threads)
    outcomes = asyncio.run(_gather_shards(config, modulus))
    failed = [o for o in outcomes if o.failed]
    failures = len(failed)
    p_hat = failures / config.trials
    low, high = wilson_interval(failures, config.trials, confidence)
    stderr = math.sqrt(p_hat * (1 - p_hat) / config.trials)
    by_prime = dict(sorted(Counter(o.witness for o in failed).items()))
    logger.info("Simulation finished: p_hat = %.4f (%d failures)", p_hat, failures)
    return SimulationResult(p_hat, low, high, stderr, by_prime, config.trials, modulus,
                            [o.witness_norm for o in failed if o.witness_norm is not None])


def sweep_M(config: WalkConfig, Ms: Iterable[int], confidence: float = DEFAULT_CONFIDENCE) -> pd.DataFrame:
    """`simulate` at several walk lengths, as a DataFrame (M, p_hat, ci_low, ci_high, stderr)"""
    rows = []
    for M in Ms:
        result = simulate(replace(config, M=M), confidence)
        rows.append({"M": M, "p_hat": result.p_hat, "ci_low": result.ci_low,
                     "ci_high": result.ci_high, "stderr": result.stderr})
    return pd.DataFrame(rows, columns=["M", "p_hat", "ci_low", "ci_high", "stderr"])


def default_threshold(M: int, d: int) -> float:
    """sqrt(M) max(log M, 1)^(1/(2d))"""
    if M < 1:
        return 0.0
    return math.sqrt(M) * max(math.log(M), 1.0) ** (1 / (2 * d))


def _all_endpoints(config: WalkConfig) -> np.ndarray:
    return np.concatenate([walk_endpoints(config, t) for t in range(config.trials)])


def tail_fraction(config: WalkConfig, kappa_rule: Callable[[int, int], float] = default_threshold) -> float:
    """Fraction of walk endpoints whose largest coordinate exceeds kappa_rule(M, d) in absolute value"""
    endpoints = _all_endpoints(config)
    threshold = kappa_rule(config.M, config.ctx.degree)
    return float(np.mean(np.abs(endpoints).max(axis=1) > threshold))


def walk_marginals(config: WalkConfig) -> pd.DataFrame:
    """Mean and variance of every endpoint coordinate over all walks of all trials"""
    endpoints = _all_endpoints(config)
    rows = [{"coordinate": i, "mean": float(endpoints[:, i].mean()),
             "variance": float(endpoints[:, i].var()), "count": len(endpoints)}
            for i in range(endpoints.shape[1])]
    return pd.DataFrame(rows, columns=["coordinate", "mean", "variance", "count"])
