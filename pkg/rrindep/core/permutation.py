"""
Permutation p-values and null-distribution critical values

Every replicate i draws from its own generator seeded by
SeedSequence(seed, spawn_key=(i,)), so results do not depend on how the
replicates are split across worker processes.
"""
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, ClassVar, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from rrindep import settings
from rrindep.core.data import DistanceMatrix, PairedSample, pair_arrays, repair_under_permutation
from rrindep.core.generators import normal_scores
from rrindep.core.statistic import StatKind, StatValue, statistic
from rrindep.core.weights import WeightChoice, WeightSpec, resolve_weights
from rrindep.errors import InvalidParameterError, SampleTooSmallError

logger = logging.getLogger(__name__)

Estimator = Literal["paper", "plus_one"]

MIN_PERMUTATIONS = 19
MIN_TEST_SIZE = 4
MIN_NULL_REPS = 100
# Permuted values within this relative distance of t_obs count as ties (>=)
TIE_TOLERANCE = 1e-12


class TestResult(BaseModel):
    """Outcome of one permutation test."""

    __test__: ClassVar[bool] = False

    statistic: StatValue
    p_value: float = Field(ge=0, le=1)
    m: int = Field(ge=1)
    seed: int = Field(ge=0)
    estimator: Estimator
    weight: Optional[WeightSpec] = None
    exceedances: int = Field(ge=0)
    n: int
    elapsed: Optional[float] = None

    @model_validator(mode="after")
    def _check_estimator(self):
        if estimate_pvalue(self.exceedances, self.m, self.estimator) != self.p_value:
            raise ValueError("p_value does not match the exceedance count")
        return self

    def to_json(self, timings: bool = False) -> str:
        exclude = None if timings else {"elapsed"}
        return self.model_dump_json(indent=2, exclude=exclude)


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based child generator for replicate `index` under a master seed."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def estimate_pvalue(count: int, m: int, estimator: Estimator) -> float:
    """
    paper:    count / m
    plus_one: (count + 1) / (m + 1), never 0 and valid at finite m
    """
    if estimator == "paper":
        return count / m
    if estimator == "plus_one":
        return (count + 1) / (m + 1)
    raise InvalidParameterError(f"Unknown estimator {estimator!r}")


def exceedance_count(null: np.ndarray, t_obs: float) -> int:
    threshold = t_obs - TIE_TOLERANCE * max(1.0, abs(t_obs))
    return int(np.count_nonzero(null >= threshold))


def map_replicates(task: Callable[[int], object], count: int, workers: Optional[int] = None) -> List:
    """
    Evaluate task(0), ..., task(count - 1), in order.

    `task` must be picklable when workers > 1; results come back in index
    order whatever the completion order.
    """
    workers = settings.get_threads() if workers is None else workers
    if workers <= 1 or count < 2:
        return [task(i) for i in range(count)]
    chunksize = max(1, count // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, range(count), chunksize=chunksize))


class RecurrenceStatistic:
    """
    T_n or T'_n of the pairing (X_sigma(i), Y_i), as a picklable callable.

    Distance matrices are computed once by the caller; each call only
    re-indexes them.
    """

    def __init__(self, dX: DistanceMatrix, dY: DistanceMatrix, w: Optional[WeightSpec], kind: StatKind = "cvm"):
        self.dX = dX
        self.dY = dY
        self.w = w
        self.kind = kind

    def evaluate(self, sigma: Optional[np.ndarray] = None) -> StatValue:
        if sigma is None:
            pairs = pair_arrays(self.dX, self.dY)
        else:
            pairs = repair_under_permutation(self.dX, self.dY, sigma, check=False)
        return statistic(pairs, self.w, self.kind)

    def __call__(self, sigma: np.ndarray) -> float:
        return self.evaluate(sigma).t


class PermutedReplicate:
    """Replicate i: a uniform permutation from replicate_rng(seed, i), then the statistic."""

    def __init__(self, stat: Callable[[np.ndarray], float], n: int, seed: int):
        self.stat = stat
        self.n = n
        self.seed = seed

    def __call__(self, index: int) -> float:
        sigma = replicate_rng(self.seed, index).permutation(self.n)
        return float(self.stat(sigma))


def permutation_null(
    stat: Callable[[np.ndarray], float],
    n: int,
    m: int,
    seed: int,
    workers: Optional[int] = None,
) -> np.ndarray:
    """
    The m permuted statistic values, in replicate order.

    Permutations are drawn uniformly with replacement from S(n); the identity
    is not forced into the sample.
    """
    values = map_replicates(PermutedReplicate(stat, n, seed), m, workers)
    return np.asarray(values, dtype=float)


def _check_test_args(n: int, m: int, seed: int) -> None:
    if m < MIN_PERMUTATIONS:
        raise InvalidParameterError(f"At least {MIN_PERMUTATIONS} permutations are required, got {m}")
    if n < MIN_TEST_SIZE:
        raise SampleTooSmallError(f"A permutation test needs n >= {MIN_TEST_SIZE}, got {n}")
    if seed < 0:
        raise InvalidParameterError("seed must be nonnegative")


def permutation_pvalue(
    dX: DistanceMatrix,
    dY: DistanceMatrix,
    w: Optional[WeightChoice],
    kind: StatKind = "cvm",
    m: Optional[int] = None,
    seed: int = 0,
    estimator: Estimator = "paper",
    workers: Optional[int] = None,
) -> TestResult:
    """
    Permutation test of independence with the recurrence-rate statistic.

    Args:
        dX, dY: distance matrices, computed once
        w: fixed WeightSpec, or "auto" for data-driven weights. The data-driven
            fit depends only on the distance multisets, which every
            re-pairing preserves, so it is fitted once.
        kind: "cvm" (T_n) or "sup" (T'_n)
        m: permutation count (defaults to RRINDEP_DEFAULT_PERMUTATIONS)
        seed: master seed
        estimator: "paper" or "plus_one"
        workers: worker processes (defaults to RRINDEP_THREADS)

    Returns:
        TestResult
    """
    m = settings.get_default_permutations() if m is None else m
    _check_test_args(dX.n, m, seed)
    started = time.perf_counter()

    observed_pairs = pair_arrays(dX, dY)
    weight = resolve_weights(w, observed_pairs) if kind == "cvm" else None
    stat = RecurrenceStatistic(dX, dY, weight, kind)
    observed = statistic(observed_pairs, weight, kind)

    null = permutation_null(stat, dX.n, m, seed, workers)
    count = exceedance_count(null, observed.t)
    elapsed = time.perf_counter() - started
    logger.info(f"Permutation test ({kind}, n={dX.n}, m={m}): t={observed.t:.6g}, {count} exceedances, {elapsed:.2f}s")

    return TestResult(
        statistic=observed,
        p_value=estimate_pvalue(count, m, estimator),
        m=m,
        seed=seed,
        estimator=estimator,
        weight=weight,
        exceedances=count,
        n=dX.n,
        elapsed=elapsed,
    )


def independence_test(
    sample: PairedSample,
    w: WeightChoice = "auto",
    kind: StatKind = "cvm",
    m: Optional[int] = None,
    seed: int = 0,
    estimator: Estimator = "paper",
    workers: Optional[int] = None,
) -> TestResult:
    """permutation_pvalue on a PairedSample, reusing its cached distances."""
    dX, dY = sample.distances()
    return permutation_pvalue(dX, dY, w, kind=kind, m=m, seed=seed, estimator=estimator, workers=workers)


NullSampler = Callable[[int, np.random.Generator], PairedSample]


def normal_null_sampler(n: int, rng: np.random.Generator) -> PairedSample:
    """Independent N(0,1) marginals after the normal-scores transform."""
    xs = normal_scores(rng.standard_normal(n))
    ys = normal_scores(rng.standard_normal(n))
    return PairedSample(xs=xs, ys=ys)


class NullReplicate:
    """Statistic of one independent null sample, drawn from replicate_rng(seed, i)."""

    def __init__(self, sampler: NullSampler, n: int, w: Optional[WeightChoice], kind: StatKind, seed: int):
        self.sampler = sampler
        self.n = n
        self.w = w
        self.kind = kind
        self.seed = seed

    def __call__(self, index: int) -> float:
        sample = self.sampler(self.n, replicate_rng(self.seed, index))
        pairs = sample.pairs()
        weight = resolve_weights(self.w, pairs) if self.kind == "cvm" else None
        return statistic(pairs, weight, self.kind).t


def null_distribution(
    null_sampler: Optional[NullSampler],
    n: int,
    w: Optional[WeightChoice],
    kind: StatKind = "cvm",
    reps: int = 5000,
    seed: int = 0,
    workers: Optional[int] = None,
) -> np.ndarray:
    """Statistic values over `reps` independent null samples, in replicate order."""
    if reps < MIN_NULL_REPS:
        raise InvalidParameterError(f"At least {MIN_NULL_REPS} null replications are required, got {reps}")
    sampler = null_sampler or normal_null_sampler
    started = time.perf_counter()
    values = np.asarray(map_replicates(NullReplicate(sampler, n, w, kind, seed), reps, workers), dtype=float)
    logger.info(f"Null distribution ({kind}, n={n}, reps={reps}) in {time.perf_counter() - started:.2f}s")
    return values


def critical_value(
    null_sampler: Optional[NullSampler],
    n: int,
    w: Optional[WeightChoice],
    kind: StatKind = "cvm",
    level: float = 0.05,
    reps: int = 5000,
    seed: int = 0,
    workers: Optional[int] = None,
) -> float:
    """
    Empirical (1 - level)-quantile of the statistic under the null.

    The default sampler draws independent N(0,1) marginals and rank-transforms
    them, which makes the threshold distribution-free for continuous scalar data.
    """
    if not 0 < level < 1:
        raise InvalidParameterError(f"level must lie in (0, 1), got {level}")
    values = null_distribution(null_sampler, n, w, kind=kind, reps=reps, seed=seed, workers=workers)
    threshold = float(np.quantile(values, 1.0 - level))
    logger.debug(f"Critical value at level {level}: {threshold:.6g}")
    return threshold
