"""
Comparison tests: distance covariance, Pearson/Spearman/Kendall and HSIC
"""
import logging
import time
from typing import Dict, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field
from scipy.stats import kendalltau, pearsonr, spearmanr

from rrindep.core.data import DistanceMatrix, PairedSample
from rrindep.core.permutation import (
    MIN_PERMUTATIONS,
    Estimator,
    estimate_pvalue,
    exceedance_count,
    permutation_null,
)
from rrindep.errors import DegenerateSampleError, DimensionMismatchError, InvalidParameterError, SampleTooSmallError

logger = logging.getLogger(__name__)

BaselineName = Literal["dcov", "psk_max", "hsic"]

# Kendall's tau switches from the exact null distribution to the normal approximation above this n
KENDALL_EXACT_MAX_N = 12


class BaselineResult(BaseModel):
    test: BaselineName
    statistic: float
    p_value: float = Field(ge=0, le=1)
    m: int = Field(ge=0)
    seed: int = Field(ge=0)
    components: Optional[Dict[str, float]] = None
    elapsed: Optional[float] = None


def _check_n(sample: PairedSample) -> None:
    if sample.n < 4:
        raise SampleTooSmallError(f"Baseline tests need n >= 4, got {sample.n}")


def _check_m(m: int) -> None:
    if m < MIN_PERMUTATIONS:
        raise InvalidParameterError(f"At least {MIN_PERMUTATIONS} permutations are required, got {m}")


def double_center(d: np.ndarray) -> np.ndarray:
    return d - d.mean(axis=0)[None, :] - d.mean(axis=1)[:, None] + d.mean()


class DcovStatistic:
    """V^2_n of (X_sigma(i), Y_i) from precomputed double-centred matrices."""

    def __init__(self, dX: DistanceMatrix, dY: DistanceMatrix):
        self.A = double_center(dX.d)
        self.B = double_center(dY.d)

    def __call__(self, sigma: np.ndarray) -> float:
        return float(np.mean(self.A[np.ix_(sigma, sigma)] * self.B))


def distance_covariance(dX: DistanceMatrix, dY: DistanceMatrix):
    """
    Returns:
        (dcov2, dcor): squared distance covariance V^2_n and distance correlation
    """
    A = double_center(dX.d)
    B = double_center(dY.d)
    dcov2_xy = float(np.mean(A * B))
    dcov2_xx = float(np.mean(A * A))
    dcov2_yy = float(np.mean(B * B))
    denom = np.sqrt(dcov2_xx * dcov2_yy)
    dcor = float(np.sqrt(max(dcov2_xy, 0.0) / denom)) if denom > 0 else 0.0
    return dcov2_xy, dcor


def dcov_test(
    sample: PairedSample,
    m: int = 200,
    seed: int = 0,
    estimator: Estimator = "paper",
    workers: Optional[int] = None,
) -> BaselineResult:
    """Distance covariance with permutation calibration."""
    _check_n(sample)
    _check_m(m)
    started = time.perf_counter()
    dX, dY = sample.distances()
    stat = DcovStatistic(dX, dY)
    observed = stat(np.arange(sample.n))
    null = permutation_null(stat, sample.n, m, seed, workers)
    count = exceedance_count(null, observed)
    logger.debug(f"dCov: V2={observed:.6g}, {count}/{m} exceedances")
    return BaselineResult(
        test="dcov",
        statistic=observed,
        p_value=estimate_pvalue(count, m, estimator),
        m=m,
        seed=seed,
        elapsed=time.perf_counter() - started,
    )


def _scalar_columns(sample: PairedSample):
    if sample.p != 1 or sample.q != 1:
        raise DimensionMismatchError(f"Classical correlation tests need scalar marginals, got p={sample.p}, q={sample.q}")
    return sample.xs[:, 0], sample.ys[:, 0]


def _finite_or_one(name: str, value: float) -> float:
    if np.isnan(value):
        logger.warning(f"{name} p-value undefined (constant input); using 1")
        return 1.0
    return float(value)


def psk_pvalues(sample: PairedSample) -> Dict[str, float]:
    """Two-sided classical p-values of the Pearson, Spearman and Kendall tests."""
    x, y = _scalar_columns(sample)
    n = sample.n
    ties = np.unique(x).size < n or np.unique(y).size < n
    method = "exact" if n <= KENDALL_EXACT_MAX_N and not ties else "asymptotic"
    return {
        "pearson": _finite_or_one("Pearson", pearsonr(x, y)[1]),
        "spearman": _finite_or_one("Spearman", spearmanr(x, y)[1]),
        "kendall": _finite_or_one("Kendall", kendalltau(x, y, method=method)[1]),
    }


def psk_max_test(sample: PairedSample, m: int = 0, seed: int = 0) -> BaselineResult:
    """
    Pearson, Spearman and Kendall on scalar pairs.

    The per-test p-values are kept in `components`; p_value is the smallest,
    so a single-sample rejection means "at least one of the three rejects".
    Power tables report each test and their maximum power separately.
    """
    _check_n(sample)
    started = time.perf_counter()
    pvalues = psk_pvalues(sample)
    best = min(pvalues, key=pvalues.get)
    x, y = _scalar_columns(sample)
    coefficient = {
        "pearson": lambda: pearsonr(x, y)[0],
        "spearman": lambda: spearmanr(x, y)[0],
        "kendall": lambda: kendalltau(x, y)[0],
    }[best]()
    return BaselineResult(
        test="psk_max",
        statistic=0.0 if np.isnan(coefficient) else float(coefficient),
        p_value=pvalues[best],
        m=m,
        seed=seed,
        components=pvalues,
        elapsed=time.perf_counter() - started,
    )


def median_bandwidth(d: DistanceMatrix, side: str) -> float:
    """Median of the n(n-1)/2 pairwise distances."""
    upper = d.d[np.triu_indices(d.n, k=1)]
    bandwidth = float(np.median(upper))
    if not bandwidth > 0:
        raise DegenerateSampleError(side, f"Median {side} distance is zero; HSIC bandwidth is undefined")
    return bandwidth


def gaussian_gram(d: DistanceMatrix, bandwidth: float) -> np.ndarray:
    return np.exp(-(d.d ** 2) / (2.0 * bandwidth ** 2))


class HsicStatistic:
    """Biased HSIC tr(K H L H) / n^2 of (X_sigma(i), Y_i)."""

    def __init__(self, dX: DistanceMatrix, dY: DistanceMatrix):
        n = dX.n
        K = gaussian_gram(dX, median_bandwidth(dX, "X"))
        L = gaussian_gram(dY, median_bandwidth(dY, "Y"))
        H = np.eye(n) - np.ones((n, n)) / n
        self.K = K
        self.Lc = H @ L @ H
        self.n = n

    def __call__(self, sigma: np.ndarray) -> float:
        # tr(K_sigma H L H) with H L H symmetric
        return float(np.sum(self.K[np.ix_(sigma, sigma)] * self.Lc)) / self.n ** 2


def hsic_test(
    sample: PairedSample,
    m: int = 200,
    seed: int = 0,
    estimator: Estimator = "paper",
    workers: Optional[int] = None,
) -> BaselineResult:
    """HSIC with Gaussian kernels, median-distance bandwidths and permutation calibration."""
    _check_n(sample)
    _check_m(m)
    started = time.perf_counter()
    dX, dY = sample.distances()
    stat = HsicStatistic(dX, dY)
    observed = stat(np.arange(sample.n))
    null = permutation_null(stat, sample.n, m, seed, workers)
    count = exceedance_count(null, observed)
    logger.debug(f"HSIC: {observed:.6g}, {count}/{m} exceedances")
    return BaselineResult(
        test="hsic",
        statistic=observed,
        p_value=estimate_pvalue(count, m, estimator),
        m=m,
        seed=seed,
        elapsed=time.perf_counter() - started,
    )
