"""
Normal-model limits: p2, p3, the variance surface sigma^2(r, s) and the
limit covariance of E_n, with a Monte-Carlo hook to check them
"""
import logging
import math
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import integrate, optimize
from scipy.special import ndtr

from rrindep.core.data import PairedSample
from rrindep.core.permutation import map_replicates, replicate_rng
from rrindep.core.recurrence import en
from rrindep.errors import InvalidParameterError

logger = logging.getLogger(__name__)

# The integrand is bounded by phi(x); the tail beyond |x| = 10 is below 1e-22
QUAD_LIMIT = 10.0
QUAD_EPSABS = 1e-13
DIAGONAL_BRACKET = (0.5, 1.5, 2.5)
DIAGONAL_TOL = 1e-4


class NormalLimitParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    r: float = Field(gt=0)
    s: float = Field(gt=0)
    r2: float = Field(gt=0)
    s2: float = Field(gt=0)


def _check_radius(r: float) -> None:
    if not r > 0:
        raise InvalidParameterError(f"Radius must be positive, got {r}")


def _phi(x):
    return np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def p2_normal(r: float) -> float:
    """P(|X1 - X2| < r) = 2 Phi(r / sqrt(2)) - 1 for independent standard normals."""
    _check_radius(r)
    return float(2.0 * ndtr(r / math.sqrt(2.0)) - 1.0)


def p3_normal(r: float, r2: Optional[float] = None) -> float:
    """
    P(|X1 - X2| < r, |X1 - X3| < r2); r2 defaults to r.

    int (Phi(x+r) - Phi(x-r)) (Phi(x+r2) - Phi(x-r2)) phi(x) dx by adaptive
    quadrature on [-10, 10].
    """
    _check_radius(r)
    r2 = r if r2 is None else r2
    _check_radius(r2)

    def integrand(x):
        return (ndtr(x + r) - ndtr(x - r)) * (ndtr(x + r2) - ndtr(x - r2)) * _phi(x)

    value, error = integrate.quad(integrand, -QUAD_LIMIT, QUAD_LIMIT, epsabs=QUAD_EPSABS, epsrel=1e-12, limit=200)
    if error > 1e-10:
        logger.warning(f"p3 quadrature error estimate {error:.2g} at r={r}, r2={r2}")
    return float(value)


def projection_variance(r: float) -> float:
    """p3(r) - p2(r)^2, the variance of P(|x - X'| < r) over x."""
    return p3_normal(r) - p2_normal(r) ** 2


def sigma2_normal(r: float, s: float) -> float:
    """4 (p3(r) - p2(r)^2) (p3(s) - p2(s)^2)"""
    return 4.0 * projection_variance(r) * projection_variance(s)


def asymptotic_cov(params: NormalLimitParams, wedge: bool = False) -> float:
    """
    Limit covariance of E_n(r, s) and E_n(r2, s2) for independent standard-normal
    marginals.

    By default the joint term is the two-radius p3(r, r2); with wedge=True it is
    p3(min(r, r2)) instead. Both reduce to sigma2_normal on the diagonal.
    """
    if wedge:
        joint_x = p3_normal(min(params.r, params.r2))
        joint_y = p3_normal(min(params.s, params.s2))
    else:
        joint_x = p3_normal(params.r, params.r2)
        joint_y = p3_normal(params.s, params.s2)
    factor_x = joint_x - p2_normal(params.r) * p2_normal(params.r2)
    factor_y = joint_y - p2_normal(params.s) * p2_normal(params.s2)
    return 4.0 * factor_x * factor_y


class DiagonalMaximum(NamedTuple):
    r: float
    sigma2: float

    @property
    def sd(self) -> float:
        return math.sqrt(self.sigma2)


def diagonal_maximum() -> DiagonalMaximum:
    """Maximum of sigma2_normal(r, r) by golden-section search around (0.5, 2.5)."""
    result = optimize.minimize_scalar(
        lambda r: -sigma2_normal(r, r),
        bracket=DIAGONAL_BRACKET,
        method="golden",
        tol=DIAGONAL_TOL,
    )
    best = DiagonalMaximum(r=float(result.x), sigma2=float(-result.fun))
    logger.info(f"Diagonal maximum sigma2={best.sigma2:.6f} (sd {best.sd:.5f}) at r={best.r:.4f}")
    return best


def diagonal_curve(radii: Optional[Sequence[float]] = None) -> Tuple[np.ndarray, np.ndarray]:
    """(r, sigma2_normal(r, r)) over `radii`, default 120 points on (0, 6]."""
    r = np.linspace(0.05, 6.0, 120) if radii is None else np.asarray(radii, dtype=float)
    return r, np.array([sigma2_normal(float(v), float(v)) for v in r])


class EnPair:
    """(E_n(r, s), E_n(r2, s2)) of one independent standard-normal sample."""

    def __init__(self, params: NormalLimitParams, n: int, seed: int):
        self.params = params
        self.n = n
        self.seed = seed

    def __call__(self, index: int) -> Tuple[float, float]:
        rng = replicate_rng(self.seed, index)
        sample = PairedSample(xs=rng.standard_normal(self.n), ys=rng.standard_normal(self.n))
        pairs = sample.pairs()
        p = self.params
        return en(pairs, p.r, p.s), en(pairs, p.r2, p.s2)


def empirical_en_covariance(
    params: NormalLimitParams,
    n: int = 200,
    reps: int = 5000,
    seed: int = 0,
    workers: Optional[int] = None,
) -> Tuple[float, float]:
    """
    Monte-Carlo covariance of E_n(r, s) and E_n(r2, s2) under independence.

    Returns:
        (covariance, standard error of the covariance estimate)
    """
    values = np.asarray(map_replicates(EnPair(params, n, seed), reps, workers), dtype=float)
    a = values[:, 0] - values[:, 0].mean()
    b = values[:, 1] - values[:, 1].mean()
    products = a * b
    cov = float(products.sum() / (reps - 1))
    se = float(products.std(ddof=1) / math.sqrt(reps))
    return cov, se
