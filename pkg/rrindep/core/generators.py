"""
Seeded samplers for the alternatives and time-series models, and the
normal-scores transform
"""
import logging
import math
from functools import lru_cache
from typing import Dict, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.linalg import cholesky, toeplitz
from scipy.signal import lfilter
from scipy.special import ndtri
from scipy.stats import rankdata

from rrindep.core.data import PairedSample
from rrindep.errors import InvalidParameterError, SampleTooSmallError

logger = logging.getLogger(__name__)

AlternativeName = Literal[
    "parabola",
    "two_parabolas",
    "circle",
    "diamond",
    "w_shape",
    "four_clouds",
    "logarithmic",
    "epsilon",
    "quadratic",
    "two_d_pairwise",
    "independent_normal",
    "ar1",
    "arma21",
    "bm",
    "fbm",
    "fou",
    "fou2",
]

SeriesLink = Literal["square", "sqrt", "product", "product_noise", "noise", "bm"]

# Parameter schema: every accepted parameter and its default
SCHEMAS: Dict[str, Dict[str, float]] = {
    "parabola": {},
    "two_parabolas": {},
    "circle": {"noise_sd": 0.125},
    "diamond": {"theta": math.pi / 4},
    "w_shape": {},
    "four_clouds": {"spread": 1.0 / 3.0},
    "logarithmic": {},
    "epsilon": {},
    "quadratic": {"noise_var": 3.0},
    "two_d_pairwise": {},
    "independent_normal": {"dim_x": 1, "dim_y": 1},
    "ar1": {"phi": 0.9, "length": 100},
    "arma21": {"phi1": 0.2, "phi2": 0.5, "theta": 0.2, "length": 100, "burn_in": 100},
    "bm": {"sigma": 1.0, "length": 100},
    "fbm": {"hurst": 0.7, "length": 100},
    "fou": {"hurst": 0.7, "lam": 0.3, "sigma": 1.0, "length": 100},
    "fou2": {"hurst": 0.7, "lam1": 0.3, "lam2": 0.8, "sigma": 1.0, "length": 100},
}

INTEGER_PARAMS = {"dim_x", "dim_y", "length", "burn_in"}

SCALAR_ALTERNATIVES = {"parabola", "two_parabolas", "circle", "diamond", "w_shape", "four_clouds"}
VECTOR_DIM = 5
LINKED_SERIES = {"ar1", "arma21", "bm", "fbm"}
SERIES = LINKED_SERIES | {"fou", "fou2"}

# FOU drivers start this many slowest time constants before t = 0
FOU_BURN_IN = 5.0
FBM_JITTER = 1e-8


class AlternativeSpec(BaseModel):
    """
    One data-generating model.

    `params` may override any default of SCHEMAS[name]; unknown names are
    rejected. Series models built from ar1, arma21, bm and fbm carry a `link`
    choosing Y (default "square").
    """

    model_config = ConfigDict(frozen=True)

    name: AlternativeName
    params: Dict[str, float] = Field(default_factory=dict)
    link: Optional[SeriesLink] = None
    n: int = Field(default=30, ge=2)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _check_params(self):
        schema = SCHEMAS[self.name]
        unknown = sorted(set(self.params) - set(schema))
        if unknown:
            raise ValueError(f"Unknown parameters for {self.name}: {unknown}; accepted: {sorted(schema)}")
        for key, value in self.params.items():
            if not math.isfinite(value):
                raise ValueError(f"Parameter {key} must be finite")
            if key in INTEGER_PARAMS and (value != int(value) or value < 1):
                raise ValueError(f"Parameter {key} must be a positive integer, got {value}")
        if self.link is not None and self.name not in LINKED_SERIES:
            raise ValueError(f"{self.name} does not take a link")
        return self

    def resolved(self) -> Dict[str, float]:
        values = dict(SCHEMAS[self.name])
        values.update(self.params)
        return values

    @property
    def resolved_link(self) -> Optional[str]:
        if self.name in LINKED_SERIES:
            return self.link or "square"
        return None

    @property
    def scalar_marginals(self) -> bool:
        if self.name in SCALAR_ALTERNATIVES:
            return True
        if self.name == "independent_normal":
            p = self.resolved()
            return p["dim_x"] == 1 and p["dim_y"] == 1
        return False

    def key(self) -> str:
        """Stable label independent of n and seed, e.g. `ar1[link=product,phi=0.9]`."""
        parts = [f"{k}={v:g}" for k, v in sorted(self.params.items())]
        if self.link is not None:
            parts.insert(0, f"link={self.link}")
        return f"{self.name}[{','.join(parts)}]" if parts else self.name


def normal_scores(xs) -> np.ndarray:
    """
    Phi^{-1}(R_i / (n + 1)) per coordinate, R_i the average rank of X_i.

    Scalars in, scalars out; an (n, p) array is transformed column by column.
    """
    values = np.asarray(xs, dtype=float)
    if values.shape[0] < 2:
        raise SampleTooSmallError("normal_scores needs at least 2 values")
    n = values.shape[0]
    ranks = rankdata(values, method="average", axis=0)
    return ndtri(ranks / (n + 1))


# Scalar alternatives


def _parabola(n, p, rng):
    x = rng.uniform(-1.0, 1.0, n)
    y = (x ** 2 + rng.uniform(0.0, 1.0, n)) / 2.0
    return x, y


def _two_parabolas(n, p, rng):
    x = rng.uniform(-1.0, 1.0, n)
    magnitude = x ** 2 + rng.uniform(0.0, 1.0, n) / 2.0
    sign = np.where(rng.uniform(0.0, 1.0, n) < 0.5, 1.0, -1.0)
    return x, sign * magnitude


def _circle(n, p, rng):
    u = rng.uniform(-1.0, 1.0, n)
    x = np.sin(np.pi * u) + p["noise_sd"] * rng.standard_normal(n)
    y = np.cos(np.pi * u) + p["noise_sd"] * rng.standard_normal(n)
    return x, y


def _diamond(n, p, rng):
    u1 = rng.uniform(-1.0, 1.0, n)
    u2 = rng.uniform(-1.0, 1.0, n)
    theta = p["theta"]
    x = math.sin(theta) * u1 + math.cos(theta) * u2
    y = -math.sin(theta) * u1 + math.cos(theta) * u2
    return x, y


def _w_shape(n, p, rng):
    u = rng.uniform(-1.0, 1.0, n)
    u1 = rng.uniform(0.0, 1.0, n)
    u2 = rng.uniform(0.0, 1.0, n)
    x = u + u1 / 3.0
    # U_2/n uses the sample size of the draw
    y = 4.0 * (u ** 2 - 0.5) ** 2 + u2 / n
    return x, y


def _clouds(n, spread, rng):
    centre = np.where(rng.uniform(0.0, 1.0, n) < 0.5, 1.0, -1.0)
    return centre + spread * rng.standard_normal(n)


def _four_clouds(n, p, rng):
    x = _clouds(n, p["spread"], rng)
    y = _clouds(n, p["spread"], rng)
    return x, y


# Vector alternatives


def _logarithmic(n, p, rng):
    x = rng.standard_normal((n, VECTOR_DIM))
    return x, np.log(x ** 2)


def _epsilon(n, p, rng):
    x = rng.standard_normal((n, VECTOR_DIM))
    eps = rng.standard_normal((n, VECTOR_DIM))
    return x, eps * x


def _quadratic(n, p, rng):
    x = rng.standard_normal((n, VECTOR_DIM))
    eps = math.sqrt(p["noise_var"]) * rng.standard_normal((n, VECTOR_DIM))
    y = eps.copy()
    y[:, :2] += x[:, :2] + 4.0 * x[:, :2] ** 2
    return x, y


def _two_d_pairwise(n, p, rng):
    x = rng.standard_normal(n)
    z0 = rng.standard_normal(n)
    y1 = rng.standard_normal(n)
    y2 = np.abs(z0) * np.sign(x * y1)
    return x, np.column_stack([y1, y2])


def _independent_normal(n, p, rng):
    x = rng.standard_normal((n, int(p["dim_x"])))
    y = rng.standard_normal((n, int(p["dim_y"])))
    return x, y


_SAMPLERS = {
    "parabola": _parabola,
    "two_parabolas": _two_parabolas,
    "circle": _circle,
    "diamond": _diamond,
    "w_shape": _w_shape,
    "four_clouds": _four_clouds,
    "logarithmic": _logarithmic,
    "epsilon": _epsilon,
    "quadratic": _quadratic,
    "two_d_pairwise": _two_d_pairwise,
    "independent_normal": _independent_normal,
}


def generate(spec: AlternativeSpec) -> PairedSample:
    """
    n i.i.d. draws of (X, Y) under `spec`, reproducible from spec.seed.

    Series models are delegated to generate_series.
    """
    if spec.name in SERIES:
        return generate_series(spec)
    rng = np.random.default_rng(spec.seed)
    xs, ys = _SAMPLERS[spec.name](spec.n, spec.resolved(), rng)
    return PairedSample(xs=xs, ys=ys)


# Time series


@lru_cache(maxsize=16)
def fgn_factor(hurst: float, count: int, step: float) -> np.ndarray:
    """
    Lower Cholesky factor of the covariance of `count` fGn increments at spacing `step`.

    Increment covariance at lag k is step^{2H} (|k+1|^{2H} + |k-1|^{2H} - 2|k|^{2H}) / 2,
    which is the fBm covariance (s^{2H} + t^{2H} - |t-s|^{2H}) / 2 differenced on the grid.
    """
    if not 0 < hurst < 1:
        raise InvalidParameterError(f"Hurst parameter must lie in (0, 1), got {hurst}")
    k = np.arange(count, dtype=float)
    two_h = 2.0 * hurst
    rho = 0.5 * (np.abs(k + 1) ** two_h + np.abs(k - 1) ** two_h - 2.0 * k ** two_h)
    cov = step ** two_h * toeplitz(rho)
    factor = cholesky(cov + FBM_JITTER * step ** two_h * np.eye(count), lower=True)
    factor.setflags(write=False)
    return factor


def fbm_paths(hurst: float, length: int, count: int, rng: np.random.Generator, step: Optional[float] = None) -> np.ndarray:
    """
    `count` fBm trajectories at times 0, step, ..., (length-1)*step, starting at 0.

    Exact in distribution up to the diagonal jitter. H = 0.5 gives Brownian motion.
    """
    if not 0 < hurst < 1:
        raise InvalidParameterError(f"Hurst parameter must lie in (0, 1), got {hurst}")
    step = 1.0 / length if step is None else step
    path = np.zeros((count, length))
    if length > 1:
        factor = fgn_factor(hurst, length - 1, step)
        increments = rng.standard_normal((count, length - 1)) @ factor.T
        path[:, 1:] = np.cumsum(increments, axis=1)
    return path


def fou_transform(path: np.ndarray, lam: float, sigma: float, step: float) -> np.ndarray:
    """
    Y_t = sigma int_{start}^t exp(-lam (t - s)) dX_s along each row of `path`.

    Left-point Riemann-Stieltjes sums, computed by the recursion
    Y_{k+1} = exp(-lam step) (Y_k + sigma (X_{k+1} - X_k)), Y_0 = 0.
    """
    if lam <= 0:
        raise InvalidParameterError(f"lambda must be positive, got {lam}")
    decay = math.exp(-lam * step)
    y = np.zeros_like(path)
    y[:, 1:] = lfilter([decay], [1.0, -decay], sigma * np.diff(path, axis=1), axis=1)
    return y


def fou2_coefficients(lam1: float, lam2: float):
    if lam1 == lam2:
        raise InvalidParameterError("FOU(2) needs two distinct rates")
    return lam1 / (lam1 - lam2), lam2 / (lam2 - lam1)


def fou2_transform(path: np.ndarray, lam1: float, lam2: float, sigma: float, step: float) -> np.ndarray:
    c1, c2 = fou2_coefficients(lam1, lam2)
    return c1 * fou_transform(path, lam1, sigma, step) + c2 * fou_transform(path, lam2, sigma, step)


def fou_burn_in(lam_min: float, length: int) -> int:
    """Grid points simulated before t = 0 so that exp(-lam_min * burn) <= exp(-5)."""
    return int(math.ceil(FOU_BURN_IN / lam_min * length))


def _ar1(n, p, rng):
    phi = p["phi"]
    if not abs(phi) < 1:
        raise InvalidParameterError(f"AR(1) coefficient must satisfy |phi| < 1, got {phi}")
    length = int(p["length"])
    shocks = rng.standard_normal((n, length))
    # stationary start
    shocks[:, 0] /= math.sqrt(1.0 - phi ** 2)
    return lfilter([1.0], [1.0, -phi], shocks, axis=1)


def _arma21(n, p, rng):
    phi1, phi2, theta = p["phi1"], p["phi2"], p["theta"]
    if not (phi1 + phi2 < 1 and phi2 - phi1 < 1 and abs(phi2) < 1):
        raise InvalidParameterError(f"ARMA(2,1) coefficients ({phi1}, {phi2}) are not stationary")
    length, burn = int(p["length"]), int(p["burn_in"])
    shocks = rng.standard_normal((n, length + burn))
    x = lfilter([1.0, theta], [1.0, -phi1, -phi2], shocks, axis=1)
    return x[:, burn:]


def _bm(n, p, rng):
    length = int(p["length"])
    return p["sigma"] * fbm_paths(0.5, length, n, rng)


def _fbm(n, p, rng):
    return fbm_paths(p["hurst"], int(p["length"]), n, rng)


_SERIES_X = {"ar1": _ar1, "arma21": _arma21, "bm": _bm, "fbm": _fbm}


def _link(name: str, link: str, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    n, length = x.shape
    if link == "square":
        return x ** 2 + 3.0 * rng.standard_normal(x.shape)
    if link == "sqrt":
        root = np.sqrt(np.abs(x))
        if name in ("ar1", "arma21"):
            sd = root.std(axis=1, keepdims=True)
        else:
            sd = 1.0
        return root + sd * rng.standard_normal(x.shape)
    if link == "product":
        return rng.standard_normal(x.shape) * x
    if link == "product_noise":
        eps = rng.standard_normal(x.shape)
        return eps * x + 3.0 * rng.standard_normal(x.shape)
    if link == "noise":
        return rng.standard_normal(x.shape)
    if link == "bm":
        return fbm_paths(0.5, length, n, rng)
    raise InvalidParameterError(f"Unknown link {link!r}")


def _fou_pair(spec: AlternativeSpec, rng: np.random.Generator):
    p = spec.resolved()
    length = int(p["length"])
    step = 1.0 / length
    lam_min = p["lam"] if spec.name == "fou" else min(p["lam1"], p["lam2"])
    if lam_min <= 0:
        raise InvalidParameterError("FOU rates must be positive")
    burn = fou_burn_in(lam_min, length)

    path = fbm_paths(p["hurst"], burn + length, spec.n, rng, step=step)
    if spec.name == "fou":
        y = fou_transform(path, p["lam"], p["sigma"], step)
    else:
        y = fou2_transform(path, p["lam1"], p["lam2"], p["sigma"], step)
    # X restarted at 0 on the recorded window is again an fBm
    x = path[:, burn:] - path[:, burn:burn + 1]
    return x, y[:, burn:]


def generate_series(spec: AlternativeSpec) -> PairedSample:
    """
    n independent trajectory pairs of length L, each Y built from its own X.

    ar1, arma21, bm and fbm take Y from `spec.link`; fou and fou2 take Y as the
    (two-rate) fractional Ornstein-Uhlenbeck transform of an fBm X.
    """
    if spec.name not in SERIES:
        raise InvalidParameterError(f"{spec.name} is not a time-series model")
    rng = np.random.default_rng(spec.seed)
    if spec.name in ("fou", "fou2"):
        x, y = _fou_pair(spec, rng)
    else:
        p = spec.resolved()
        x = _SERIES_X[spec.name](spec.n, p, rng)
        y = _link(spec.name, spec.resolved_link, x, rng)
    logger.debug(f"Generated {spec.n} trajectory pairs for {spec.key()}")
    return PairedSample(xs=x, ys=y)
