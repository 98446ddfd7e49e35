"""
Weight measure dG(r, s) = g1(r) g2(s) dr ds with Gaussian g1, g2
"""
import logging
import math
import re
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field
from scipy.special import ndtr

from rrindep.core.data import PairArrays
from rrindep.errors import DegenerateSampleError, InvalidParameterError, SampleTooSmallError

logger = logging.getLogger(__name__)

AUTO = "auto"

# Named presets used as power-table columns: (mu, variance)
PRESETS = {
    "n_1_1": (1.0, 1.0),
    "n_0_1": (0.0, 1.0),
    "n_1_4": (1.0, 4.0),
    "n_0_4": (0.0, 4.0),
    "n_2_4": (2.0, 4.0),
}

_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_GAUSSIAN = re.compile(rf"^\s*N\(\s*({_NUMBER})\s*,\s*({_NUMBER})\s*\)\s*$")


class GaussianSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    mu: float
    sigma: float = Field(gt=0)

    @computed_field
    @property
    def sigma2(self) -> float:
        return self.sigma ** 2

    def label(self) -> str:
        return f"N({self.mu:g},{self.sigma2:g})"


class WeightSpec(BaseModel):
    """
    Gaussian densities g1 (for X distances) and g2 (for Y distances).

    The weight is not truncated to (0, inf); the closed forms plug distances
    into the untruncated CDFs.
    """

    model_config = ConfigDict(frozen=True)

    g1: GaussianSpec
    g2: GaussianSpec
    origin: Literal["fixed", "data_driven"] = "fixed"

    @classmethod
    def fixed(cls, mu1: float, var1: float, mu2: Optional[float] = None, var2: Optional[float] = None) -> "WeightSpec":
        """Build from means and variances; g2 defaults to g1."""
        if var1 <= 0 or (var2 is not None and var2 <= 0):
            raise InvalidParameterError("Weight variances must be positive")
        mu2 = mu1 if mu2 is None else mu2
        var2 = var1 if var2 is None else var2
        return cls(
            g1=GaussianSpec(mu=mu1, sigma=math.sqrt(var1)),
            g2=GaussianSpec(mu=mu2, sigma=math.sqrt(var2)),
        )

    def label(self) -> str:
        if self.g1 == self.g2:
            return self.g1.label()
        return f"{self.g1.label()}x{self.g2.label()}"

    def cdf1(self, x):
        return gaussian_cdf(self.g1.mu, self.g1.sigma, x)

    def cdf2(self, x):
        return gaussian_cdf(self.g2.mu, self.g2.sigma, x)


def gaussian_cdf(mu: float, sigma: float, x):
    """
    Phi((x - mu) / sigma).

    Uses scipy.special.ndtr, which evaluates through erf/erfc with relative
    error near double precision; gaussian_cdf(mu, sigma, mu) is exactly 0.5.
    """
    if sigma <= 0:
        raise InvalidParameterError(f"sigma must be positive, got {sigma}")
    return ndtr((np.asarray(x, dtype=float) - mu) / sigma)


def gaussian_pdf(mu: float, sigma: float, x):
    z = (np.asarray(x, dtype=float) - mu) / sigma
    return np.exp(-0.5 * z * z) / (sigma * math.sqrt(2.0 * math.pi))


def fit_data_driven(pairs: PairArrays) -> WeightSpec:
    """
    Fit g1, g2 to the mean and population variance of the N ordered-pair
    distances of X and Y.
    """
    if pairs.N < 2:
        raise SampleTooSmallError("Data-driven weights need at least 2 ordered pairs")

    fitted = {}
    for side, values in (("X", pairs.Z), ("Y", pairs.T)):
        var = float(np.var(values))
        if not var > 0:
            raise DegenerateSampleError(side, f"All {side} distances are equal; data-driven weight is undefined")
        fitted[side] = GaussianSpec(mu=float(np.mean(values)), sigma=math.sqrt(var))

    spec = WeightSpec(g1=fitted["X"], g2=fitted["Y"], origin="data_driven")
    logger.debug(f"Data-driven weights: {spec.label()}")
    return spec


WeightChoice = Union[str, WeightSpec]


def parse_weights(text: str) -> WeightChoice:
    """
    Parse `auto`, a preset name, `N(mu,sigma2)` or `N(mu1,s1)xN(mu2,s2)`.

    Returns:
        AUTO for data-driven weights, otherwise a fixed WeightSpec
    """
    cleaned = text.strip()
    if cleaned.lower() == AUTO:
        return AUTO
    if cleaned.lower() in PRESETS:
        mu, var = PRESETS[cleaned.lower()]
        return WeightSpec.fixed(mu, var)

    parts = re.split(r"\)\s*[xX]\s*N", cleaned)
    if len(parts) == 2:
        parts = [parts[0] + ")", "N" + parts[1]]
    if len(parts) not in (1, 2):
        raise InvalidParameterError(f"Cannot parse weights {text!r}")

    params = []
    for part in parts:
        match = _GAUSSIAN.match(part)
        if not match:
            raise InvalidParameterError(
                f"Cannot parse weights {text!r}; expected auto | N(mu,sigma2) | N(mu1,sigma2_1)xN(mu2,sigma2_2)"
            )
        params.append((float(match.group(1)), float(match.group(2))))

    if len(params) == 1:
        return WeightSpec.fixed(*params[0])
    return WeightSpec.fixed(params[0][0], params[0][1], params[1][0], params[1][1])


def choice_label(choice: WeightChoice) -> str:
    return AUTO if isinstance(choice, str) else choice.label()


def resolve_weights(choice: WeightChoice, pairs: PairArrays) -> WeightSpec:
    """Fixed weights pass through; AUTO is fitted to the observed pairs."""
    if isinstance(choice, WeightSpec):
        return choice
    if choice == AUTO:
        return fit_data_driven(pairs)
    parsed = parse_weights(choice)
    return resolve_weights(parsed, pairs)
