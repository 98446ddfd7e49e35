"""
Recurrence rates, the process E_n and its order-4 U-process approximation
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np

from rrindep.core.data import DistanceMatrix, PairArrays, pair_arrays
from rrindep.errors import InvalidParameterError, SampleTooSmallError

logger = logging.getLogger(__name__)

# The O(n^4) U-process is a test oracle, not a production evaluator
EN_PRIME_MAX_N = 12
HN_SLACK = 1e-12


def _warn_radius(name: str, value: float) -> None:
    if value <= 0:
        logger.warning(f"Radius {name}={value} is not positive; recurrence rate is 0 by the strict inequality")


def rr_x(pairs: PairArrays, r: float) -> float:
    """(1/N) #{k : Z[k] < r}"""
    _warn_radius("r", r)
    return np.count_nonzero(pairs.Z < r) / pairs.N


def rr_y(pairs: PairArrays, s: float) -> float:
    """(1/N) #{k : T[k] < s}"""
    _warn_radius("s", s)
    return np.count_nonzero(pairs.T < s) / pairs.N


def rr_joint(pairs: PairArrays, r: float, s: float) -> float:
    """(1/N) #{k : Z[k] < r and T[k] < s}"""
    _warn_radius("r", r)
    _warn_radius("s", s)
    return np.count_nonzero((pairs.Z < r) & (pairs.T < s)) / pairs.N


def en(pairs: PairArrays, r: float, s: float) -> float:
    """E_n(r, s) = sqrt(n) (RR^{X,Y}(r, s) - RR^X(r) RR^Y(s))"""
    return math.sqrt(pairs.n) * (rr_joint(pairs, r, s) - rr_x(pairs, r) * rr_y(pairs, s))


@dataclass(frozen=True)
class EnGrid:
    n: int
    r_grid: np.ndarray
    s_grid: np.ndarray
    values: np.ndarray


def _as_grid(values: Union[Sequence[float], np.ndarray], name: str) -> np.ndarray:
    grid = np.asarray(values, dtype=float).ravel()
    if grid.size == 0:
        raise InvalidParameterError(f"{name} is empty")
    if np.any(grid <= 0):
        raise InvalidParameterError(f"{name} must be positive")
    if np.any(np.diff(grid) <= 0):
        raise InvalidParameterError(f"{name} must be strictly increasing")
    return grid


def count_grid(pairs: PairArrays, r_grid: np.ndarray, s_grid: np.ndarray):
    """
    Counts below every grid node in one pass.

    Returns:
        (cx, cy, joint): #{Z < r_a}, #{T < s_b} and #{Z < r_a, T < s_b}
    """
    cx = np.searchsorted(np.sort(pairs.Z), r_grid, side="left")
    cy = np.searchsorted(np.sort(pairs.T), s_grid, side="left")

    # pair k is counted at every node a >= ix[k], i.e. r_a > Z[k]
    ix = np.searchsorted(r_grid, pairs.Z, side="right")
    iy = np.searchsorted(s_grid, pairs.T, side="right")
    R, S = r_grid.size, s_grid.size
    hist = np.bincount(ix * (S + 1) + iy, minlength=(R + 1) * (S + 1)).reshape(R + 1, S + 1)
    joint = hist.cumsum(axis=0).cumsum(axis=1)[:R, :S]
    return cx, cy, joint


def en_grid(pairs: PairArrays, r_grid: Sequence[float], s_grid: Sequence[float]) -> EnGrid:
    """E_n on the product grid r_grid x s_grid via sorted counts, not per-node rescans."""
    r = _as_grid(r_grid, "r_grid")
    s = _as_grid(s_grid, "s_grid")
    cx, cy, joint = count_grid(pairs, r, s)
    N = pairs.N
    values = math.sqrt(pairs.n) * (joint / N - np.outer(cx / N, cy / N))
    return EnGrid(n=pairs.n, r_grid=r, s_grid=s, values=values)


def en_prime(dX: DistanceMatrix, dY: DistanceMatrix, r: float, s: float) -> float:
    """
    The order-4 U-process E'_n(r, s), by a literal loop over I_4^n.

    Args:
        dX, dY: distance matrices of the sample
        r, s: radii

    Returns:
        sqrt(n) times the average over distinct (i, j, k, h) of
        1{dX_ij < r, dY_ij < s} - 1{dX_ij < r, dY_hk < s}
    """
    n = dX.n
    if dY.n != n:
        raise InvalidParameterError(f"X has {n} observations but Y has {dY.n}")
    if n < 4:
        raise SampleTooSmallError(f"E'_n needs n >= 4, got {n}")
    if n > EN_PRIME_MAX_N:
        raise InvalidParameterError(f"E'_n is an O(n^4) oracle limited to n <= {EN_PRIME_MAX_N}, got {n}")

    close_x = (dX.d < r).tolist()
    close_y = (dY.d < s).tolist()
    total = 0
    for i, j, k, h in itertools.permutations(range(n), 4):
        if close_x[i][j]:
            total += int(close_y[i][j]) - int(close_y[h][k])
    return math.sqrt(n) * total / (n * (n - 1) * (n - 2) * (n - 3))


class HnCheck(NamedTuple):
    hn: float
    ok: bool

    @property
    def nonnegative(self) -> bool:
        return self.hn >= -HN_SLACK


def hn_bound(n: int) -> float:
    return 4.0 / math.sqrt(n)


def hn_check(dX: DistanceMatrix, dY: DistanceMatrix, r: float, s: float) -> HnCheck:
    """
    H_n = E'_n - E_n and whether |H_n| <= 4/sqrt(n).

    The magnitude bound holds for every sample. Nonnegativity does not (two
    close pairs {0,1}, {2,3} in both X and Y at n = 4 give H_n = -4/9) and is
    reported separately through HnCheck.nonnegative.
    """
    hn = en_prime(dX, dY, r, s) - en(pair_arrays(dX, dY), r, s)
    ok = abs(hn) <= hn_bound(dX.n) + HN_SLACK
    if not ok:
        logger.warning(f"H_n magnitude bound violated: |H_n|={abs(hn):.6g} > {hn_bound(dX.n):.6g} at n={dX.n}")
    return HnCheck(hn=hn, ok=ok)
