"""
The Cramer-von Mises statistic T_n = n (A_n + B_n - 2 C_n) and the sup statistic T'_n

Notation: for the N ordered pairs, a_k = 1 - G1(Z_k) and b_k = 1 - G2(T_k).
Because G1 is nondecreasing, 1 - G1(max{Z_i, Z_j}) = min{a_i, a_j}.

    A_n = (1/N^2) sum_ij min(a_i, a_j) min(b_i, b_j)
    B_n = (1 - sum_i (2i-1) G1(Z*_i) / N^2) (1 - sum_i (2i-1) G2(T*_i) / N^2)
    C_n = (1/N^3) sum_i u_i v_i,  u_i = sum_j min(a_i, a_j),  v_i = sum_k min(b_i, b_k)

Evaluators, slowest to fastest: tn_bruteforce (literal triple sum, small n),
tn_reference (O(N^2)), tn_fast (O(N log N), Fenwick sweep for A_n).
"""
import logging
import math
from typing import Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from rrindep.core.data import PairArrays
from rrindep.core.fenwick import WeightedFenwickTree
from rrindep.core.recurrence import en_grid
from rrindep.core.weights import WeightSpec, gaussian_pdf
from rrindep.errors import InvalidParameterError, SampleTooSmallError

logger = logging.getLogger(__name__)

StatKind = Literal["cvm", "sup"]

BRUTEFORCE_MAX_N = 12
ABC_TOLERANCE = 1e-12


class StatValue(BaseModel):
    model_config = ConfigDict(frozen=True)

    t: float = Field(ge=0)
    kind: StatKind
    abc: Optional[Tuple[float, float, float]] = None
    n: Optional[int] = None

    @model_validator(mode="after")
    def _check_abc(self):
        if self.kind == "cvm" and self.abc is not None and self.n is not None:
            a, b, c = self.abc
            expected = self.n * (a + b - 2.0 * c)
            if abs(max(expected, 0.0) - self.t) > ABC_TOLERANCE * max(1.0, abs(expected)):
                raise ValueError(f"t={self.t} does not match n(A+B-2C)={expected}")
        return self


def _check_pairs(pairs: PairArrays) -> None:
    if pairs.N < 2:
        raise SampleTooSmallError("The statistic needs at least 2 ordered pairs")


def _cvm_value(n: int, a: float, b: float, c: float) -> StatValue:
    # A + B - 2C is a squared integral; clamp rounding noise below zero
    t = max(n * (a + b - 2.0 * c), 0.0)
    return StatValue(t=t, kind="cvm", abc=(a, b, c), n=n)


def _b_term(sorted_cdf: np.ndarray) -> float:
    N = sorted_cdf.shape[0]
    coef = 2.0 * np.arange(1, N + 1) - 1.0
    return 1.0 - float(np.dot(coef, sorted_cdf)) / N ** 2


def b_order_statistics(pairs: PairArrays, w: WeightSpec) -> float:
    """B_n from the order statistics Z*, T*; any stable sort gives the same value under ties."""
    return _b_term(w.cdf1(np.sort(pairs.Z))) * _b_term(w.cdf2(np.sort(pairs.T)))


def tn_bruteforce(pairs: PairArrays, w: WeightSpec) -> StatValue:
    """
    Fully literal evaluator: every term from 1 - G(max{.,.}) and the C_n
    triple sum without factorization. Limited to n <= BRUTEFORCE_MAX_N.
    """
    _check_pairs(pairs)
    if pairs.n > BRUTEFORCE_MAX_N:
        raise InvalidParameterError(f"Brute-force evaluator is limited to n <= {BRUTEFORCE_MAX_N}")
    N = pairs.N
    mx = 1.0 - w.cdf1(np.maximum.outer(pairs.Z, pairs.Z))
    my = 1.0 - w.cdf2(np.maximum.outer(pairs.T, pairs.T))
    a = float((mx * my).sum()) / N ** 2
    b = (float(mx.sum()) / N ** 2) * (float(my.sum()) / N ** 2)
    c = float((mx[:, :, None] * my[:, None, :]).sum()) / N ** 3
    return _cvm_value(pairs.n, a, b, c)


def tn_reference(pairs: PairArrays, w: WeightSpec) -> StatValue:
    """
    O(N^2) evaluator: A_n by the double sum, B_n by order statistics,
    C_n through the u/v factorization of the triple sum.
    """
    _check_pairs(pairs)
    N = pairs.N
    a_k = 1.0 - w.cdf1(pairs.Z)
    b_k = 1.0 - w.cdf2(pairs.T)
    mx = np.minimum.outer(a_k, a_k)
    my = np.minimum.outer(b_k, b_k)
    a = float((mx * my).sum()) / N ** 2
    b = b_order_statistics(pairs, w)
    u = mx.sum(axis=1)
    v = my.sum(axis=1)
    c = float(np.dot(u, v)) / N ** 3
    return _cvm_value(pairs.n, a, b, c)


def _row_sums(values: np.ndarray, cdf: np.ndarray) -> np.ndarray:
    """
    u_i = N - (rank_i G(V_i) + sum_{V_j > V_i} G(V_j)), rank_i = #{j : V_j <= V_i}.
    """
    N = values.shape[0]
    order = np.argsort(values, kind="stable")
    sorted_values = values[order]
    suffix = np.zeros(N + 1)
    suffix[:N] = np.cumsum(cdf[order][::-1])[::-1]
    rank = np.searchsorted(sorted_values, values, side="right")
    return N - (rank * cdf + suffix[rank])


def _a_sweep(z: np.ndarray, a_k: np.ndarray, t: np.ndarray, b_k: np.ndarray) -> float:
    """
    sum_ij min(a_i, a_j) min(b_i, b_j) by sweeping pairs in Z order.

    Every pair j already swept has Z_j <= Z_k, hence min(a_j, a_k) = a_k
    (equal Z give equal a, so ties need no special order). The tree, indexed
    by dense T rank, splits the swept pairs into T_j <= T_k, contributing b_k
    each, and T_j > T_k, contributing their own b_j.
    """
    order = np.argsort(z, kind="stable")
    uniques, t_rank = np.unique(t, return_inverse=True)
    tree = WeightedFenwickTree(uniques.shape[0])

    total = 0.0
    for rank, ak, bk in zip(t_rank[order].tolist(), a_k[order].tolist(), b_k[order].tolist()):
        c_le, w_le = tree.prefix(rank)
        swept = bk * c_le + (tree.total_weight - w_le)
        total += ak * (bk + 2.0 * swept)
        tree.add(rank, bk)
    return total


def tn_fast(pairs: PairArrays, w: WeightSpec) -> StatValue:
    """
    O(N log N) evaluator; the only one used under permutation.

    B_n by sorting, u_i and v_i by rank and suffix sums, A_n by a Fenwick-tree
    sweep over T ranks.
    """
    _check_pairs(pairs)
    N = pairs.N
    g1 = w.cdf1(pairs.Z)
    g2 = w.cdf2(pairs.T)

    b = _b_term(np.sort(g1)) * _b_term(np.sort(g2))
    u = _row_sums(pairs.Z, g1)
    v = _row_sums(pairs.T, g2)
    c = float(np.dot(u, v)) / N ** 3
    a = _a_sweep(pairs.Z, 1.0 - g1, pairs.T, 1.0 - g2) / N ** 2
    return _cvm_value(pairs.n, a, b, c)


# Unique Z values per block of the tsup count table
_SUP_BLOCK = 64


def tsup(pairs: PairArrays) -> StatValue:
    """
    T'_n = sqrt(n) sup_{r,s>0} |RR^{X,Y}(r,s) - RR^X(r) RR^Y(s)|, exactly.

    The field is constant on (z_k, z_{k+1}] x (t_l, t_{l+1}] between sorted
    unique distances, so it is enough to evaluate the counts #{Z <= z_k},
    #{T <= t_l} and their joint version for every pair of unique values. Cells
    below the smallest distance, and beyond the largest, have E_n = 0.
    """
    _check_pairs(pairs)
    N = pairs.N
    zu, zi = np.unique(pairs.Z, return_inverse=True)
    tu, ti = np.unique(pairs.T, return_inverse=True)
    nz, nt = zu.shape[0], tu.shape[0]

    cx = np.cumsum(np.bincount(zi, minlength=nz)) / N
    cy = np.cumsum(np.bincount(ti, minlength=nt)) / N
    order = np.argsort(zi, kind="stable")
    zs, ts = zi[order], ti[order]

    # base[l] = #{Z < z_start, T = t_l}; only one block of rows is ever materialised
    base = np.zeros(nt, dtype=np.int64)
    best = 0.0
    for start in range(0, nz, _SUP_BLOCK):
        stop = min(start + _SUP_BLOCK, nz)
        lo, hi = np.searchsorted(zs, [start, stop])
        counts = np.bincount((zs[lo:hi] - start) * nt + ts[lo:hi], minlength=(stop - start) * nt)
        block = counts.reshape(stop - start, nt).astype(np.int64)
        np.cumsum(block, axis=0, out=block)
        block += base
        base = block[-1].copy()
        joint = np.cumsum(block, axis=1) / N
        best = max(best, float(np.abs(joint - np.outer(cx[start:stop], cy)).max()))
    return StatValue(t=math.sqrt(pairs.n) * best, kind="sup", n=pairs.n)


def _quadrature_axis(values: np.ndarray, mu: float, sigma: float, resolution: int):
    """Cell midpoints and midpoint-rule weights g(mid) * width on one axis."""
    lo = max(mu - 6.0 * sigma, 0.0)
    hi = mu + 6.0 * sigma
    if hi <= lo:
        return None, None
    uniform = np.linspace(lo, hi, resolution + 1)
    inside = values[(values > lo) & (values < hi)]
    edges = np.unique(np.concatenate([uniform, inside]))
    mids = 0.5 * (edges[:-1] + edges[1:])
    return mids, gaussian_pdf(mu, sigma, mids) * np.diff(edges)


def tn_quadrature(pairs: PairArrays, w: WeightSpec, grid_resolution: int = 400) -> float:
    """
    Numerical integration of n * int int (RR^{X,Y} - RR^X RR^Y)^2 dG over
    r, s > 0, for cross-checking the closed forms.

    The grid covers mu +/- 6 sigma of each weight, clipped to (0, inf), and is
    refined at every distance inside that range so the integrand is constant on
    each cell; only the weight is approximated (midpoint rule).
    """
    if grid_resolution < 50:
        raise InvalidParameterError("grid_resolution must be at least 50")
    _check_pairs(pairs)
    r_mid, r_w = _quadrature_axis(pairs.Z, w.g1.mu, w.g1.sigma, grid_resolution)
    s_mid, s_w = _quadrature_axis(pairs.T, w.g2.mu, w.g2.sigma, grid_resolution)
    if r_mid is None or s_mid is None:
        return 0.0
    grid = en_grid(pairs, r_mid, s_mid)
    return float(r_w @ (grid.values ** 2) @ s_w)


def statistic(pairs: PairArrays, w: Optional[WeightSpec], kind: StatKind = "cvm") -> StatValue:
    """Production evaluator for either statistic kind."""
    if kind == "sup":
        return tsup(pairs)
    if w is None:
        raise InvalidParameterError("The Cramer-von Mises statistic needs a weight")
    return tn_fast(pairs, w)
