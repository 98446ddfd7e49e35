"""
Paired samples in metric spaces and the shared-index pair-distance arrays
"""
import logging
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.spatial.distance import pdist, squareform

from rrindep.errors import (
    DimensionMismatchError,
    InvalidParameterError,
    InvalidPermutationError,
    NonFiniteError,
    SampleTooSmallError,
    SizeMismatchError,
)

logger = logging.getLogger(__name__)

Metric = Literal["euclidean", "absolute", "precomputed"]
METRICS = ("euclidean", "absolute", "precomputed")

# Tolerance for accepting a user supplied distance table
TABLE_TOLERANCE = 1e-9


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def as_points(points: Union[Sequence, np.ndarray]) -> np.ndarray:
    """
    Coerce a sequence of scalars or vectors into an (n, p) float array.

    Raises:
        DimensionMismatchError: ragged input or more than two axes
        NonFiniteError: NaN or infinite coordinate
    """
    try:
        array = np.asarray(points, dtype=float)
    except ValueError as e:
        raise DimensionMismatchError(f"Points do not share one dimension: {e}") from e
    if array.ndim == 1:
        array = array[:, None]
    if array.ndim != 2:
        raise DimensionMismatchError(f"Expected a sequence of vectors, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise NonFiniteError("Non-finite coordinate in sample")
    return array


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric, zero-diagonal, nonnegative n x n matrix of distances."""

    d: np.ndarray

    @property
    def n(self) -> int:
        return self.d.shape[0]

    @classmethod
    def from_table(cls, table: Union[Sequence, np.ndarray], tolerance: float = TABLE_TOLERANCE) -> "DistanceMatrix":
        """
        Validate a precomputed distance table (arbitrary metric space).

        The table must be square, finite, nonnegative, symmetric and have a zero
        diagonal within `tolerance`; it is then symmetrized exactly.
        """
        d = np.asarray(table, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise DimensionMismatchError(f"Distance table must be square, got shape {d.shape}")
        if d.shape[0] < 2:
            raise SampleTooSmallError("Distance table needs at least 2 observations")
        if not np.all(np.isfinite(d)):
            raise NonFiniteError("Non-finite entry in distance table")
        if np.any(d < -tolerance):
            raise InvalidParameterError("Distance table has negative entries")
        if np.max(np.abs(d - d.T)) > tolerance:
            raise InvalidParameterError("Distance table is not symmetric")
        if np.max(np.abs(np.diag(d))) > tolerance:
            raise InvalidParameterError("Distance table has a non-zero diagonal")
        d = np.clip((d + d.T) / 2.0, 0.0, None)
        np.fill_diagonal(d, 0.0)
        return cls(_readonly(d))


def distance_matrix(points: Union[Sequence, np.ndarray], metric: Metric = "euclidean") -> DistanceMatrix:
    """
    Pairwise distances of a sample of points.

    Args:
        points: n points, scalars or vectors of a common dimension p
        metric: "euclidean", "absolute" (p must be 1) or "precomputed"
            (points is then an n x n distance table)

    Returns:
        DistanceMatrix
    """
    if metric == "precomputed":
        return DistanceMatrix.from_table(points)
    if metric not in METRICS:
        raise InvalidParameterError(f"Unknown metric {metric!r}, expected one of {METRICS}")

    x = as_points(points)
    if x.shape[0] < 2:
        raise SampleTooSmallError("At least 2 points are needed for a distance matrix")
    if metric == "absolute" and x.shape[1] != 1:
        raise DimensionMismatchError(f"Absolute-value metric needs scalar points, got dimension {x.shape[1]}")

    # pdist/squareform gives an exactly symmetric matrix with a zero diagonal
    d = squareform(pdist(x, metric="euclidean"))
    return DistanceMatrix(_readonly(d))


@dataclass(frozen=True)
class PairArrays:
    """
    Distances of the N = n(n-1) ordered pairs (i, j), i != j.

    Z[k] and T[k] are the X and Y distances of the same pair
    (pair_i[k], pair_j[k]). The canonical order is row-major: i ascending,
    then j ascending, skipping j == i.
    """

    n: int
    pair_i: np.ndarray
    pair_j: np.ndarray
    Z: np.ndarray
    T: np.ndarray

    @property
    def N(self) -> int:
        return self.Z.shape[0]


@lru_cache(maxsize=64)
def canonical_pairs(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Row-major ordered pairs (i, j), i != j, as two read-only index arrays."""
    mask = ~np.eye(n, dtype=bool)
    i, j = np.nonzero(mask)
    return _readonly(i), _readonly(j)


def _check_sizes(dX: DistanceMatrix, dY: DistanceMatrix) -> int:
    if dX.n != dY.n:
        raise SizeMismatchError(f"X has {dX.n} observations but Y has {dY.n}")
    if dX.n < 2:
        raise SampleTooSmallError("At least 2 paired observations are needed")
    return dX.n


def pair_arrays(dX: DistanceMatrix, dY: DistanceMatrix) -> PairArrays:
    n = _check_sizes(dX, dY)
    i, j = canonical_pairs(n)
    return PairArrays(
        n=n,
        pair_i=i,
        pair_j=j,
        Z=_readonly(dX.d[i, j]),
        T=_readonly(dY.d[i, j]),
    )


def validate_permutation(sigma: Union[Sequence[int], np.ndarray], n: int) -> np.ndarray:
    """Return sigma as an index array after checking it is a bijection of {0..n-1}."""
    s = np.asarray(sigma)
    if s.shape != (n,) or not np.issubdtype(s.dtype, np.integer):
        raise InvalidPermutationError(f"Permutation must be {n} integers, got shape {s.shape}")
    if not np.array_equal(np.sort(s), np.arange(n)):
        raise InvalidPermutationError("Permutation is not a bijection on {0..n-1}")
    return s


def repair_under_permutation(
    dX: DistanceMatrix,
    dY: DistanceMatrix,
    sigma: Union[Sequence[int], np.ndarray],
    check: bool = True,
) -> PairArrays:
    """
    Pair arrays of the resample (X_sigma(i), Y_i), by re-indexing only.

    Z'[k] = dX[sigma(i_k), sigma(j_k)] and T'[k] = dY[i_k, j_k]. Indices are
    0-based. No distance is recomputed.
    """
    n = _check_sizes(dX, dY)
    s = validate_permutation(sigma, n) if check else np.asarray(sigma)
    i, j = canonical_pairs(n)
    return PairArrays(n=n, pair_i=i, pair_j=j, Z=dX.d[s[i], s[j]], T=dY.d[i, j])


@dataclass(frozen=True)
class PairedSample:
    """
    n paired observations (X_i, Y_i) with the metric used on each side.

    With metric "precomputed" the corresponding side holds an n x n distance
    table instead of coordinates.
    """

    xs: np.ndarray
    ys: np.ndarray
    metric_x: Metric = "euclidean"
    metric_y: Metric = "euclidean"
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.metric_x != "precomputed":
            object.__setattr__(self, "xs", as_points(self.xs))
        if self.metric_y != "precomputed":
            object.__setattr__(self, "ys", as_points(self.ys))
        if len(self.xs) != len(self.ys):
            raise SizeMismatchError(f"X has {len(self.xs)} observations but Y has {len(self.ys)}")
        if len(self.xs) < 2:
            raise SampleTooSmallError("A paired sample needs at least 2 observations")

    @property
    def n(self) -> int:
        return len(self.xs)

    @property
    def p(self) -> Optional[int]:
        return None if self.metric_x == "precomputed" else self.xs.shape[1]

    @property
    def q(self) -> Optional[int]:
        return None if self.metric_y == "precomputed" else self.ys.shape[1]

    def distances(self) -> Tuple[DistanceMatrix, DistanceMatrix]:
        """Distance matrices, computed once per sample."""
        if "d" not in self._cache:
            self._cache["d"] = (
                distance_matrix(self.xs, self.metric_x),
                distance_matrix(self.ys, self.metric_y),
            )
        return self._cache["d"]

    def pairs(self) -> PairArrays:
        dX, dY = self.distances()
        return pair_arrays(dX, dY)


def load_points_csv(path: str, header: bool = False) -> np.ndarray:
    """Read one observation per row, one coordinate per column."""
    frame = pd.read_csv(path, header=0 if header else None)
    try:
        values = frame.to_numpy(dtype=float)
    except ValueError as e:
        raise InvalidParameterError(f"Non-numeric value in {path}: {e}") from e
    logger.info(f"Loaded {values.shape[0]} rows x {values.shape[1]} columns from {path}")
    return as_points(values)


def load_distance_csv(path: str, header: bool = False) -> np.ndarray:
    """Read a square distance table; validation happens in DistanceMatrix.from_table."""
    frame = pd.read_csv(path, header=0 if header else None)
    return frame.to_numpy(dtype=float)


def load_paired_sample(
    x_csv: str,
    y_csv: str,
    header: bool = False,
    metric_x: Metric = "euclidean",
    metric_y: Metric = "euclidean",
) -> PairedSample:
    loader_x = load_distance_csv if metric_x == "precomputed" else load_points_csv
    loader_y = load_distance_csv if metric_y == "precomputed" else load_points_csv
    xs = loader_x(x_csv, header=header)
    ys = loader_y(y_csv, header=header)
    if len(xs) != len(ys):
        raise SizeMismatchError(f"{x_csv} has {len(xs)} rows but {y_csv} has {len(ys)}")
    return PairedSample(xs=xs, ys=ys, metric_x=metric_x, metric_y=metric_y)
