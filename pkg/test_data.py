import math

import numpy as np
import pytest

from rrindep.core.data import (
    DistanceMatrix,
    PairedSample,
    distance_matrix,
    load_paired_sample,
    pair_arrays,
    repair_under_permutation,
)
from rrindep.errors import (
    DimensionMismatchError,
    InvalidParameterError,
    InvalidPermutationError,
    NonFiniteError,
    SizeMismatchError,
)


def test_distance_matrix_small_cases():
    assert distance_matrix([0.0, 3.0], metric="absolute").d[0, 1] == 3.0
    assert distance_matrix([[0.0, 0.0], [3.0, 4.0]]).d[0, 1] == 5.0


def test_distance_matrix_matches_scalar_loop():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((4, 3))
    d = distance_matrix(x).d
    for i in range(4):
        for j in range(4):
            expected = math.sqrt(sum((x[i, k] - x[j, k]) ** 2 for k in range(3)))
            assert abs(d[i, j] - expected) < 1e-12
    assert not d.flags.writeable


def test_distance_matrix_rejects_bad_input():
    with pytest.raises(NonFiniteError):
        distance_matrix([0.0, float("nan"), 1.0])
    with pytest.raises(DimensionMismatchError):
        distance_matrix([[0.0, 1.0], [1.0]])
    with pytest.raises(DimensionMismatchError):
        distance_matrix([[0.0, 1.0], [1.0, 2.0]], metric="absolute")


def test_precomputed_table_is_validated():
    table = [[0.0, 2.0, 1.0], [2.0, 0.0, 1.5], [1.0, 1.5, 0.0]]
    assert DistanceMatrix.from_table(table).n == 3
    with pytest.raises(InvalidParameterError):
        DistanceMatrix.from_table([[0.0, 2.0], [1.0, 0.0]])
    with pytest.raises(InvalidParameterError):
        DistanceMatrix.from_table([[1.0, 2.0], [2.0, 0.0]])


def test_pair_arrays_enumerates_ordered_pairs():
    dX = distance_matrix([0.0, 1.0, 3.0])
    pairs = pair_arrays(dX, dX)
    assert pairs.N == 6
    assert sorted(pairs.Z.tolist()) == [1.0, 1.0, 2.0, 2.0, 3.0, 3.0]

    two = pair_arrays(distance_matrix([0.0, 2.5]), distance_matrix([1.0, 0.0]))
    assert two.Z.tolist() == [2.5, 2.5]


def test_pair_arrays_relabeling_keeps_distance_multiset():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((7, 2))
    relabel = rng.permutation(7)
    a = pair_arrays(distance_matrix(x), distance_matrix(x))
    b = pair_arrays(distance_matrix(x[relabel]), distance_matrix(x[relabel]))
    np.testing.assert_array_equal(np.sort(a.Z), np.sort(b.Z))


def test_repair_under_permutation():
    dX = distance_matrix([0.0, 1.0, 3.0])
    dY = distance_matrix([0.0, 10.0, 11.0])
    identity = repair_under_permutation(dX, dY, [0, 1, 2])
    np.testing.assert_array_equal(identity.Z, pair_arrays(dX, dY).Z)

    shifted = repair_under_permutation(dX, dY, [1, 2, 0])
    # pair (0, 1) now carries dX[1, 2]
    assert shifted.Z[0] == 2.0
    np.testing.assert_array_equal(np.sort(shifted.Z), np.sort(identity.Z))
    np.testing.assert_array_equal(shifted.T, identity.T)


def test_repair_rejects_non_bijection():
    dX = distance_matrix([0.0, 1.0, 3.0])
    with pytest.raises(InvalidPermutationError):
        repair_under_permutation(dX, dX, [0, 0, 1])
    with pytest.raises(InvalidPermutationError):
        repair_under_permutation(dX, dX, [0, 1])


def test_paired_sample_checks_sizes():
    with pytest.raises(SizeMismatchError):
        PairedSample(xs=[1.0, 2.0, 3.0], ys=[1.0, 2.0])
    sample = PairedSample(xs=np.zeros((5, 3)) + np.arange(5)[:, None], ys=np.arange(5.0))
    assert (sample.n, sample.p, sample.q) == (5, 3, 1)
    assert sample.distances() is sample.distances()


def test_load_paired_sample(tmp_path):
    x_csv = tmp_path / "x.csv"
    y_csv = tmp_path / "y.csv"
    x_csv.write_text("a,b\n0,0\n3,4\n1,1\n")
    y_csv.write_text("y\n1\n2\n5\n")
    sample = load_paired_sample(str(x_csv), str(y_csv), header=True)
    assert (sample.n, sample.p, sample.q) == (3, 2, 1)
    assert sample.distances()[0].d[0, 1] == 5.0

    short = tmp_path / "short.csv"
    short.write_text("y\n1\n2\n")
    with pytest.raises(SizeMismatchError):
        load_paired_sample(str(x_csv), str(short), header=True)
    with pytest.raises(InvalidParameterError):
        load_paired_sample(str(x_csv), str(y_csv), header=False)
