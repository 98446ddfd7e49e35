import numpy as np
import pytest

from rrindep.core.baselines import (
    HsicStatistic,
    dcov_test,
    distance_covariance,
    double_center,
    hsic_test,
    median_bandwidth,
    psk_max_test,
    psk_pvalues,
)
from rrindep.core.data import PairedSample, distance_matrix
from rrindep.core.generators import AlternativeSpec, generate
from rrindep.errors import DegenerateSampleError, DimensionMismatchError


def _dcov2_loop(x, y):
    n = len(x)
    a = [[abs(x[i] - x[j]) for j in range(n)] for i in range(n)]
    b = [[abs(y[i] - y[j]) for j in range(n)] for i in range(n)]

    def centred(m):
        row = [sum(r) / n for r in m]
        grand = sum(row) / n
        return [[m[i][j] - row[i] - row[j] + grand for j in range(n)] for i in range(n)]

    A, B = centred(a), centred(b)
    return sum(A[i][j] * B[i][j] for i in range(n) for j in range(n)) / n ** 2


def test_distance_covariance_matches_loop():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(9)
    y = x ** 2 + rng.standard_normal(9)
    dcov2, _ = distance_covariance(distance_matrix(x), distance_matrix(y))
    assert dcov2 == pytest.approx(_dcov2_loop(x.tolist(), y.tolist()), rel=1e-12)


def test_distance_correlation_of_identical_sides():
    rng = np.random.default_rng(1)
    d = distance_matrix(rng.standard_normal((15, 2)))
    _, dcor = distance_covariance(d, d)
    assert dcor == pytest.approx(1.0, abs=1e-12)


def test_double_center_rows_sum_to_zero():
    rng = np.random.default_rng(2)
    A = double_center(distance_matrix(rng.standard_normal(6)).d)
    np.testing.assert_allclose(A.sum(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(A.sum(axis=1), 0.0, atol=1e-12)


def test_dcov_test_rejects_dependence():
    rng = np.random.default_rng(3)
    x = rng.standard_normal(30)
    result = dcov_test(PairedSample(xs=x, ys=x), m=199, seed=1, workers=1)
    assert result.test == "dcov"
    assert result.p_value < 0.01


def test_psk_on_monotone_relation():
    rng = np.random.default_rng(4)
    x = rng.standard_normal(30)
    pvalues = psk_pvalues(PairedSample(xs=x, ys=2 * x + 1))
    assert all(p < 0.001 for p in pvalues.values())
    result = psk_max_test(PairedSample(xs=x, ys=2 * x + 1))
    assert result.p_value == min(pvalues.values())
    assert set(result.components) == {"pearson", "spearman", "kendall"}


def test_psk_constant_input_gives_one():
    x = np.arange(10.0)
    pvalues = psk_pvalues(PairedSample(xs=x, ys=np.ones(10)))
    assert pvalues["pearson"] == 1.0


def test_psk_needs_scalars():
    rng = np.random.default_rng(5)
    with pytest.raises(DimensionMismatchError):
        psk_pvalues(PairedSample(xs=rng.standard_normal((10, 2)), ys=rng.standard_normal(10)))


def test_hsic_statistic_matches_trace_form():
    rng = np.random.default_rng(6)
    x = rng.standard_normal(8)
    y = np.sin(x) + 0.1 * rng.standard_normal(8)
    dX, dY = distance_matrix(x), distance_matrix(y)
    stat = HsicStatistic(dX, dY)
    bx, by = median_bandwidth(dX, "X"), median_bandwidth(dY, "Y")
    K = np.exp(-dX.d ** 2 / (2 * bx ** 2))
    L = np.exp(-dY.d ** 2 / (2 * by ** 2))
    H = np.eye(8) - 1.0 / 8
    assert stat(np.arange(8)) == pytest.approx(np.trace(K @ H @ L @ H) / 64, rel=1e-12)


def test_hsic_test_rejects_dependence():
    rng = np.random.default_rng(7)
    x = rng.standard_normal(30)
    assert hsic_test(PairedSample(xs=x, ys=x), m=199, seed=2, workers=1).p_value < 0.01


def test_hsic_degenerate_bandwidth():
    x = np.array([0.0, 0.0, 0.0, 0.0, 1.0])
    with pytest.raises(DegenerateSampleError) as info:
        HsicStatistic(distance_matrix(x), distance_matrix(np.arange(5.0)))
    assert info.value.side == "X"


@pytest.mark.slow
def test_psk_blind_to_circle():
    rejections = {"pearson": 0, "spearman": 0, "kendall": 0}
    for rep in range(500):
        pvalues = psk_pvalues(generate(AlternativeSpec(name="circle", n=50, seed=rep)))
        for name, p in pvalues.items():
            rejections[name] += p < 0.05
    assert max(rejections.values()) / 500 <= 0.05


def test_distance_covariance_invariant_under_rotation_and_translation():
    rng = np.random.default_rng(13)
    x = rng.standard_normal((20, 3))
    y = x[:, :2] ** 2 + rng.standard_normal((20, 2))
    rotation, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    dcov2, dcor = distance_covariance(distance_matrix(x), distance_matrix(y))
    moved2, moved_cor = distance_covariance(distance_matrix(x @ rotation + 5.0), distance_matrix(y - 2.0))
    assert moved2 == pytest.approx(dcov2, abs=1e-9)
    assert moved_cor == pytest.approx(dcor, abs=1e-9)
