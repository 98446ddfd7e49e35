import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import stats

from rrindep.core.generators import (
    AlternativeSpec,
    fbm_paths,
    fou2_transform,
    fou_transform,
    generate,
    normal_scores,
)
from rrindep.core.data import PairedSample
from rrindep.core.permutation import critical_value
from rrindep.core.statistic import tn_fast
from rrindep.core.weights import WeightSpec
from rrindep.errors import InvalidParameterError


def test_normal_scores_small_sample():
    scores = normal_scores([5.0, -1.0, 2.0])
    assert scores[2] == 0.0
    assert scores[1] == pytest.approx(stats.norm.ppf(0.25))
    assert scores[0] == pytest.approx(stats.norm.ppf(0.75))


def test_normal_scores_keep_order_and_normality():
    rng = np.random.default_rng(0)
    x = np.sort(rng.uniform(size=200))
    assert np.all(np.diff(normal_scores(x)) > 0)
    big = normal_scores(rng.uniform(size=10_000))
    assert stats.kstest(big, "norm").statistic < 0.02


def test_normal_scores_per_column():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((20, 3))
    scores = normal_scores(x)
    np.testing.assert_allclose(scores[:, 1], normal_scores(x[:, 1]))


def test_spec_validation():
    with pytest.raises(ValidationError):
        AlternativeSpec(name="circle", params={"radius": 2.0})
    with pytest.raises(ValidationError):
        AlternativeSpec(name="circle", link="square")
    with pytest.raises(ValidationError):
        AlternativeSpec(name="ar1", params={"length": 10.5})
    with pytest.raises(ValidationError):
        AlternativeSpec(name="nope")


def test_spec_key_and_defaults():
    spec = AlternativeSpec(name="ar1", link="product", params={"phi": 0.5})
    assert spec.key() == "ar1[link=product,phi=0.5]"
    assert spec.resolved()["length"] == 100
    assert AlternativeSpec(name="bm").resolved_link == "square"
    assert AlternativeSpec(name="circle").key() == "circle"
    assert AlternativeSpec(name="independent_normal").scalar_marginals
    assert not AlternativeSpec(name="independent_normal", params={"dim_x": 5}).scalar_marginals


def test_generate_is_seeded():
    spec = AlternativeSpec(name="diamond", n=25, seed=4)
    a, b = generate(spec), generate(spec)
    np.testing.assert_array_equal(a.xs, b.xs)
    other = generate(spec.model_copy(update={"seed": 5}))
    assert not np.array_equal(a.xs, other.xs)


def test_parabola_support():
    sample = generate(AlternativeSpec(name="parabola", n=500, seed=1))
    x, y = sample.xs[:, 0], sample.ys[:, 0]
    assert np.all((x > -1) & (x < 1))
    assert np.all(y >= x ** 2 / 2) and np.all(y < (x ** 2 + 1) / 2)


@pytest.mark.parametrize(
    "name, p, q",
    [("logarithmic", 5, 5), ("epsilon", 5, 5), ("quadratic", 5, 5), ("two_d_pairwise", 1, 2), ("w_shape", 1, 1)],
)
def test_dimensions(name, p, q):
    sample = generate(AlternativeSpec(name=name, n=12, seed=0))
    assert (sample.n, sample.p, sample.q) == (12, p, q)


def test_four_clouds_marginals_independent():
    sample = generate(AlternativeSpec(name="four_clouds", n=4000, seed=2))
    assert abs(np.corrcoef(sample.xs[:, 0], sample.ys[:, 0])[0, 1]) < 0.05
    assert abs(np.corrcoef(np.abs(sample.xs[:, 0]), np.abs(sample.ys[:, 0]))[0, 1]) < 0.05


def test_brownian_increment_variance():
    rng = np.random.default_rng(3)
    paths = fbm_paths(0.5, 50, 10_000, rng)
    assert np.all(paths[:, 0] == 0)
    step = 1.0 / 50
    variance = np.var(np.diff(paths, axis=1))
    assert abs(variance / step - 1.0) < 0.1


def test_fbm_variance_scales_with_hurst():
    rng = np.random.default_rng(4)
    paths = fbm_paths(0.7, 20, 5000, rng, step=0.1)
    t = 19 * 0.1
    assert np.var(paths[:, -1]) == pytest.approx(t ** 1.4, rel=0.1)
    with pytest.raises(InvalidParameterError):
        fbm_paths(1.0, 10, 2, rng)


def test_ar1_lag_one_autocorrelation():
    sample = generate(AlternativeSpec(name="ar1", n=1000, seed=5, link="noise"))
    x = sample.xs
    centred = x - x.mean()
    rho = np.sum(centred[:, 1:] * centred[:, :-1]) / np.sum(centred * centred)
    assert abs(rho - 0.9) < 0.05


def test_fou2_is_the_combination_of_two_fou():
    rng = np.random.default_rng(6)
    path = fbm_paths(0.7, 200, 3, rng, step=0.01)
    lam1, lam2 = 0.3, 0.8
    combined = fou2_transform(path, lam1, lam2, 1.0, 0.01)
    expected = (lam1 / (lam1 - lam2)) * fou_transform(path, lam1, 1.0, 0.01) + (lam2 / (lam2 - lam1)) * fou_transform(
        path, lam2, 1.0, 0.01
    )
    np.testing.assert_array_equal(combined, expected)


def test_fou_recursion_matches_loop():
    rng = np.random.default_rng(7)
    path = fbm_paths(0.6, 30, 1, rng, step=0.05)[0]
    y = fou_transform(path[None, :], 0.4, 2.0, 0.05)[0]
    decay = math.exp(-0.4 * 0.05)
    expected = [0.0]
    for k in range(1, 30):
        expected.append(decay * (expected[-1] + 2.0 * (path[k] - path[k - 1])))
    np.testing.assert_allclose(y, expected, atol=1e-12)


@pytest.mark.parametrize("name, link", [("ar1", "sqrt"), ("arma21", "product_noise"), ("bm", "bm"), ("fbm", "square")])
def test_series_shapes(name, link):
    sample = generate(AlternativeSpec(name=name, link=link, n=6, seed=8, params={"length": 40}))
    assert sample.xs.shape == (6, 40) and sample.ys.shape == (6, 40)


@pytest.mark.parametrize("name", ["fou", "fou2"])
def test_fou_pairs_start_at_zero(name):
    sample = generate(AlternativeSpec(name=name, n=4, seed=9, params={"length": 30}))
    assert sample.xs.shape == (4, 30)
    np.testing.assert_array_equal(sample.xs[:, 0], 0.0)


def test_nonstationary_ar1_rejected():
    with pytest.raises(InvalidParameterError):
        generate(AlternativeSpec(name="ar1", params={"phi": 1.0}, n=3))


def test_circle_noise_is_recovered_from_the_angle():
    n = 10_000
    sample = generate(AlternativeSpec(name="circle", n=n, seed=8))
    # the angle is the first draw of the same stream
    u = np.random.default_rng(8).uniform(-1.0, 1.0, n)
    for column, curve in ((sample.xs[:, 0], np.sin(np.pi * u)), (sample.ys[:, 0], np.cos(np.pi * u))):
        assert stats.kstest((column - curve) * 8.0, "norm").statistic < 0.02


@pytest.mark.slow
def test_four_clouds_size():
    w = WeightSpec.fixed(1.0, 1.0)
    threshold = critical_value(None, 30, w, reps=5000, seed=1)
    rejections = 0
    for rep in range(500):
        sample = generate(AlternativeSpec(name="four_clouds", n=30, seed=10_000 + rep))
        scored = PairedSample(xs=normal_scores(sample.xs), ys=normal_scores(sample.ys))
        rejections += tn_fast(scored.pairs(), w).t > threshold
    assert 0.03 <= rejections / 500 <= 0.07
