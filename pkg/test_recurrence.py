import itertools
import math

import numpy as np
import pytest

from rrindep.core.data import distance_matrix, pair_arrays
from rrindep.core.recurrence import en, en_grid, en_prime, hn_bound, hn_check, rr_joint, rr_x, rr_y
from rrindep.errors import InvalidParameterError


@pytest.fixture
def small_pairs():
    return pair_arrays(distance_matrix([0.0, 1.0, 3.0]), distance_matrix([0.0, 10.0, 11.0]))


def test_rr_x_strict_inequality():
    pairs = pair_arrays(distance_matrix([0.0, 1.0]), distance_matrix([0.0, 1.0]))
    assert rr_x(pairs, 2.0) == 1.0
    assert rr_x(pairs, 1.0) == 0.0


def test_hand_enumerated_rates(small_pairs):
    assert rr_x(small_pairs, 2.5) == pytest.approx(4 / 6)
    assert rr_y(small_pairs, 5.0) == pytest.approx(2 / 6)
    assert rr_joint(small_pairs, 2.5, 5.0) == pytest.approx(2 / 6)
    assert en(small_pairs, 2.5, 5.0) == pytest.approx(math.sqrt(3) / 9)


def test_joint_rate_bounds(small_pairs):
    for r in (0.5, 1.5, 2.5, 4.0):
        assert rr_joint(small_pairs, r, 1e300) == rr_x(small_pairs, r)
        for s in (0.5, 5.0, 11.5):
            assert rr_joint(small_pairs, r, s) <= min(rr_x(small_pairs, r), rr_y(small_pairs, s))


def test_constant_x_gives_zero_field():
    rng = np.random.default_rng(0)
    pairs = pair_arrays(distance_matrix(np.zeros(6)), distance_matrix(rng.standard_normal(6)))
    for r, s in itertools.product((0.1, 1.0), (0.2, 0.9, 3.0)):
        assert en(pairs, r, s) == pytest.approx(0.0, abs=1e-15)


def test_en_grid_matches_pointwise():
    rng = np.random.default_rng(5)
    pairs = pair_arrays(distance_matrix(rng.standard_normal(9)), distance_matrix(rng.standard_normal((9, 2))))
    r_grid = [0.1, 0.4, 0.9, 1.7, 3.0]
    s_grid = [0.2, 0.8, 2.5]
    grid = en_grid(pairs, r_grid, s_grid)
    for a, r in enumerate(r_grid):
        for b, s in enumerate(s_grid):
            assert grid.values[a, b] == pytest.approx(en(pairs, r, s), abs=1e-14)


def test_en_grid_rejects_unsorted_grid(small_pairs):
    with pytest.raises(InvalidParameterError):
        en_grid(small_pairs, [1.0, 0.5], [1.0])


def _en_prime_loop(x, y, r, s):
    n = len(x)
    total = 0
    for i, j, k, h in itertools.permutations(range(n), 4):
        if abs(x[i] - x[j]) < r:
            total += int(abs(y[i] - y[j]) < s) - int(abs(y[h] - y[k]) < s)
    return math.sqrt(n) * total / (n * (n - 1) * (n - 2) * (n - 3))


def test_en_prime_matches_quadruple_loop():
    rng = np.random.default_rng(8)
    x = rng.standard_normal(5)
    y = rng.standard_normal(5)
    value = en_prime(distance_matrix(x), distance_matrix(y), 0.8, 1.1)
    assert value == pytest.approx(_en_prime_loop(x, y, 0.8, 1.1), abs=1e-14)


def test_en_prime_vanishes_without_close_x_pairs():
    dX = distance_matrix([0.0, 10.0, 20.0, 30.0])
    dY = distance_matrix([0.0, 0.1, 0.2, 0.3])
    assert en_prime(dX, dY, 1.0, 1.0) == 0.0


def test_hn_within_magnitude_bound():
    rng = np.random.default_rng(11)
    for _ in range(50):
        n = int(rng.integers(4, 9))
        dX = distance_matrix(rng.standard_normal(n))
        dY = distance_matrix(rng.standard_normal(n))
        check = hn_check(dX, dY, float(rng.uniform(0.05, 3.0)), float(rng.uniform(0.05, 3.0)))
        assert check.ok
        assert abs(check.hn) <= hn_bound(n) + 1e-12


def test_hn_can_be_negative():
    # two close pairs {0,1} and {2,3} on both sides: E'_n = 0 while E_n = 4/9
    points = [0.0, 0.1, 10.0, 10.1]
    check = hn_check(distance_matrix(points), distance_matrix(points), 1.0, 1.0)
    assert check.hn == pytest.approx(-4 / 9)
    assert check.ok
    assert not check.nonnegative


def test_hn_degenerate_constant_sides():
    d = distance_matrix(np.zeros(5))
    check = hn_check(d, d, 1.0, 1.0)
    assert check.ok
    assert check.hn == pytest.approx(0.0, abs=1e-15)


def test_rates_monotone_and_bonferroni():
    rng = np.random.default_rng(12)
    pairs = pair_arrays(distance_matrix(rng.standard_normal(10)), distance_matrix(rng.standard_normal((10, 3))))
    radii = np.sort(np.concatenate([pairs.Z, pairs.T, rng.uniform(0.0, 6.0, 20)]))
    xs = [rr_x(pairs, r) for r in radii]
    ys = [rr_y(pairs, s) for s in radii]
    assert all(a <= b for a, b in zip(xs, xs[1:]))
    assert all(a <= b for a, b in zip(ys, ys[1:]))
    for r, s in itertools.product(radii[::3], radii[::3]):
        joint = rr_joint(pairs, r, s)
        assert joint >= rr_x(pairs, r) + rr_y(pairs, s) - 1.0 - 1e-15
        assert joint <= rr_joint(pairs, r + 0.5, s) and joint <= rr_joint(pairs, r, s + 0.5)
