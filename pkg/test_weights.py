
import numpy as np
import pytest

from rrindep.core.data import distance_matrix, pair_arrays
from rrindep.core.weights import (
    AUTO,
    PRESETS,
    WeightSpec,
    choice_label,
    fit_data_driven,
    gaussian_cdf,
    parse_weights,
    resolve_weights,
)
from rrindep.errors import DegenerateSampleError, InvalidParameterError


def test_gaussian_cdf_values():
    assert gaussian_cdf(0.0, 1.0, 0.0) == 0.5
    assert gaussian_cdf(1.0, 2.0, 1.0) == 0.5
    assert abs(gaussian_cdf(0.0, 1.0, 1.959964) - 0.975) < 1e-6
    with pytest.raises(InvalidParameterError):
        gaussian_cdf(0.0, 0.0, 1.0)


def test_fit_data_driven_uses_population_variance():
    pairs = pair_arrays(distance_matrix([0.0, 1.0, 3.0]), distance_matrix([0.0, 2.0, 5.0]))
    spec = fit_data_driven(pairs)
    assert spec.origin == "data_driven"
    assert spec.g1.mu == pytest.approx(2.0)
    assert spec.g1.sigma2 == pytest.approx(2.0 / 3.0)


def test_fit_data_driven_degenerate_side():
    flat = pair_arrays(distance_matrix([0.0, 1.0, 3.0]), distance_matrix([2.0, 2.0, 2.0]))
    with pytest.raises(DegenerateSampleError) as info:
        fit_data_driven(flat)
    assert info.value.side == "Y"


def test_fit_scales_with_coordinates():
    rng = np.random.default_rng(2)
    x = rng.standard_normal((8, 2))
    y = rng.standard_normal(8)
    base = fit_data_driven(pair_arrays(distance_matrix(x), distance_matrix(y)))
    scaled = fit_data_driven(pair_arrays(distance_matrix(3.0 * x), distance_matrix(y)))
    assert scaled.g1.mu == pytest.approx(3.0 * base.g1.mu)
    assert scaled.g1.sigma == pytest.approx(3.0 * base.g1.sigma)
    assert scaled.g2 == base.g2


def test_parse_weights_forms():
    assert parse_weights("auto") == AUTO
    single = parse_weights("N(1,4)")
    assert (single.g1.mu, single.g1.sigma2) == (1.0, 4.0)
    assert single.g1 == single.g2
    assert single.label() == "N(1,4)"

    product = parse_weights("N(0, 1) x N(2, 4)")
    assert product.g2.mu == 2.0 and product.g2.sigma2 == pytest.approx(4.0)
    assert product.label() == "N(0,1)xN(2,4)"

    preset = parse_weights("n_1_4")
    assert (preset.g1.mu, preset.g1.sigma2) == PRESETS["n_1_4"]


@pytest.mark.parametrize("text", ["N(1)", "gauss", "N(1,-1)", "N(1,0)"])
def test_parse_weights_rejects(text):
    with pytest.raises(InvalidParameterError):
        parse_weights(text)


def test_resolve_weights():
    pairs = pair_arrays(distance_matrix([0.0, 1.0, 3.0]), distance_matrix([0.0, 2.0, 5.0]))
    fixed = WeightSpec.fixed(1.0, 1.0)
    assert resolve_weights(fixed, pairs) is fixed
    assert resolve_weights(AUTO, pairs).origin == "data_driven"
    assert choice_label(AUTO) == "auto"
    assert choice_label(fixed) == "N(1,1)"
