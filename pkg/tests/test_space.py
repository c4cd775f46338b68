import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from accretive_flows import SpaceModel, as_point, eta_hilbert, norm, pairing

# independently computed: 1 - sqrt(1 - 0.1^2/4) at 25 digits
ETA_AT_0_1 = 0.001250782228091054210980884


def test_norm_examples():
    assert norm([0.0, 0.0, 0.0]) == 0.0
    assert norm([3.0, 4.0]) == 5.0
    assert norm([1.0, 1.0, 1.0, 1.0]) == 2.0


def test_pairing_examples():
    assert pairing([1.0, 0.0], [0.0, 1.0]) == 0.0
    assert pairing([3.0, 4.0], [3.0, 4.0]) == 25.0
    assert pairing([2.0, 1.0], [1.0, 3.0]) == 5.0


def test_pairing_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension mismatch"):
        pairing([1.0, 2.0], [1.0, 2.0, 3.0])


def test_as_point_rejects_non_finite():
    with pytest.raises(ValueError):
        as_point([1.0, float("nan")])
    with pytest.raises(ValueError):
        as_point([float("inf")])
    with pytest.raises(ValueError):
        as_point([])


def test_as_point_accepts_scalar():
    assert as_point(2.0).shape == (1,)


def test_eta_hilbert_values():
    assert eta_hilbert(2.0) == 1.0
    assert abs(eta_hilbert(0.1) - ETA_AT_0_1) < 1e-15
    assert eta_hilbert(1.0) < eta_hilbert(2.0)


@pytest.mark.parametrize("eps", [0.0, -0.5, 2.0001, 3.0])
def test_eta_hilbert_domain(eps):
    with pytest.raises(ValueError):
        eta_hilbert(eps)


def test_eta_hilbert_monotone_on_grid():
    grid = np.linspace(0.02, 2.0, 100)
    vals = [eta_hilbert(float(e)) for e in grid]
    assert all(0.0 < v <= 1.0 for v in vals)
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_space_model_validation():
    SpaceModel(dim=3)
    with pytest.raises(ValueError):
        SpaceModel(dim=0)


@st.composite
def vector_pairs(draw):
    d = draw(st.integers(min_value=1, max_value=8))
    coords = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)
    x = draw(st.lists(coords, min_size=d, max_size=d))
    y = draw(st.lists(coords, min_size=d, max_size=d))
    return np.array(x), np.array(y)


@given(vector_pairs())
@settings(max_examples=200)
def test_pairing_of_point_with_itself_is_squared_norm(pair):
    x, _ = pair
    assert pairing(x, x) == pytest.approx(norm(x) ** 2, rel=1e-12, abs=1e-12)


@given(vector_pairs())
@settings(max_examples=200)
def test_cauchy_schwarz(pair):
    x, y = pair
    assert abs(pairing(y, x)) <= norm(y) * norm(x) + 1e-12 * (1 + norm(y) * norm(x))
