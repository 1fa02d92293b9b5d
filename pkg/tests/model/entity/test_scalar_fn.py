"""
Test: model/entity/scalar_fn.py
-------------------------------
Values, one-sided derivatives, shapes and demand queries of the h variants.
"""

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from model.entity.scalar_fn import (
    Linear,
    PiecewiseLinear,
    Power,
    Shape,
    Truncated,
    shape_consistent,
    truncate,
)

KINKED = PiecewiseLinear(((0, 0), (0.5, 1.5), (1, 2)))
SAMPLES = [0, 0.1, 0.25, 0.5, 0.75, 1, 1.5, 3]


def test_linear():
    h = Linear(2)
    assert h(3) == 6
    assert h.shape == Shape.LINEAR
    assert h.demand(1) == math.inf
    assert h.demand(2) == math.inf
    assert h.demand(2, strict=True) == 0.0
    assert h.demand(3) == 0.0
    with pytest.raises(ValueError, match="slope"):
        Linear(0)


def test_power_concave():
    h = Power(1, 0.5)
    assert h.shape == Shape.STRICTLY_CONCAVE
    assert h.right_derivative(0) == math.inf
    assert h(4) == pytest.approx(2.0)
    # marginal 1 is reached up to x = 1/4
    assert h.demand(1) == pytest.approx(0.25)
    assert h.left_derivative(h.demand(1)) == pytest.approx(1.0)


def test_power_convex():
    h = Power(2, 2)
    assert h.shape == Shape.STRICTLY_CONVEX
    assert h.right_derivative(0) == 0.0
    assert h.left_derivative(1.5) == pytest.approx(6.0)
    with pytest.raises(NotImplementedError):
        h.demand(1)


def test_power_with_unit_exponent_is_linear():
    assert Power(3, 1).shape == Shape.LINEAR
    assert Power(3, 1).right_derivative(0) == 3


def test_piecewise_values_and_one_sided_derivatives():
    assert KINKED(0.25) == pytest.approx(0.75)
    assert KINKED(1) == pytest.approx(2.0)
    # the last slope continues
    assert KINKED(2) == pytest.approx(3.0)
    assert KINKED.left_derivative(0.5) == pytest.approx(3.0)
    assert KINKED.right_derivative(0.5) == pytest.approx(1.0)
    assert KINKED.kinks() == (0.5,)
    assert KINKED.levels() == (3.0, 1.0)
    assert KINKED.shape == Shape.CONCAVE


def test_piecewise_demand():
    assert KINKED.demand(2) == pytest.approx(0.5)
    assert KINKED.demand(1) == math.inf
    assert KINKED.demand(1, strict=True) == pytest.approx(0.5)
    assert KINKED.demand(3, strict=True) == 0.0


def test_piecewise_convex_shape():
    assert PiecewiseLinear(((0, 0), (1, 1), (2, 3))).shape == Shape.CONVEX


@pytest.mark.parametrize(
    "points",
    [
        ((0, 0),),
        ((0.5, 0), (1, 1)),
        ((0, 0), (1, 2), (1, 3)),
        ((0, 0), (1, 2), (2, 1)),
    ],
)
def test_piecewise_rejects_bad_points(points):
    with pytest.raises(ValueError):
        PiecewiseLinear(points)


def test_truncated():
    h = Truncated(Linear(2), 1)
    assert h(3) == pytest.approx(2.0)
    assert h.left_derivative(1) == pytest.approx(2.0)
    assert h.right_derivative(1) == 0.0
    assert h.demand(1) == pytest.approx(1.0)
    assert h.demand(0) == math.inf
    assert h.kinks() == (1.0,)
    with pytest.raises(ValueError, match="concave"):
        Truncated(Power(1, 2), 1)


def test_truncate_folds_nested_caps():
    h = truncate(truncate(Linear(1), 2), 1)
    assert isinstance(h, Truncated)
    assert isinstance(h.inner, Linear)
    assert h.at == 1


@pytest.mark.parametrize(
    "h",
    [Linear(2), Power(1, 0.5), Power(2, 2), KINKED, Truncated(KINKED, 0.75)],
)
def test_declared_shape_matches_samples(h):
    assert shape_consistent(h, SAMPLES)


@given(st.floats(0, 5), st.floats(0, 5))
def test_piecewise_is_nondecreasing(x, y):
    lo, hi = sorted((x, y))
    assert KINKED(lo) <= KINKED(hi) + 1e-12


@given(st.floats(0.01, 10), st.floats(0.1, 3))
def test_to_dict_names_the_kind(a, k):
    assert Power(a, k).to_dict() == {"kind": "power", "a": a, "k": k}


if __name__ == "__main__":
    pytest.main([__file__])
