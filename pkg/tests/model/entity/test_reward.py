"""
Test: model/entity/reward.py
----------------------------
Reward values, partials and the class predicates decided from structure.
"""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from model.entity.reward import (
    MaxEffort,
    MinEffort,
    PolyConvex,
    WeightedProduct,
    WeightedSum,
    is_min_concave,
    is_min_convex,
    is_min_linear,
    linear_slope,
)
from model.entity.scalar_fn import Linear, PiecewiseLinear, Power, Shape

REWARDS = [
    WeightedSum(3),
    WeightedProduct(2),
    PolyConvex(((1, 1, 1.0), (2, 1, 0.5), (1, 2, 0.5)), Power(1, 2)),
    PolyConvex(((1, 1, 1.0),), Power(1, 0.5)),
    MinEffort(PiecewiseLinear(((0, 0), (0.5, 1.5), (1, 2)))),
    MaxEffort(Power(1, 2)),
]


def test_weighted_sum():
    f = WeightedSum(3)
    assert f(1, 2) == 9
    assert f.in_c and f.in_p
    assert not f.in_c0
    assert f.own_shape(1) == Shape.LINEAR


def test_weighted_product():
    f = WeightedProduct(2)
    assert f(1, 2) == 4
    assert f.partial_right(5, 3) == 6
    assert f.in_c0


def test_poly_convex_classes():
    product_only = PolyConvex(((1, 1, 1.0),), Power(1, 2))
    assert product_only.in_c0 and product_only.in_c_strict
    with_square = PolyConvex(((1, 1, 1.0), (2, 0, 1.0), (0, 2, 1.0)), Linear(1))
    assert with_square.in_c and not with_square.in_c0
    # (x + y)^2 with the outer square
    assert PolyConvex(((1, 0, 1.0), (0, 1, 1.0)), Power(1, 2)).value(1, 2) == pytest.approx(9.0)


def test_poly_concave_outer():
    f = PolyConvex(((1, 1, 1.0),), Power(1, 0.5))
    assert f(1, 4) == pytest.approx(2.0)
    assert not f.in_c and not f.in_c0
    assert f.own_shape(1) == Shape.CONCAVE


def test_poly_stores_sorted_terms():
    f = PolyConvex(((2, 1, 0.5), (1, 1, 1.0), (1, 2, 0.5)), Linear(1))
    assert f.poly == ((1, 1, 1.0), (1, 2, 0.5), (2, 1, 0.5))


@pytest.mark.parametrize(
    "poly, outer, message",
    [
        (((0, 0, 1.0),), Linear(1), "constant"),
        (((2, 1, 1.0),), Linear(1), "symmetric"),
        (((1, 1, 1.0), (1, 1, 2.0)), Linear(1), "duplicate"),
        (((2, 1, 1.0), (1, 2, 1.0)), Power(1, 0.5), "degree"),
        ((), Linear(1), "at least one"),
        (((1, 1, -1.0),), Linear(1), "> 0"),
    ],
)
def test_poly_rejects(poly, outer, message):
    with pytest.raises(ValueError, match=message):
        PolyConvex(poly, outer)


def test_min_effort_partials():
    f = MinEffort(Linear(2))
    assert f(1, 3) == 2
    assert f.partial_right(1, 2) == 2
    assert f.partial_right(2, 1) == 0
    assert f.partial_left(1, 1) == 2
    assert f.partial_left(0, 1) == 0
    assert f.own_shape(0) == Shape.LINEAR
    assert f.own_shape(1) == Shape.CONCAVE


def test_max_effort_partials():
    f = MaxEffort(Power(1, 2))
    assert f(1, 3) == 9
    assert f.partial_right(3, 1) == pytest.approx(6)
    assert f.partial_right(1, 3) == 0
    assert f.in_c
    assert not MaxEffort(Power(1, 0.5)).in_c


def test_min_predicates():
    assert is_min_linear(MinEffort(Linear(5)))
    assert is_min_convex(MinEffort(Power(2, 2)))
    assert not is_min_concave(MinEffort(Power(2, 2)))
    assert is_min_concave(MinEffort(Linear(5)))
    assert not is_min_linear(WeightedSum(1))
    assert linear_slope(MinEffort(Linear(5))) == 5


def test_scalar_of_sum_raises():
    with pytest.raises(AttributeError):
        WeightedSum(1).scalar


@pytest.mark.parametrize("f", REWARDS)
@given(x=st.floats(0, 3), y=st.floats(0, 3))
def test_rewards_are_symmetric(f, x, y):
    assert f(x, y) == pytest.approx(f(y, x), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("f", REWARDS)
def test_max_reward_is_value_at_budgets(f):
    assert f.max_reward(1, 2) == f(1, 2)


if __name__ == "__main__":
    pytest.main([__file__])
