"""
Test: model/tools/rng.py
------------------------
"""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from model.tools.rng import SeededRNG


def test_same_seed_same_stream():
    a, b = SeededRNG(42), SeededRNG(42)
    assert [a.random() for _ in range(5)] == [b.random() for _ in range(5)]


def test_reset_replays_the_stream():
    rng = SeededRNG(7)
    first = [rng.randint(0, 100) for _ in range(10)]
    rng.reset()
    assert [rng.randint(0, 100) for _ in range(10)] == first
    rng.reset(8)
    assert rng.seed == 8


def test_fork_is_independent_and_deterministic():
    parent = SeededRNG(3)
    assert parent.fork(1).random() == SeededRNG(3).fork(1).random()
    assert parent.fork(1).random() != parent.fork(2).random()


def test_algorithm_label():
    assert SeededRNG().algorithm == "mt19937"


@given(st.integers(min_value=0, max_value=2**32), st.floats(0.1, 1.0), st.floats(1.5, 10.0))
def test_log_uniform_stays_in_range(seed, low, high):
    x = SeededRNG(seed).log_uniform(low, high)
    assert low * (1 - 1e-12) <= x <= high * (1 + 1e-12)


def test_bernoulli_extremes():
    rng = SeededRNG(0)
    assert not any(rng.bernoulli(0.0) for _ in range(50))
    assert all(rng.bernoulli(1.0) for _ in range(50))


if __name__ == "__main__":
    pytest.main([__file__])
