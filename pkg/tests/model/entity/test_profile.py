"""
Test: model/entity/profile.py
-----------------------------
"""

import pytest

from controller.instances import canonical
from model.entity.profile import Profile
from model.tools.errors import InfeasibleProfileError


def test_zero_efforts_are_dropped():
    assert Profile({"u": {"e1": 0.0}, "v": {}}) == Profile.zero()
    assert Profile({"u": {"e1": 1.0, "e2": 0}}).to_dict() == {"u": {"e1": 1.0}}


def test_updates_return_new_profiles():
    before = Profile({"u": {"e1": 1.0}})
    after = before.with_strategy("u", {"e2": 0.5})
    assert before.effort("u", "e1") == 1.0
    assert after.effort("u", "e1") == 0.0
    assert after.strategy("u") == {"e2": 0.5}
    merged = before.with_strategies({"v": {"e1": 2.0}})
    assert merged.spent("u") == 1.0 and merged.spent("v") == 2.0


def test_negative_effort_rejected():
    with pytest.raises(ValueError, match="negative effort"):
        Profile({"u": {"e1": -0.5}})


def test_check_feasible():
    game, start = canonical("triangle-noeq")
    assert start.check_feasible(game) is start
    with pytest.raises(InfeasibleProfileError, match="budget"):
        Profile({"u1": {"e1": 0.7, "e3": 0.7}}).check_feasible(game)
    with pytest.raises(InfeasibleProfileError, match="non-incident"):
        Profile({"u1": {"e2": 0.5}}).check_feasible(game)
    with pytest.raises(InfeasibleProfileError, match="unknown node"):
        Profile({"q": {"e1": 0.5}}).check_feasible(game)
    # overspending within tol is accepted
    Profile({"u1": {"e1": 1.0 + 1e-12}}).check_feasible(game, tol=1e-9)


def test_fingerprint():
    a = Profile({"u": {"e1": 1.0}, "v": {"e1": 0.5}})
    b = Profile({"v": {"e1": 0.5 + 1e-13}, "u": {"e1": 1.0}})
    c = Profile({"u": {"e1": 1.0}, "v": {"e1": 0.6}})
    assert a.fingerprint() == b.fingerprint()
    assert a.fingerprint() != c.fingerprint()
    assert len(a.fingerprint()) == 64


def test_items_are_sorted():
    profile = Profile({"v": {"e2": 1.0, "e1": 0.5}, "u": {"e1": 1.0}})
    assert list(profile.items()) == [("u", "e1", 1.0), ("v", "e1", 0.5), ("v", "e2", 1.0)]


if __name__ == "__main__":
    pytest.main([__file__])
