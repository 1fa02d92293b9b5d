"""
Test: controller/equilibria.py
------------------------------
Nash and pairwise verification per method, approximation factors,
tightness labels and slack elimination.
"""

import pytest

from controller.equilibria import (
    approximation_factor,
    classify_tightness,
    edge_method,
    eliminate_slack,
    make_deviation,
    verify_nash,
    verify_pairwise,
)
from controller.instances import canonical, random_profile
from controller.oracle import grid_equilibria, screen_equilibria
from model.da.config import Settings
from model.entity.game import Edge, Game, Node
from model.entity.profile import Profile
from model.entity.results import GridSpec, Method, Tightness, Verdict
from model.entity.reward import MaxEffort, PolyConvex, WeightedProduct
from model.entity.scalar_fn import PiecewiseLinear, Power
from model.entity.welfare import social_welfare
from model.tools.errors import InfeasibleProfileError, StabilityRefused, UnsupportedClassError


@pytest.mark.parametrize(
    "name, edge, method",
    [
        ("triangle-noeq", "e1", "sum"),
        ("path-classC", "e2", "convex"),
        ("min-noeq", "e1", "min"),
        ("sqrt-triangle", "e1", "grid"),
        ("max-effort-4path", "e2", "max"),
    ],
)
def test_edge_method(name, edge, method):
    game, _ = canonical(name)
    assert edge_method(game, game.edge(edge)) == method


def test_triangle_start_is_nash_but_not_pairwise_stable():
    game, start = canonical("triangle-noeq")
    assert verify_nash(game, start).verdict == Verdict.STABLE

    report = verify_pairwise(game, start)
    assert report.verdict == Verdict.BILATERAL
    assert report.method == Method.EXACT
    assert report.witness.nodes == ("u1", "u3")
    assert all(gain > 0 for gain in report.witness.gains.values())


def test_unilateral_witness_has_the_largest_gain():
    game, _ = canonical("triangle-noeq")
    report = verify_nash(game, Profile.zero())
    assert report.verdict == Verdict.UNILATERAL
    # every node gains 3 from one unit on a c=3 edge
    assert report.witness.min_gain == pytest.approx(3.0)


def test_greedy_profile_is_pairwise_stable():
    game, start = canonical("path-classC")
    report = verify_pairwise(game, start)
    assert report.verdict == Verdict.STABLE
    assert report.method == Method.EXACT
    assert report.witness is None


def test_min_effort_pair_escapes_by_scan():
    game, start = canonical("min-noeq")
    assert verify_nash(game, start).stable
    report = verify_pairwise(game, start)
    assert report.verdict == Verdict.BILATERAL
    assert report.method == Method.SCAN
    assert set(report.witness.nodes) in ({"u", "v"}, {"w", "z"})


def test_grid_search_finds_the_joint_increase():
    game, start = canonical("sqrt-triangle")
    assert verify_nash(game, start).stable
    report = verify_pairwise(game, start)
    assert report.verdict == Verdict.BILATERAL
    assert report.method == Method.GRID
    assert report.resolution == 16
    assert report.witness.min_gain > 0


def test_lattice_best_responses_only_reach_stable_at_resolution():
    game = Game(
        (Node("u", 1), Node("v", 1)),
        (Edge("e1", "u", "v", MaxEffort(Power(1, 0.5))),),
    )
    report = verify_pairwise(game, Profile({"u": {"e1": 1.0}}), Settings(grid=8))
    assert report.verdict == Verdict.STABLE_AT_RESOLUTION
    assert report.resolution == 8
    assert report.stable


# each case of the no-equilibrium argument: w leaves for z, v leaves for u, or both join e2
MIN_NOEQ_BOUNDARIES = [
    Profile({"v": {"e2": 2.0}, "w": {"e2": 2.0}}),
    Profile({"v": {"e2": 1.0}, "w": {"e2": 1.0}}),
    Profile.zero(),
]


@pytest.mark.parametrize("profile", MIN_NOEQ_BOUNDARIES)
def test_min_noeq_boundary_profiles_have_deviations(profile):
    game, _ = canonical("min-noeq")
    report = verify_pairwise(game, profile)
    assert not report.stable
    assert report.witness.improving(1e-9)


@pytest.mark.parametrize("seed", range(100))
def test_min_noeq_random_profiles_have_deviations(seed):
    game, _ = canonical("min-noeq")
    assert not verify_pairwise(game, random_profile(game, seed)).stable


@pytest.mark.parametrize("resolution", [2, 4])
def test_min_noeq_lattice_equilibria_fail_continuous_screening(resolution):
    game, _ = canonical("min-noeq")
    found = grid_equilibria(game, GridSpec(resolution))
    assert screen_equilibria(game, found) == []


def test_infeasible_profile_is_rejected():
    game, _ = canonical("triangle-noeq")
    with pytest.raises(InfeasibleProfileError, match="budget"):
        verify_nash(game, Profile({"u1": {"e1": 0.8, "e3": 0.8}}))


def test_make_deviation():
    game, start = canonical("triangle-noeq")
    deviation = make_deviation(game, start, {"u3": {"e3": 1.0}})
    assert deviation.before == {"u3": pytest.approx(3.0)}
    assert deviation.after == {"u3": pytest.approx(2.0)}
    assert not deviation.improving(1e-9)


def test_approximation_factor():
    game, start = canonical("path-classC")
    assert approximation_factor(game, start) == 1.0

    optimum = Profile(
        {"v1": {"e1": 1.0}, "v2": {"e1": 1.0}, "v3": {"e3": 1.0}, "v4": {"e3": 1.0}}
    )
    assert approximation_factor(game, optimum) == pytest.approx(1.1)


def test_approximation_factor_from_nothing_is_infinite():
    game, _ = canonical("single-product")
    assert approximation_factor(game, Profile.zero()) == float("inf")


def test_classify_tightness():
    game, start = canonical("triangle-noeq")
    assert classify_tightness(game, start).all_tight

    game, start = canonical("sqrt-triangle")
    assert classify_tightness(game, start).edges_with(Tightness.SLACK) == ["e1", "e2", "e3"]

    game, _ = canonical("path-classC")
    labels = classify_tightness(game, Profile({"v2": {"e2": 0.5}, "v3": {"e2": 1.0}})).labels
    assert labels["e2"] == Tightness.HALF_SLACK
    assert labels["e1"] == Tightness.TIGHT


def test_eliminate_slack_keeps_tight_profiles():
    game, start = canonical("path-classC")
    assert eliminate_slack(game, start) == start


def _idle_pair_game():
    # e1 only pays once x + y > 3, out of reach with unit budgets
    threshold = PolyConvex(((0, 1, 1), (1, 0, 1)), PiecewiseLinear(((0, 0), (3, 0), (4, 1))))
    return Game(
        (Node("u", 1), Node("v", 1), Node("a", 1), Node("b", 1)),
        (Edge("e1", "u", "v", threshold), Edge("e2", "a", "b", WeightedProduct(1))),
    )


def test_eliminate_slack_tightens_a_stable_slack_profile():
    game = _idle_pair_game()
    start = Profile({"u": {"e1": 0.5}, "v": {"e1": 0.5}, "a": {"e2": 1.0}, "b": {"e2": 1.0}})
    assert verify_pairwise(game, start).stable
    assert classify_tightness(game, start).edges_with(Tightness.SLACK) == ["e1"]

    tight = eliminate_slack(game, start)
    assert classify_tightness(game, tight).edges_with(Tightness.SLACK) == []
    assert tight.strategy("u") == {"e1": 1.0}
    assert tight.strategy("v") == {"e1": 0.5}
    assert social_welfare(game, start) == pytest.approx(2.0)
    assert social_welfare(game, tight) == pytest.approx(2.0)
    assert verify_pairwise(game, tight).stable


def test_eliminate_slack_refuses_unstable_input():
    game, start = canonical("triangle-noeq")
    with pytest.raises(StabilityRefused) as info:
        eliminate_slack(game, start)
    assert info.value.verdict == Verdict.BILATERAL.value


def test_eliminate_slack_needs_convex_rewards():
    game, start = canonical("min-noeq")
    with pytest.raises(UnsupportedClassError):
        eliminate_slack(game, start)


if __name__ == "__main__":
    pytest.main([__file__])
