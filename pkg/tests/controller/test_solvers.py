"""
Test: controller/solvers.py
---------------------------
Class-specific equilibrium solvers, social optima, dual certificates and
the price of anarchy.
"""

import math

import pytest

from controller.equilibria import approximation_factor, verify_pairwise
from controller.instances import RANDOM_CLASSES, canonical, random_family, random_profile
from controller.oracle import grid_equilibria, screen_equilibria
from controller.solvers import (
    dual_certificate,
    infer_method,
    optimum_method,
    price_of_anarchy,
    social_optimum,
    solve,
    solve_greedy_c0,
    solve_max_effort,
    solve_min_concave,
    solve_min_convex_uniform,
    solve_weighted_sum,
)
from model.da.config import Settings
from model.entity.game import Edge, Game, Node
from model.entity.profile import Profile
from model.entity.results import GridSpec, SolveStatus
from model.entity.reward import MinEffort, WeightedSum
from model.entity.scalar_fn import Linear, Power
from model.entity.welfare import edge_effort
from model.tools.errors import StabilityRefused, UnsupportedClassError


def _weighted_sum_game(budgets, edges):
    return Game(
        tuple(Node(v, b) for v, b in budgets.items()),
        tuple(Edge(eid, u, v, WeightedSum(c)) for eid, u, v, c in edges),
    )


# ------------------------------
# solvers
# ------------------------------


def test_greedy_c0_on_the_path():
    game, _ = canonical("path-classC")
    outcome = solve_greedy_c0(game)
    assert outcome.status == SolveStatus.EQUILIBRIUM
    assert outcome.strong
    assert outcome.facts["matching"] == ["e2"]
    assert outcome.facts["welfare"] == pytest.approx(2.2)
    assert outcome.profile == Profile({"v2": {"e2": 1.0}, "v3": {"e2": 1.0}})


@pytest.mark.parametrize("seed", range(10))
def test_greedy_c0_random_products_are_stable(seed):
    game = random_family("c0-product", 6, 0.5, seed)
    outcome = solve_greedy_c0(game)
    assert verify_pairwise(game, outcome.profile).stable


def test_greedy_c0_refuses_other_classes():
    game, _ = canonical("triangle-noeq")
    assert solve_greedy_c0(game).status == SolveStatus.UNSUPPORTED


def test_weighted_sum_triangle_has_no_equilibrium():
    game, _ = canonical("triangle-noeq")
    outcome = solve_weighted_sum(game)
    assert outcome.status == SolveStatus.NO_EQUILIBRIUM
    assert outcome.witness_edge == "e3"
    assert "c_e^2" in outcome.witness


def test_weighted_sum_triangle_with_a_cheap_edge():
    game = _weighted_sum_game(
        {"u1": 1, "u2": 1, "u3": 1},
        [("e1", "u1", "u2", 3), ("e2", "u2", "u3", 3), ("e3", "u1", "u3", 1)],
    )
    outcome = solve_weighted_sum(game)
    assert outcome.status == SolveStatus.EQUILIBRIUM
    assert outcome.facts["welfare"] == pytest.approx(18.0)
    assert outcome.facts["price_of_anarchy"] == 1.0
    assert verify_pairwise(game, outcome.profile).stable


def test_weighted_sum_node_forced_twice():
    game = _weighted_sum_game(
        {"x": 1, "a": 1, "b": 1, "p": 1, "q": 1},
        [
            ("e1", "x", "a", 2),
            ("e2", "x", "b", 2),
            ("e3", "a", "p", 5),
            ("e4", "b", "q", 5),
        ],
    )
    outcome = solve_weighted_sum(game)
    assert outcome.status == SolveStatus.NO_EQUILIBRIUM
    assert outcome.witness_edge == "e2"
    assert "both e1 and e2" in outcome.witness


@pytest.mark.parametrize("seed", range(10))
def test_weighted_sum_random_outcomes_verify(seed):
    game = random_family("weighted-sum", 5, 0.6, seed)
    outcome = solve_weighted_sum(game)
    if outcome.status == SolveStatus.EQUILIBRIUM:
        assert verify_pairwise(game, outcome.profile).stable
        _, optimum = social_optimum(game, "separable")
        assert outcome.facts["welfare"] == pytest.approx(optimum)
    else:
        assert outcome.status == SolveStatus.NO_EQUILIBRIUM
        assert outcome.witness_edge in game.edge_ids


def test_min_convex_uniform():
    game, _ = canonical("min-uniform-3path")
    outcome = solve_min_convex_uniform(game)
    assert outcome.status == SolveStatus.EQUILIBRIUM
    assert outcome.facts["matching"] == ["e2"]
    assert outcome.facts["welfare"] == pytest.approx(2.2)
    assert outcome.strong


def test_min_convex_uniform_needs_uniform_budgets():
    game, _ = canonical("min-noeq")
    outcome = solve_min_convex_uniform(game)
    assert outcome.status == SolveStatus.UNSUPPORTED
    assert "uniform" in outcome.witness


def test_min_concave_star():
    game, _ = canonical("star-concave")
    outcome = solve_min_concave(game)
    assert outcome.status == SolveStatus.EQUILIBRIUM
    assert outcome.facts["wake_order"][0] == "v"
    assert outcome.profile.strategy("v") == pytest.approx({"e1": 0.5, "e2": 0.5})
    assert outcome.facts["welfare"] == pytest.approx(5.0)
    assert outcome.strong
    assert not outcome.unique


def test_min_concave_smooth_rewards_are_unique():
    game = random_family("min-concave-smooth", 4, 0.8, seed=3)
    assert solve_min_concave(game).unique


@pytest.mark.parametrize("seed", range(100))
def test_min_concave_random_outcomes_verify(seed):
    game = random_family("min-concave", 5, 0.6, seed)
    outcome = solve_min_concave(game)
    assert outcome.status == SolveStatus.EQUILIBRIUM
    outcome.profile.check_feasible(game)
    assert verify_pairwise(game, outcome.profile).stable
    assert sorted(outcome.facts["wake_order"]) == sorted(game.node_ids)


@pytest.mark.parametrize("seed", range(10))
def test_min_linear_random_outcomes_verify(seed):
    game = random_family("min-linear", 6, 0.5, seed)
    outcome = solve_min_concave(game)
    assert verify_pairwise(game, outcome.profile).stable


def _relabel(game, names):
    return Game(
        tuple(Node(names[n.id], n.budget) for n in reversed(game.nodes)),
        tuple(Edge(e.id, names[e.u], names[e.v], e.reward) for e in game.edges),
    )


@pytest.mark.parametrize("seed", range(5))
def test_min_concave_smooth_equilibrium_ignores_node_labels(seed):
    game = random_family("min-concave-smooth", 5, 0.7, seed)
    ids = game.node_ids
    names = dict(zip(ids, reversed(ids)))
    relabelled = _relabel(game, names)
    first = solve_min_concave(game).profile
    second = solve_min_concave(relabelled).profile
    for edge in game.edge_ids:
        assert edge_effort(relabelled, second, edge) == pytest.approx(
            edge_effort(game, first, edge), abs=1e-6
        )


def test_max_effort_ascent_from_zero():
    game, _ = canonical("max-effort-4path")
    outcome = solve_max_effort(game)
    assert outcome.facts["potential_trace"] == pytest.approx([0.0, 1.0, 2.0])
    assert outcome.facts["welfare"] == pytest.approx(4.0)
    assert outcome.facts["verification"] == "Stable"


def test_max_effort_from_the_start_profile():
    game, start = canonical("max-effort-4path")
    outcome = solve_max_effort(game, Settings(), start=start)
    assert outcome.facts["steps"] == 0
    assert outcome.facts["welfare"] == pytest.approx(2.02)

    optimum, welfare = social_optimum(game)
    assert welfare == pytest.approx(4.0)
    assert price_of_anarchy(game, outcome.profile, optimum) == pytest.approx(4.0 / 2.02)


# ------------------------------
# dispatch
# ------------------------------


@pytest.mark.parametrize(
    "name, method",
    [
        ("path-classC", "greedy-c0"),
        ("triangle-noeq", "weighted-sum"),
        ("star-concave", "min-concave"),
        ("max-effort-4path", "max-effort"),
    ],
)
def test_infer_method(name, method):
    game, _ = canonical(name)
    assert infer_method(game) == method


def test_infer_method_ambiguous():
    game, _ = canonical("min-linear-3path")
    with pytest.raises(ValueError, match="ambiguous.*min-convex-uniform, min-concave"):
        infer_method(game)


def test_infer_method_mixed_classes():
    game, _ = canonical("sqrt-triangle")
    with pytest.raises(UnsupportedClassError):
        infer_method(game)


def test_solve_unknown_method():
    game, _ = canonical("path-classC")
    with pytest.raises(ValueError, match="unknown method"):
        solve(game, "simulated-annealing")


def test_solve_explicit_method_on_the_wrong_class():
    game, _ = canonical("path-classC")
    assert solve(game, "weighted-sum").status == SolveStatus.UNSUPPORTED


# ------------------------------
# optima
# ------------------------------


@pytest.mark.parametrize(
    "name, method, welfare",
    [
        ("path-classC", "tight-matching", 4.0),
        ("min-linear-3path", "lp", 4.0),
        ("triangle-noeq", "separable", 18.0),
    ],
)
def test_social_optimum(name, method, welfare):
    game, _ = canonical(name)
    assert optimum_method(game) == method
    _, value = social_optimum(game)
    assert value == pytest.approx(welfare)


def test_lp_optimum_profile():
    game, _ = canonical("min-linear-3path")
    profile, _ = social_optimum(game, "lp")
    assert profile.strategy("v2") == pytest.approx({"e1": 1.0})
    assert profile.strategy("v3") == pytest.approx({"e3": 1.0})


def test_optimum_method_checks_the_class():
    game, _ = canonical("triangle-noeq")
    with pytest.raises(UnsupportedClassError):
        optimum_method(game, "lp")
    with pytest.raises(ValueError, match="unknown optimum method"):
        optimum_method(game, "exhaustive")
    assert optimum_method(game, "grid") == "grid"


def test_grid_optimum_is_a_lower_bound():
    game, _ = canonical("path-classC")
    _, exact = social_optimum(game, "tight-matching")
    _, grid = social_optimum(game, "grid", Settings(grid=4))
    assert grid <= exact + 1e-9
    assert grid == pytest.approx(4.0)


# ------------------------------
# certificates
# ------------------------------


def test_dual_certificate_on_the_min_linear_path():
    game, start = canonical("min-linear-3path")
    certificate = dual_certificate(game, start)
    assert certificate.dual_feasible
    assert certificate.primal_value == pytest.approx(2.2)
    assert certificate.dual_value == pytest.approx(4.4)
    assert certificate.y == pytest.approx({"v1": 0.0, "v2": 1.1, "v3": 1.1, "v4": 0.0})
    _, optimum = social_optimum(game, "lp")
    assert certificate.dual_value >= optimum - 1e-9


def test_dual_certificate_marks_zero_budget_nodes():
    game = Game(
        (Node("a", 0), Node("b", 1), Node("c", 1)),
        (
            Edge("e1", "a", "b", MinEffort(Linear(1))),
            Edge("e2", "b", "c", MinEffort(Linear(2))),
        ),
    )
    profile = Profile({"b": {"e2": 1.0}, "c": {"e2": 1.0}})
    certificate = dual_certificate(game, profile)
    assert certificate.infinite_nodes == ("a",)
    assert math.isinf(certificate.y["a"])
    assert certificate.dual_value == pytest.approx(8.0)


def test_dual_certificate_refuses_unstable_profiles():
    game, _ = canonical("min-linear-3path")
    with pytest.raises(StabilityRefused):
        dual_certificate(game, Profile.zero())


def test_dual_certificate_needs_min_linear_rewards():
    game, start = canonical("triangle-noeq")
    with pytest.raises(UnsupportedClassError):
        dual_certificate(game, start)


@pytest.mark.parametrize("seed", range(3))
def test_dual_bounds_random_min_linear_optima(seed):
    game = random_family("min-linear", 5, 0.6, seed)
    outcome = solve(game)
    assert outcome.algorithm == "min-concave"
    certificate = dual_certificate(game, outcome.profile)
    assert certificate.dual_feasible
    _, optimum = social_optimum(game, "lp")
    assert certificate.dual_value >= optimum - 1e-6


def test_price_of_anarchy_on_the_path():
    game, start = canonical("path-classC")
    optimum, _ = social_optimum(game)
    assert price_of_anarchy(game, start, optimum) == pytest.approx(4 / 2.2, abs=1e-6)


def test_price_of_anarchy_refuses_unstable_equilibria():
    game, start = canonical("triangle-noeq")
    optimum, welfare = social_optimum(game)
    with pytest.raises(StabilityRefused, match="--force"):
        price_of_anarchy(game, start, optimum)
    forced = price_of_anarchy(game, start, optimum, force=True)
    assert forced == pytest.approx(welfare / 18.0)


def test_price_of_anarchy_of_nothing_against_nothing():
    game, _ = canonical("single-product")
    assert price_of_anarchy(game, Profile.zero(), Profile.zero(), force=True) == 1.0


# ------------------------------
# prices of anarchy over random families
# ------------------------------


@pytest.mark.parametrize("seed", range(20))
def test_weighted_sum_verdicts_hold_against_random_profiles(seed):
    game = random_family("weighted-sum", 5, 0.6, seed)
    outcome = solve_weighted_sum(game)
    if outcome.status == SolveStatus.NO_EQUILIBRIUM:
        for k in range(50):
            assert not verify_pairwise(game, random_profile(game, 1000 * seed + k)).stable
    else:
        optimum, _ = social_optimum(game, "separable")
        assert price_of_anarchy(game, outcome.profile, optimum) == pytest.approx(1.0, abs=1e-9)


def test_path_price_of_anarchy_approaches_two():
    game, _ = canonical("path-classC", epsilon=0.0025)
    equilibrium = solve_greedy_c0(game).profile
    optimum, welfare = social_optimum(game, "tight-matching")
    assert welfare == pytest.approx(4.0)
    assert price_of_anarchy(game, equilibrium, optimum) >= 1.99


@pytest.mark.parametrize("seed", range(10))
def test_c0_price_of_anarchy_is_at_most_two(seed):
    game = random_family("c0-product", 7, 0.5, seed)
    equilibrium = solve_greedy_c0(game).profile
    optimum, _ = social_optimum(game, "tight-matching")
    assert price_of_anarchy(game, equilibrium, optimum) <= 2 + 1e-6


@pytest.mark.parametrize("cls", ["min-concave", "min-concave-smooth"])
@pytest.mark.parametrize("seed", range(5))
def test_concave_price_of_anarchy_is_at_most_two(cls, seed):
    settings = Settings(grid=8)
    game = random_family(cls, 3, 0.9, seed)
    equilibrium = solve_min_concave(game, settings).profile
    optimum, _ = social_optimum(game, "grid", settings)
    assert price_of_anarchy(game, equilibrium, optimum, settings) <= 2 + 1e-6


def _integral(game, profile):
    return all(
        edge_effort(game, profile, e) == pytest.approx(0.0, abs=1e-9)
        or edge_effort(game, profile, e) == pytest.approx(game.budget(game.edge(e).u), abs=1e-9)
        for e in game.edge_ids
    )


@pytest.mark.parametrize("seed", range(20))
def test_min_convex_uniform_random_outcomes_are_integral(seed):
    game = random_family("min-convex-uniform", 6, 0.5, seed)
    outcome = solve_min_convex_uniform(game)
    assert verify_pairwise(game, outcome.profile).stable
    assert _integral(game, outcome.profile)


def _squared(game):
    return Game(
        game.nodes,
        tuple(Edge(e.id, e.u, e.v, MinEffort(Power(e.reward.h(1.0), 2))) for e in game.edges),
    )


@pytest.mark.parametrize("seed", range(5))
def test_strictly_convex_min_lattice_equilibria_are_integral(seed):
    settings = Settings(grid=4)
    game = _squared(random_family("min-convex-uniform", 3, 0.9, seed))
    kept = screen_equilibria(game, grid_equilibria(game, GridSpec(4), settings), settings)
    assert kept
    assert all(_integral(game, profile) for profile in kept)
    optimum, _ = social_optimum(game, "grid", settings)
    for profile in kept:
        assert price_of_anarchy(game, profile, optimum, settings) <= 2 + 1e-6


def test_min_uniform_path_price_of_anarchy_approaches_two():
    game, _ = canonical("min-uniform-3path", epsilon=0.0025)
    equilibrium = solve_min_convex_uniform(game).profile
    optimum, welfare = social_optimum(game, "lp")
    assert welfare == pytest.approx(4.0)
    assert price_of_anarchy(game, equilibrium, optimum) >= 1.99


@pytest.mark.parametrize("seed", range(20))
def test_max_effort_ascent_converges_on_random_games(seed):
    game = random_family("max-convex", 6, 0.5, seed)
    outcome = solve_max_effort(game)
    trace = outcome.facts["potential_trace"]
    assert all(after > before for before, after in zip(trace, trace[1:]))
    assert outcome.facts["verification"] == "Stable"


@pytest.mark.parametrize("cls", RANDOM_CLASSES)
@pytest.mark.parametrize("seed", range(3))
def test_optimum_is_a_two_approximate_equilibrium(cls, seed):
    settings = Settings(grid=8)
    game = random_family(cls, 3, 0.9, seed)
    optimum, _ = social_optimum(game, "auto", settings)
    assert approximation_factor(game, optimum, settings) <= 2 + 1e-6


if __name__ == "__main__":
    pytest.main([__file__])
