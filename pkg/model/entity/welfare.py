"""
model/entity/welfare.py
-----------------------
Utility and welfare accounting over a (game, profile) pair.

Functions:
- edge_reward: f_e(s_u(e), s_v(e))
- edge_effort: s_e = min(s_u(e), s_v(e)), the reduced form of min-effort games
- node_utility: w_v(s), sum of incident edge rewards
- social_welfare: w(s), cross-checked against 2 * sum of edge rewards
- potential: the exact potential w(s) / 2
"""

from model.entity.game import Game
from model.entity.profile import Profile
from model.tools.errors import SolverInternalError


def edge_reward(game: Game, profile: Profile, edge_id: str) -> float:
    edge = game.edge(edge_id)
    return edge.reward.value(profile.effort(edge.u, edge_id), profile.effort(edge.v, edge_id))


def edge_effort(game: Game, profile: Profile, edge_id: str) -> float:
    edge = game.edge(edge_id)
    return min(profile.effort(edge.u, edge_id), profile.effort(edge.v, edge_id))


def node_utility(game: Game, profile: Profile, node_id: str) -> float:
    return sum(edge_reward(game, profile, e.id) for e in game.incident(node_id))


def social_welfare(game: Game, profile: Profile, tol: float = 1e-9) -> float:
    """
    w(s) = sum_v w_v(s); must equal 2 * sum_e f_e within tol * (1 + w).

    Raises:
        SolverInternalError: if the two sums disagree.
    """
    by_node = sum(node_utility(game, profile, v) for v in game.node_ids)
    by_edge = 2.0 * sum(edge_reward(game, profile, e) for e in game.edge_ids)
    if abs(by_node - by_edge) > tol * (1.0 + abs(by_edge)):
        raise SolverInternalError(f"welfare identity broken: {by_node!r} != {by_edge!r}")
    return by_edge


def potential(game: Game, profile: Profile) -> float:
    return social_welfare(game, profile) / 2.0
