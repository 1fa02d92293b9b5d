"""
controller/allocation.py
------------------------
Unilateral best responses and the marginal-loss helpers built on them.

A node's utility against fixed neighbours is separable: one term
g_e(x) = f_e(x, y_e) per incident edge, y_e being the neighbour's effort.
The method is picked from what every term supports:

- vertex         all terms convex in x: full budget on one edge
- water-filling  all terms concave in x: equalize marginals
- argmax-spread  all terms convex up to a cap and flat beyond it
- grid           anything else, on the lattice B/g

Functions:
- best_response, controlled_best_response, matched_best_response
- best_other_value, removal_loss, water_fill, min_left_derivative
- utility_with, node_terms, lattice_points, lattice_size
"""

import itertools
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

from model.da.config import Settings
from model.entity.game import Game
from model.entity.profile import Profile
from model.entity.results import BestResponse, BRKind
from model.entity.reward import MaxEffort, MinEffort, PolyConvex, Reward, is_min_concave
from model.entity.welfare import node_utility
from model.tools.errors import InfeasibleProfileError, SolverInternalError, UnsupportedClassError

CONVEX = "convex"
CONCAVE = "concave"
CAPPED = "capped"
_ALL = frozenset((CONVEX, CONCAVE, CAPPED))
MAX_SPREAD_EDGES = 16
MAX_DOUBLINGS = 2000


@dataclass(frozen=True)
class Term:
    """g(x) = reward(x, partner) for one incident edge."""

    edge: str
    reward: Reward
    partner: float

    def value(self, x: float) -> float:
        return self.reward.value(x, self.partner)

    @property
    def linear(self) -> bool:
        r, y = self.reward, self.partner
        if isinstance(r, MinEffort):
            return y <= 0
        if isinstance(r, MaxEffort):
            return y <= 0 and r.h.shape.convex and r.h.shape.concave
        if isinstance(r, PolyConvex):
            return r.outer.shape.convex and r.outer.shape.concave and r.max_x_degree <= 1
        return True

    @property
    def capabilities(self) -> frozenset:
        if self.linear:
            return _ALL
        r, y = self.reward, self.partner
        shape = r.scalar.shape
        caps: Set[str] = set()
        if isinstance(r, MinEffort):
            if shape.concave:
                caps.add(CONCAVE)
            if shape.convex:
                caps.add(CAPPED)
        elif isinstance(r, MaxEffort):
            if shape.convex:
                caps.update((CONVEX, CAPPED))
            if y <= 0 and shape.concave:
                caps.add(CONCAVE)
        elif isinstance(r, PolyConvex):
            if shape.convex:
                caps.update((CONVEX, CAPPED))
            else:
                caps.add(CONCAVE)
        return frozenset(caps)

    @property
    def cap(self) -> float:
        """Effort beyond which the term is flat (for the capped method)."""
        if isinstance(self.reward, MinEffort):
            return self.partner
        return math.inf

    def _affine(self) -> Tuple[float, float]:
        # p(x, y) = alpha * x + beta when every monomial has x-degree <= 1
        alpha = sum(c * self.partner ** j for i, j, c in self.reward.poly if i == 1)
        beta = sum(c * self.partner ** j for i, j, c in self.reward.poly if i == 0)
        return alpha, beta

    def demand(self, level: float, strict: bool) -> float:
        """Largest x whose marginal still reaches ``level`` (concave terms only)."""
        if level < 0 or (level == 0 and not strict):
            return math.inf
        r, y = self.reward, self.partner
        if self.linear:
            slope = r.partial_right(0.0, y)
            reaches = slope > level if strict else slope >= level
            return math.inf if reaches else 0.0
        if isinstance(r, MinEffort):
            return min(y, r.h.demand(level, strict))
        if isinstance(r, MaxEffort):
            return r.h.demand(level, strict)
        alpha, beta = self._affine()
        if alpha <= 0:
            return 0.0
        inner = r.outer.demand(level / alpha, strict)
        if math.isinf(inner):
            return inner
        return max(0.0, (inner - beta) / alpha)

    def levels(self) -> Tuple[float, ...]:
        r = self.reward
        if self.linear:
            return (r.partial_right(0.0, self.partner),)
        if isinstance(r, PolyConvex):
            alpha, _ = self._affine()
            return tuple(alpha * level for level in r.outer.levels())
        return r.scalar.levels()


def node_terms(
    game: Game, profile: Profile, node: str, partners: Optional[Mapping[str, float]] = None
) -> List[Term]:
    """One Term per incident edge, in edge order; ``partners`` overrides y_e."""
    partners = partners or {}
    terms = []
    for edge in game.incident(node):
        other = edge.other(node)
        y = partners.get(edge.id, profile.effort(other, edge.id))
        terms.append(Term(edge.id, edge.reward, y))
    return terms


def _total(terms: Iterable[Term], allocation: Mapping[str, float]) -> float:
    return sum(t.value(allocation.get(t.edge, 0.0)) for t in terms)


def utility_with(game: Game, profile: Profile, node: str, allocation: Mapping[str, float]) -> float:
    """w_v when v switches to ``allocation`` and everybody else stays."""
    return node_utility(game, profile.with_strategy(node, allocation), node)


def lattice_size(units: int, parts: int) -> int:
    """Number of nonnegative integer vectors of length ``parts`` with sum <= units."""
    return math.comb(units + parts, parts)


def lattice_points(units: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """Those vectors in lexicographic order."""
    if parts == 0:
        yield ()
        return
    for first in range(units + 1):
        for rest in lattice_points(units - first, parts - 1):
            yield (first,) + rest


def water_fill(
    terms: Sequence[Term],
    budget: float,
    bisection_tol: float = 1e-10,
    caps: Optional[Mapping[str, float]] = None,
    order: Optional[Sequence[str]] = None,
) -> Tuple[Dict[str, float], float]:
    """
    Spread ``budget`` over concave terms so that marginals equalize.

    Args:
        terms: concave terms.
        budget: effort to place.
        bisection_tol: relative width at which the level search stops.
        caps: extra per-edge upper bounds.
        order: edge ids that receive tied remainder first.

    Returns:
        (allocation, level) where level is the common marginal; level 0
        means every useful unit is placed and the rest stays unspent.
    """
    caps = caps or {}

    def demand(t: Term, level: float, strict: bool) -> float:
        return min(caps.get(t.edge, math.inf), t.demand(level, strict))

    def total(level: float, strict: bool) -> float:
        return sum(demand(t, level, strict) for t in terms)

    if budget <= 0 or not terms:
        return {}, 0.0
    if total(0.0, True) <= budget:
        return {t.edge: demand(t, 0.0, True) for t in terms}, 0.0

    level = lower = None
    candidates = sorted({lv for t in terms for lv in t.levels() if lv > 0}, reverse=True)
    for lv in candidates:
        if total(lv, True) <= budget <= total(lv, False):
            level = lower = lv
            break
    if level is None:
        lower, upper = 0.0, 1.0
        for _ in range(MAX_DOUBLINGS):
            if total(upper, True) <= budget:
                break
            lower, upper = upper, upper * 2.0
        else:
            raise SolverInternalError("water level search did not bracket the budget")
        while upper - lower > bisection_tol * max(1.0, upper):
            mid = (lower + upper) / 2.0
            if total(mid, True) > budget:
                lower = mid
            else:
                upper = mid
        level = upper

    allocation = {t.edge: demand(t, level, True) for t in terms}
    remainder = budget - sum(allocation.values())
    rank = {e: i for i, e in enumerate(order or ())}
    ordered = sorted(terms, key=lambda t: rank.get(t.edge, len(rank)))
    for bound in (level, lower):
        for t in ordered:
            if remainder <= 0:
                break
            room = demand(t, bound, False) - allocation[t.edge]
            if room > 0:
                give = min(room, remainder)
                allocation[t.edge] += give
                remainder -= give
    return {e: x for e, x in allocation.items() if x > 0}, level


def _vertex(terms: Sequence[Term], budget: float, tol: float):
    base = _total(terms, {})
    if budget <= 0 or not terms:
        return {}, base, ()
    scores = [(base - t.value(0.0) + t.value(budget), t.edge) for t in terms]
    best_value = max(v for v, _ in scores)
    winners = [e for v, e in scores if v >= best_value - tol]
    return {winners[0]: budget}, best_value, tuple(winners[1:])


def _spread(terms: Sequence[Term], budget: float, tol: float):
    capped = [t for t in terms if 0 < t.cap < budget]
    best_alloc: Dict[str, float] = {}
    best_value = _total(terms, {})
    for size in range(len(capped) + 1):
        for chosen in itertools.combinations(capped, size):
            used = sum(t.cap for t in chosen)
            if used > budget:
                continue
            base = {t.edge: t.cap for t in chosen}
            options = [base]
            left = budget - used
            if left > 0:
                for t in terms:
                    if t.edge not in base and t.cap > 0:
                        options.append({**base, t.edge: min(left, t.cap)})
            for alloc in options:
                value = _total(terms, alloc)
                if value > best_value + tol:
                    best_alloc, best_value = alloc, value
    return best_alloc, best_value


def _grid(terms: Sequence[Term], budget: float, resolution: int, cap: int):
    best_alloc: Dict[str, float] = {}
    best_value = _total(terms, {})
    if budget <= 0 or not terms:
        return best_alloc, best_value
    while resolution > 1 and lattice_size(resolution, len(terms)) > cap:
        resolution //= 2
    step = budget / resolution
    for point in lattice_points(resolution, len(terms)):
        alloc = {t.edge: k * step for t, k in zip(terms, point) if k}
        value = _total(terms, alloc)
        if value > best_value:
            best_alloc, best_value = alloc, value
    return best_alloc, best_value


def optimize_terms(
    terms: Sequence[Term], budget: float, settings: Settings
) -> Tuple[Dict[str, float], float, BRKind, Tuple[str, ...]]:
    """Best allocation of ``budget`` over ``terms`` and the method used."""
    shared = frozenset(_ALL)
    for t in terms:
        shared &= t.capabilities
    if CONVEX in shared:
        alloc, value, tied = _vertex(terms, budget, settings.tol)
        return alloc, value, BRKind.SINGLE_EDGE_VERTEX, tied
    if CONCAVE in shared:
        alloc, _ = water_fill(terms, budget, settings.bisection_tol)
        return alloc, _total(terms, alloc), BRKind.WATER_FILLING, ()
    if CAPPED in shared and sum(1 for t in terms if 0 < t.cap < budget) <= MAX_SPREAD_EDGES:
        alloc, value = _spread(terms, budget, settings.tol)
        return alloc, value, BRKind.ARGMAX_SPREAD, ()
    alloc, value = _grid(terms, budget, settings.grid, settings.pair_cap)
    return alloc, value, BRKind.GRID_APPROXIMATE, ()


def best_response(
    game: Game, profile: Profile, node: str, settings: Optional[Settings] = None
) -> BestResponse:
    """
    Best allocation of ``node``'s budget against the others in ``profile``.

    The returned value is never below the node's current utility: when the
    chosen method cannot beat the current strategy, that strategy is kept.
    """
    settings = settings or Settings()
    terms = node_terms(game, profile, node)
    if not terms:
        return BestResponse(node, {}, 0.0, BRKind.SINGLE_EDGE_VERTEX)
    alloc, _, kind, tied = optimize_terms(terms, game.budget(node), settings)
    value = utility_with(game, profile, node, alloc)
    current = node_utility(game, profile, node)
    if value < current:
        alloc, value = profile.strategy(node), current
    return BestResponse(node, alloc, value, kind, tied)


def best_other_value(
    game: Game,
    profile: Profile,
    node: str,
    budget: float,
    excluded_edge: str,
    settings: Optional[Settings] = None,
) -> float:
    """Best utility ``node`` draws from edges other than ``excluded_edge`` with ``budget``."""
    settings = settings or Settings()
    terms = [t for t in node_terms(game, profile, node) if t.edge != excluded_edge]
    if not terms:
        return 0.0
    _, value, _, _ = optimize_terms(terms, max(budget, 0.0), settings)
    return value


def controlled_best_response(
    game: Game,
    profile: Profile,
    node: str,
    controlled: Iterable[str],
    settings: Optional[Settings] = None,
) -> BestResponse:
    """
    Water-filling for ``node`` when the nodes in ``controlled`` match it.

    Edges to controlled nodes are capped only by the neighbour's budget;
    edges to the other (awake) nodes are capped at the neighbour's current
    contribution. Ties go to awake edges first and unspent budget tops
    awake edges up to their caps, so awake contributions are matched
    exactly wherever possible.

    Raises:
        UnsupportedClassError: the game is not a concave min-effort game.
    """
    settings = settings or Settings()
    if not game.all_rewards(is_min_concave):
        raise UnsupportedClassError("controlled best response needs concave min-effort rewards")
    controlled = set(controlled)
    partners: Dict[str, float] = {}
    awake: List[str] = []
    for edge in game.incident(node):
        other = edge.other(node)
        if other in controlled:
            partners[edge.id] = game.budget(other)
        else:
            awake.append(edge.id)
    terms = node_terms(game, profile, node, partners)
    budget = game.budget(node)
    alloc, _ = water_fill(terms, budget, settings.bisection_tol, order=awake)
    left = budget - sum(alloc.values())
    for t in terms:
        if left <= 0:
            break
        if t.edge in awake and alloc.get(t.edge, 0.0) < t.partner:
            give = min(left, t.partner - alloc.get(t.edge, 0.0))
            alloc[t.edge] = alloc.get(t.edge, 0.0) + give
            left -= give
    value = _total(terms, alloc)
    return BestResponse(node, alloc, value, BRKind.WATER_FILLING)


@dataclass(frozen=True)
class MatchedResponse:
    """
    A sleeping node's best response that meets every awake request exactly.

    ``low`` and ``high`` bound each sleeping edge over the responses at the
    same water level: any split of the same total inside the bounds is
    just as good for the node.
    """

    node: str
    requests: Dict[str, float]
    sleeping: Dict[str, float]
    low: Dict[str, float]
    high: Dict[str, float]
    score: float

    @property
    def allocation(self) -> Dict[str, float]:
        return {**self.requests, **{e: x for e, x in self.sleeping.items() if x > 0}}

    @property
    def spent(self) -> float:
        return sum(self.sleeping.values())

    def reach(self, edge: str) -> float:
        """Most effort any equally good response puts on a sleeping edge."""
        others = sum(x for e, x in self.low.items() if e != edge)
        return max(self.sleeping[edge], min(self.high[edge], self.spent - others))


def matched_best_response(
    game: Game,
    profile: Profile,
    node: str,
    controlled: Iterable[str],
    settings: Optional[Settings] = None,
) -> MatchedResponse:
    """
    Best response of ``node`` when it controls the nodes in ``controlled``
    and must match every other neighbour's effort exactly.

    The requests of the other neighbours are paid first; what is left is
    water-filled over the edges to controlled nodes, each capped at that
    neighbour's budget. The score is the smallest left-derivative over the
    positive controlled edges, +inf when there is none.

    Raises:
        UnsupportedClassError: the game is not a concave min-effort game.
        SolverInternalError: the requests exceed the node's budget.
    """
    settings = settings or Settings()
    if not game.all_rewards(is_min_concave):
        raise UnsupportedClassError("matched best response needs concave min-effort rewards")
    controlled = set(controlled)
    requests: Dict[str, float] = {}
    partners: Dict[str, float] = {}
    for edge in game.incident(node):
        other = edge.other(node)
        if other in controlled:
            partners[edge.id] = game.budget(other)
        elif profile.effort(other, edge.id) > 0:
            requests[edge.id] = profile.effort(other, edge.id)
    available = game.budget(node) - sum(requests.values())
    if available < -settings.tol:
        raise SolverInternalError(
            f"node {node} is asked for {sum(requests.values()):.12g}, budget {game.budget(node):.12g}"
        )
    terms = [t for t in node_terms(game, profile, node, partners) if t.edge in partners]
    alloc, level = water_fill(terms, max(available, 0.0), settings.bisection_tol)
    sleeping = {t.edge: alloc.get(t.edge, 0.0) for t in terms}
    low, high = dict(sleeping), dict(sleeping)
    if level > 0:
        for t in terms:
            x = sleeping[t.edge]
            low[t.edge] = min(x, t.demand(level, True))
            high[t.edge] = max(x, t.demand(level, False))
    score = min_left_derivative(game, sleeping, partners, default=math.inf)
    return MatchedResponse(node, requests, sleeping, low, high, score)


def min_left_derivative(
    game: Game, allocation: Mapping[str, float], edges: Iterable[str], default: float = -1.0
) -> float:
    """
    min h_e^-(x_e) over the listed edges with x_e > 0; ``default`` when none is positive.
    """
    slopes = [
        game.edge(e).reward.scalar.left_derivative(allocation[e])
        for e in edges
        if allocation.get(e, 0.0) > 0
    ]
    return min(slopes) if slopes else default


def removal_loss(
    game: Game,
    profile: Profile,
    node: str,
    amount: float,
    excluded_edge: str,
    settings: Optional[Settings] = None,
) -> float:
    """
    Smallest utility loss from taking ``amount`` off the node's other edges.

    Concave terms: reverse water-filling (keep the best allocation under
    the current efforts as caps). Convex terms: the kept allocation sits at
    a vertex of the box, so every edge is kept or emptied except one.

    Raises:
        InfeasibleProfileError: ``amount`` exceeds the effort on other edges.
    """
    settings = settings or Settings()
    terms = [t for t in node_terms(game, profile, node) if t.edge != excluded_edge]
    placed = {t.edge: profile.effort(node, t.edge) for t in terms}
    available = sum(placed.values())
    if amount > available + settings.tol:
        raise InfeasibleProfileError(
            f"node {node} has {available:.12g} on other edges, cannot remove {amount:.12g}"
        )
    if amount <= 0:
        return 0.0
    keep = max(available - amount, 0.0)
    before = _total(terms, placed)
    if all(CONCAVE in t.capabilities for t in terms):
        alloc, _ = water_fill(terms, keep, settings.bisection_tol, caps=placed)
        return max(before - _total(terms, alloc), 0.0)
    best = 0.0
    positive = [t for t in terms if placed[t.edge] > 0]
    for size in range(len(positive) + 1):
        for kept in itertools.combinations(positive, size):
            used = sum(placed[t.edge] for t in kept)
            if used > keep + settings.tol:
                continue
            alloc = {t.edge: placed[t.edge] for t in kept}
            rest = keep - used
            options = [alloc]
            if rest > settings.tol:
                options = [
                    {**alloc, t.edge: rest}
                    for t in positive
                    if t.edge not in alloc and placed[t.edge] >= rest
                ]
            for option in options:
                best = max(best, _total(terms, option))
    return max(before - best, 0.0)
