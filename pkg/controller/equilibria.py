"""
controller/equilibria.py
------------------------
Stability verification, approximation factors, tightness labels and
slack-edge elimination.

Bilateral deviations are searched per edge in edge order, with the method
chosen from the rewards around the pair:

- weighted sums everywhere   closed-form rate test
- max-effort everywhere      the Nash verdict is final
- coordinate-convex          both-full and single-edge vertex pairs
- min-effort everywhere      scan of the joint target on the shared edge
- anything else              joint lattice at resolution g

Every reported witness is replayed before it is returned.
"""

import itertools
import math
from typing import Dict, Iterator, List, Optional, Tuple

from controller.allocation import (
    Term,
    best_response,
    lattice_points,
    lattice_size,
    node_terms,
    optimize_terms,
)
from model.da.config import Settings
from model.entity.game import Edge, Game
from model.entity.profile import Profile
from model.entity.results import (
    BRKind,
    Deviation,
    EdgeTightness,
    Method,
    Tightness,
    Verdict,
    VerifyReport,
)
from model.entity.reward import MaxEffort, MinEffort, WeightedSum
from model.entity.welfare import node_utility, social_welfare
from model.tools.errors import SolverInternalError, StabilityRefused, UnsupportedClassError
from model.tools.logger import Logger

SCAN_POINTS = 64
REFINE_STEPS = 60
MAX_SUBSET_EDGES = 10

Strategy = Dict[str, float]


def make_deviation(game: Game, profile: Profile, strategies: Dict[str, Strategy]) -> Deviation:
    """Evaluate replacement strategies for one or two nodes."""
    nodes = tuple(strategies)
    after_profile = profile.with_strategies(strategies)
    return Deviation(
        nodes=nodes,
        strategies={v: dict(s) for v, s in strategies.items()},
        before={v: node_utility(game, profile, v) for v in nodes},
        after={v: node_utility(game, after_profile, v) for v in nodes},
    )


def _replayed(game: Game, profile: Profile, deviation: Deviation, tol: float) -> bool:
    return make_deviation(game, profile, deviation.strategies).improving(tol)


def verify_nash(game: Game, profile: Profile, settings: Optional[Settings] = None) -> VerifyReport:
    """
    Stable iff no best response improves its node by more than tol.

    The witness is the node with the largest gain. Lattice best responses
    only support StableAtResolution.
    """
    settings = settings or Settings()
    profile.check_feasible(game, settings.tol)
    witness: Optional[Deviation] = None
    approximate = False
    for node in game.node_ids:
        br = best_response(game, profile, node, settings)
        approximate |= br.kind == BRKind.GRID_APPROXIMATE
        deviation = make_deviation(game, profile, {node: br.allocation})
        if deviation.improving(settings.tol):
            if witness is None or deviation.min_gain > witness.min_gain:
                witness = deviation
    if witness is not None:
        method = Method.GRID if approximate else Method.EXACT
        return VerifyReport(Verdict.UNILATERAL, method, witness)
    if approximate:
        return VerifyReport(Verdict.STABLE_AT_RESOLUTION, Method.GRID, resolution=settings.grid)
    return VerifyReport(Verdict.STABLE, Method.EXACT)


def _pair_rewards(game: Game, edge: Edge):
    return [e.reward for v in edge.endpoints for e in game.incident(v)]


def edge_method(game: Game, edge: Edge) -> str:
    """Which bilateral search covers ``edge``: sum, max, convex, min or grid."""
    rewards = _pair_rewards(game, edge)
    if all(isinstance(r, WeightedSum) for r in rewards):
        return "sum"
    if all(isinstance(r, MaxEffort) for r in rewards):
        return "max"
    if all(r.in_c for r in rewards):
        return "convex"
    if all(isinstance(r, MinEffort) for r in rewards):
        return "min"
    return "grid"


def _movable(game: Game, profile: Profile, node: str, edge: Edge) -> Tuple[float, float, List[str]]:
    """
    (rate, amount, sources): the cheapest per-unit loss at which ``node``
    can free effort for ``edge``, how much is available at that rate, and
    the edges it comes from. Unspent budget is free.
    """
    unspent = game.budget(node) - profile.spent(node)
    if unspent > 0:
        return 0.0, unspent, []
    positive = [
        e for e in game.incident(node) if e.id != edge.id and profile.effort(node, e.id) > 0
    ]
    if not positive:
        return math.inf, 0.0, []
    rate = min(e.reward.c for e in positive)
    sources = [e.id for e in positive if e.reward.c == rate]
    return rate, sum(profile.effort(node, e) for e in sources), sources


def _shift(profile: Profile, node: str, edge: str, sources: List[str], amount: float) -> Strategy:
    strategy = profile.strategy(node)
    strategy[edge] = strategy.get(edge, 0.0) + amount
    left = amount
    for source in sources:
        take = min(left, strategy.get(source, 0.0))
        strategy[source] = strategy.get(source, 0.0) - take
        left -= take
    return strategy


def _sum_deviation(game: Game, profile: Profile, edge: Edge, tol: float) -> Optional[Deviation]:
    u, v = edge.endpoints
    c = edge.reward.c
    rate_u, amount_u, sources_u = _movable(game, profile, u, edge)
    rate_v, amount_v, sources_v = _movable(game, profile, v, edge)
    a, b = rate_u - c, rate_v - c
    if amount_u > 0 and amount_v > 0:
        if not ((a <= 0 and b <= 0) or a * b < c * c):
            return None
        # eps_v / eps_u must lie in (a / c, c / b)
        low = a / c
        high = c / b if b > 0 else math.inf
        ratio = (max(low, 0.0) + high) / 2.0 if math.isfinite(high) else max(low, 0.0) + 1.0
        eps_u = min(amount_u, amount_v / ratio) if ratio > 0 else amount_u
        eps_v = ratio * eps_u
    elif amount_v > 0 and b < 0:
        eps_u, eps_v = 0.0, amount_v
    elif amount_u > 0 and a < 0:
        eps_u, eps_v = amount_u, 0.0
    else:
        return None
    strategies = {}
    if eps_u > 0:
        strategies[u] = _shift(profile, u, edge.id, sources_u, eps_u)
    if eps_v > 0:
        strategies[v] = _shift(profile, v, edge.id, sources_v, eps_v)
    strategies.setdefault(u, profile.strategy(u))
    strategies.setdefault(v, profile.strategy(v))
    deviation = make_deviation(game, profile, {u: strategies[u], v: strategies[v]})
    return deviation if deviation.improving(tol) else None


def _vertex_strategies(game: Game, node: str) -> List[Strategy]:
    budget = game.budget(node)
    if budget <= 0:
        return [{}]
    return [{e.id: budget} for e in game.incident(node)]


def _convex_deviation(game: Game, profile: Profile, edge: Edge, tol: float) -> Optional[Deviation]:
    u, v = edge.endpoints
    best: Optional[Deviation] = None
    for su, sv in itertools.product(_vertex_strategies(game, u), _vertex_strategies(game, v)):
        deviation = make_deviation(game, profile, {u: su, v: sv})
        if deviation.improving(tol) and (best is None or deviation.min_gain > best.min_gain):
            best = deviation
    return best


def _subset_sums(values: List[float]) -> List[float]:
    values = values[:MAX_SUBSET_EDGES]
    sums = {0.0}
    for x in values:
        sums |= {s + x for s in sums}
    return sorted(sums)


class _MinScan:
    """Both endpoints put t on the shared edge and re-optimize the rest."""

    def __init__(self, game: Game, profile: Profile, edge: Edge, settings: Settings) -> None:
        self.game, self.profile, self.edge, self.settings = game, profile, edge, settings
        self.h = edge.reward.h
        self.u, self.v = edge.endpoints
        self.terms = {
            x: [t for t in node_terms(game, profile, x) if t.edge != edge.id] for x in edge.endpoints
        }
        self.current = {x: node_utility(game, profile, x) for x in edge.endpoints}
        self.span = min(game.budget(self.u), game.budget(self.v))
        self._cache: Dict[float, Tuple[Dict[str, Strategy], Dict[str, float]]] = {}

    def side(self, t: float) -> Tuple[Dict[str, Strategy], Dict[str, float]]:
        if t not in self._cache:
            strategies, gains = {}, {}
            for x in self.edge.endpoints:
                rest = max(self.game.budget(x) - t, 0.0)
                alloc, value, _, _ = optimize_terms(self.terms[x], rest, self.settings)
                strategies[x] = {**alloc, self.edge.id: t} if t > 0 else dict(alloc)
                gains[x] = self.h.value(t) + value - self.current[x]
            self._cache[t] = (strategies, gains)
        return self._cache[t]

    def score(self, t: float) -> float:
        return min(self.side(t)[1].values())

    def candidates(self) -> List[float]:
        span = self.span
        points = {0.0, span}
        points.update(k for k in self.h.kinks() if 0 < k < span)
        points.update(self.profile.effort(x, self.edge.id) for x in self.edge.endpoints)
        for x in self.edge.endpoints:
            caps = [t.partner for t in self.terms[x] if t.partner > 0]
            budget = self.game.budget(x)
            points.update(budget - s for s in _subset_sums(caps))
        points.update(span * k / SCAN_POINTS for k in range(SCAN_POINTS + 1))
        return sorted(p for p in points if 0 <= p <= span)

    def best(self) -> Tuple[float, float]:
        if self.span <= 0:
            return 0.0, self.score(0.0)
        best_t = max(self.candidates(), key=lambda t: (self.score(t), -t))
        low = max(0.0, best_t - self.span / SCAN_POINTS)
        high = min(self.span, best_t + self.span / SCAN_POINTS)
        for _ in range(REFINE_STEPS):
            m1, m2 = low + (high - low) / 3.0, high - (high - low) / 3.0
            if self.score(m1) < self.score(m2):
                low = m1
            else:
                high = m2
        refined = (low + high) / 2.0
        if self.score(refined) > self.score(best_t):
            best_t = refined
        return best_t, self.score(best_t)


def _min_deviation(
    game: Game, profile: Profile, edge: Edge, settings: Settings
) -> Optional[Deviation]:
    scan = _MinScan(game, profile, edge, settings)
    t, score = scan.best()
    if score <= settings.tol:
        return None
    deviation = make_deviation(game, profile, scan.side(t)[0])
    return deviation if deviation.improving(settings.tol) else None


def pair_resolution(game: Game, edge: Edge, resolution: int, cap: int) -> int:
    """Largest resolution <= ``resolution`` (halving) whose joint lattice fits ``cap``."""
    du, dv = game.degree(edge.u), game.degree(edge.v)
    while resolution > 1 and lattice_size(resolution, du) * lattice_size(resolution, dv) > cap:
        resolution //= 2
    return resolution


def _lattice_table(
    game: Game, profile: Profile, node: str, edge: Edge, resolution: int
) -> List[Tuple[Strategy, float, float]]:
    """(strategy, value from the other edges, effort on ``edge``) per lattice point."""
    terms: List[Term] = node_terms(game, profile, node)
    budget = game.budget(node)
    if budget <= 0:
        other = sum(t.value(0.0) for t in terms if t.edge != edge.id)
        return [({}, other, 0.0)]
    step = budget / resolution
    table = []
    for point in lattice_points(resolution, len(terms)):
        strategy = {t.edge: k * step for t, k in zip(terms, point) if k}
        other = sum(t.value(strategy.get(t.edge, 0.0)) for t in terms if t.edge != edge.id)
        table.append((strategy, other, strategy.get(edge.id, 0.0)))
    return table


def grid_pairs(
    game: Game, profile: Profile, edge: Edge, resolution: int
) -> Iterator[Tuple[Strategy, Strategy, float, float]]:
    """Every joint lattice move of the pair with both resulting utilities."""
    u, v = edge.endpoints
    f = edge.reward
    table_u = _lattice_table(game, profile, u, edge, resolution)
    table_v = _lattice_table(game, profile, v, edge, resolution)
    for su, other_u, xu in table_u:
        for sv, other_v, xv in table_v:
            shared = f.value(xu, xv)
            yield su, sv, other_u + shared, other_v + shared


def _grid_deviation(
    game: Game, profile: Profile, edge: Edge, resolution: int, tol: float
) -> Optional[Deviation]:
    u, v = edge.endpoints
    before_u, before_v = node_utility(game, profile, u), node_utility(game, profile, v)
    best, best_gain = None, tol
    for su, sv, after_u, after_v in grid_pairs(game, profile, edge, resolution):
        gain = min(after_u - before_u, after_v - before_v)
        if gain > best_gain:
            best, best_gain = (su, sv), gain
    if best is None:
        return None
    deviation = make_deviation(game, profile, {u: best[0], v: best[1]})
    return deviation if deviation.improving(tol) else None


def search_edge(
    game: Game, profile: Profile, edge: Edge, settings: Settings
) -> Tuple[Optional[Deviation], Method, Optional[int]]:
    """Improving bilateral deviation across ``edge``, the method and the grid used."""
    method = edge_method(game, edge)
    if method == "sum":
        return _sum_deviation(game, profile, edge, settings.tol), Method.EXACT, None
    if method == "max":
        return None, Method.EXACT, None
    if method == "convex":
        return _convex_deviation(game, profile, edge, settings.tol), Method.EXACT, None
    if method == "min":
        return _min_deviation(game, profile, edge, settings), Method.SCAN, None
    resolution = pair_resolution(game, edge, settings.grid, settings.pair_cap)
    deviation = _grid_deviation(game, profile, edge, resolution, settings.tol)
    return deviation, Method.GRID, resolution


def verify_pairwise(
    game: Game, profile: Profile, settings: Optional[Settings] = None
) -> VerifyReport:
    """
    Nash first, then an improving bilateral deviation per edge in edge order.

    Returns:
        VerifyReport: the first deviation found, or Stable; lattice searches
        only support StableAtResolution.
    """
    settings = settings or Settings()
    nash = verify_nash(game, profile, settings)
    if not nash.stable:
        return nash
    notes: List[str] = []
    used = {nash.method}
    resolution = nash.resolution
    for edge in game.sorted_edges():
        deviation, method, grid = search_edge(game, profile, edge, settings)
        used.add(method)
        if grid is not None:
            resolution = grid if resolution is None else min(resolution, grid)
            if grid < settings.grid:
                notes.append(f"edge {edge.id} searched at resolution {grid}")
        if deviation is not None:
            if not _replayed(game, profile, deviation, settings.tol):
                raise SolverInternalError(f"witness on edge {edge.id} does not replay")
            return VerifyReport(Verdict.BILATERAL, method, deviation, grid, tuple(notes))
    if Method.GRID in used:
        return VerifyReport(
            Verdict.STABLE_AT_RESOLUTION, Method.GRID, resolution=resolution, notes=tuple(notes)
        )
    method = Method.SCAN if Method.SCAN in used else Method.EXACT
    return VerifyReport(Verdict.STABLE, method, notes=tuple(notes))


def _ratio(before: float, after: float) -> float:
    if before <= 0:
        return math.inf if after > 0 else 1.0
    return after / before


def approximation_factor(
    game: Game, profile: Profile, settings: Optional[Settings] = None
) -> float:
    """
    Largest factor by which a unilateral or bilateral move multiplies the
    movers' utilities (the smaller of the two for pairs); 1 when nothing
    improves, math.inf when a zero utility becomes positive.
    """
    settings = settings or Settings()
    profile.check_feasible(game, settings.tol)
    factor = 1.0
    for node in game.node_ids:
        br = best_response(game, profile, node, settings)
        if br.value > node_utility(game, profile, node) + settings.tol:
            factor = max(factor, _ratio(node_utility(game, profile, node), br.value))
    for edge in game.sorted_edges():
        u, v = edge.endpoints
        before_u, before_v = node_utility(game, profile, u), node_utility(game, profile, v)

        def consider(after_u: float, after_v: float) -> None:
            nonlocal factor
            if after_u > before_u + settings.tol and after_v > before_v + settings.tol:
                factor = max(factor, min(_ratio(before_u, after_u), _ratio(before_v, after_v)))

        for su, sv in itertools.product(_vertex_strategies(game, u), _vertex_strategies(game, v)):
            deviation = make_deviation(game, profile, {u: su, v: sv})
            consider(deviation.after[u], deviation.after[v])
        if isinstance(edge.reward, MinEffort):
            scan = _MinScan(game, profile, edge, settings)
            for t in scan.candidates():
                gains = scan.side(t)[1]
                consider(before_u + gains[u], before_v + gains[v])
        resolution = pair_resolution(game, edge, settings.grid, settings.pair_cap)
        for _, _, after_u, after_v in grid_pairs(game, profile, edge, resolution):
            consider(after_u, after_v)
    return factor


def classify_tightness(game: Game, profile: Profile, tol: float = 1e-9) -> EdgeTightness:
    """tight: both efforts in {0, B}; half-slack: one interior; slack: both interior."""
    labels = {}
    for edge in game.sorted_edges():
        interior = sum(1 for x in edge.endpoints if _interior(game, profile, x, edge.id, tol))
        labels[edge.id] = (Tightness.TIGHT, Tightness.HALF_SLACK, Tightness.SLACK)[interior]
    return EdgeTightness(labels)


def _interior(game: Game, profile: Profile, node: str, edge: str, tol: float) -> bool:
    x = profile.effort(node, edge)
    return tol < x < game.budget(node) - tol


def _interior_count(game: Game, profile: Profile, tol: float) -> int:
    return sum(
        _interior(game, profile, x, e.id, tol) for e in game.edges for x in e.endpoints
    )


def _slack_moves(game: Game, profile: Profile, edge: Edge) -> Iterator[Strategy]:
    """Shift effort of an endpoint between ``edge`` and another source, fully."""
    for node in edge.endpoints:
        strategy = profile.strategy(node)
        on_edge = strategy.get(edge.id, 0.0)
        unspent = game.budget(node) - profile.spent(node)
        sources: List[Optional[str]] = [
            e.id for e in game.incident(node) if e.id != edge.id and strategy.get(e.id, 0.0) > 0
        ]
        if unspent > 0:
            sources.append(None)
        for source in sources:
            held = unspent if source is None else strategy[source]
            toward = dict(strategy)
            toward[edge.id] = on_edge + held
            if source is not None:
                toward[source] = 0.0
            yield {node: toward}
            away = dict(strategy)
            away[edge.id] = 0.0
            if source is not None:
                away[source] = held + on_edge
            yield {node: away}


def eliminate_slack(
    game: Game, profile: Profile, settings: Optional[Settings] = None
) -> Profile:
    """
    Remove slack edges from a pairwise-stable profile without losing welfare.

    Each step takes the first slack edge and moves one endpoint's effort
    fully between that edge and another positive edge (or unspent budget),
    keeping the move that loses no welfare and lowers the number of
    interior efforts.

    Raises:
        UnsupportedClassError: a reward outside C or with negative mixed partials.
        StabilityRefused: the input is not pairwise stable.
        SolverInternalError: no welfare-preserving move makes progress.
    """
    settings = settings or Settings()
    tol = settings.tol
    if not game.all_rewards(lambda r: r.in_c and r.mixed_partials_nonnegative):
        raise UnsupportedClassError(
            "slack elimination needs coordinate-convex rewards with nonnegative mixed partials"
        )
    report = verify_pairwise(game, profile, settings)
    if not report.stable:
        raise StabilityRefused("slack elimination needs a pairwise-stable profile", report.verdict.value)
    current = profile
    for _ in range(2 * game.n * game.m + 1):
        slack = classify_tightness(game, current, tol).edges_with(Tightness.SLACK)
        if not slack:
            break
        edge = game.edge(slack[0])
        welfare = social_welfare(game, current, tol)
        count = _interior_count(game, current, tol)
        floor = -tol * (1.0 + abs(welfare))
        best, best_delta = None, floor
        for move in _slack_moves(game, current, edge):
            candidate = current.with_strategies(move)
            if _interior_count(game, candidate, tol) >= count:
                continue
            delta = social_welfare(game, candidate, tol) - welfare
            if delta >= floor and (best is None or delta > best_delta):
                best, best_delta = candidate, delta
        if best is None:
            raise SolverInternalError(f"slack edge {edge.id} admits no welfare-preserving move")
        current = best
    else:
        raise SolverInternalError("slack elimination did not terminate")
    final = verify_pairwise(game, current, settings)
    if not final.stable:
        raise SolverInternalError("slack elimination left an unstable profile")
    Logger.info(f"Slack elimination finished: {final.verdict.value}.")
    return current
