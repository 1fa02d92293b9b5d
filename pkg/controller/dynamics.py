"""
controller/dynamics.py
----------------------
Random and concurrent best-response dynamics.

A unit is a single node (unilateral best response) or the two endpoints
of an edge (bilateral best response). A trajectory stops when every unit
has been checked idle against the current profile, when a profile is
revisited, or when the round budget runs out. Stalls are certified with
verify_pairwise.
"""

import math
from typing import Callable, Dict, List, Optional, Set, Tuple

from controller.allocation import (
    best_response,
    controlled_best_response,
    node_terms,
    optimize_terms,
)
from controller.equilibria import make_deviation, search_edge, verify_pairwise
from model.da.codec import game_hash
from model.da.config import Settings
from model.entity.game import Edge, Game
from model.entity.profile import Profile
from model.entity.results import (
    Deviation,
    RoundRecord,
    TerminalKind,
    TerminalVerdict,
    Trajectory,
    Verdict,
)
from model.entity.reward import MinEffort, is_min_concave
from model.entity.welfare import edge_effort, node_utility
from model.tools.errors import UnsupportedClassError
from model.tools.logger import Logger
from model.tools.rng import SeededRNG

UNILATERAL = "unilateral-BR"
BILATERAL = "bilateral-BR"
IDLE = "none"

Unit = Tuple[str, ...]
Observer = Callable[[int, Profile], None]


def _virtual_response(game: Game, profile: Profile, node: str, edge: Edge, settings: Settings):
    """Best response of ``node`` if its partner put nothing on ``edge``; ties go to ``edge``."""
    terms = node_terms(game, profile, node, {edge.id: 0.0})
    terms.sort(key=lambda t: t.edge != edge.id)
    return optimize_terms(terms, game.budget(node), settings)[0]


def _three_form(game: Game, profile: Profile, edge: Edge, settings: Settings) -> Optional[Deviation]:
    """
    Bilateral best response of a pair on strictly coordinate-convex rewards.

    Best responses sit on single-edge vertices, so the pair either meets on
    the shared edge with full budgets, or one of them stays on it, or both
    look elsewhere. The last two come from the virtual best responses
    against a partner that puts nothing on the shared edge. Meeting wins
    when it is a mutual best response that pays both at least as much.
    """
    u, v = edge.endpoints
    virtual = {x: _virtual_response(game, profile, x, edge, settings) for x in (u, v)}
    together = {x: ({edge.id: game.budget(x)} if game.budget(x) > 0 else {}) for x in (u, v)}
    found: List[Deviation] = []
    for strategies in (together, virtual):
        deviation = make_deviation(game, profile, strategies)
        if not deviation.improving(settings.tol):
            continue
        after = profile.with_strategies(strategies)
        if all(
            best_response(game, after, x, settings).value <= deviation.after[x] + settings.tol
            for x in (u, v)
        ):
            found.append(deviation)
    if len(found) == 2:
        meet, apart = found
        if all(meet.after[x] >= apart.after[x] - settings.tol for x in (u, v)):
            return meet
        return apart
    return found[0] if found else None


def _fix_lower(game: Game, profile: Profile, edge: Edge, settings: Settings) -> Optional[Deviation]:
    """
    Concave min-effort pair: each side best-responds as if the other matched
    it on the shared edge; the side asking for less keeps that answer and
    the other best-responds to it.
    """
    u, v = edge.endpoints
    wishes = {
        x: controlled_best_response(game, profile, x, {edge.other(x)}, settings).allocation
        for x in (u, v)
    }
    lower = u if wishes[u].get(edge.id, 0.0) <= wishes[v].get(edge.id, 0.0) else v
    upper = edge.other(lower)
    fixed = profile.with_strategy(lower, wishes[lower])
    answer = best_response(game, fixed, upper, settings).allocation
    deviation = make_deviation(game, profile, {lower: wishes[lower], upper: answer})
    return deviation if deviation.improving(settings.tol) else None


def bilateral_best_response(
    game: Game, profile: Profile, u: str, v: str, settings: Optional[Settings] = None
) -> Optional[Deviation]:
    """
    Joint move of an adjacent pair that strictly improves both, or None.

    Coordinate-convex rewards (C0 or strictly convex) use the mutual-best-response
    forms, concave min-effort games the fix-the-lower-side rule, everything
    else the bilateral search of the verifier (a lattice search where no
    exact method applies).

    Raises:
        GameLookupError: u and v are not adjacent.
    """
    settings = settings or Settings()
    edge = game.require_edge_between(u, v)
    rewards = [e.reward for x in edge.endpoints for e in game.incident(x)]
    if all(r.in_c0 or r.in_c_strict for r in rewards):
        return _three_form(game, profile, edge, settings)
    if game.all_rewards(is_min_concave):
        return _fix_lower(game, profile, edge, settings)
    deviation, _, _ = search_edge(game, profile, edge, settings)
    return deviation


def _units(game: Game) -> List[Unit]:
    return [(v,) for v in game.node_ids] + [e.endpoints for e in game.sorted_edges()]


def _move(game: Game, profile: Profile, unit: Unit, settings: Settings) -> Optional[Deviation]:
    if len(unit) == 2:
        return bilateral_best_response(game, profile, unit[0], unit[1], settings)
    node = unit[0]
    br = best_response(game, profile, node, settings)
    if br.value <= node_utility(game, profile, node) + settings.tol:
        return None
    return make_deviation(game, profile, {node: br.allocation})


def _kind(unit: Unit) -> str:
    return BILATERAL if len(unit) == 2 else UNILATERAL


class _Run:
    """Bookkeeping shared by both schedules."""

    def __init__(
        self,
        game: Game,
        start: Profile,
        mode: str,
        rng: SeededRNG,
        settings: Settings,
        observer: Optional[Observer],
    ) -> None:
        self.game, self.settings, self.observer = game, settings, observer
        self.profile = start.check_feasible(game, settings.tol)
        self.units = _units(game)
        self.idle: Set[Unit] = set()
        self.seen: Dict[str, int] = {self.profile.fingerprint(): 0}
        self.trajectory = Trajectory(rng.seed, mode, rng.algorithm, game_hash(game))

    def move(self, unit: Unit) -> Optional[Deviation]:
        """The unit's move against the current profile; idle units are cached."""
        if unit in self.idle:
            return None
        deviation = _move(self.game, self.profile, unit, self.settings)
        if deviation is None:
            self.idle.add(unit)
        return deviation

    def sweep(self) -> bool:
        """Check every unit; True when none can move."""
        return all(self.move(unit) is None for unit in self.units)

    def record(self, index: int, units, kinds, deltas) -> None:
        self.trajectory.rounds.append(
            RoundRecord(index, tuple(units), tuple(kinds), deltas, self.profile.fingerprint())
        )
        if self.observer is not None:
            self.observer(index, self.profile)

    def apply(self, strategies: Dict[str, Dict[str, float]], index: int) -> Optional[TerminalVerdict]:
        self.profile = self.profile.with_strategies(strategies)
        self.idle.clear()
        fingerprint = self.profile.fingerprint()
        if fingerprint in self.seen:
            first = self.seen[fingerprint]
            return TerminalVerdict(TerminalKind.CYCLE, index, period=index - first, first_visit=first)
        self.seen[fingerprint] = index
        return None

    def finish(self, verdict: TerminalVerdict) -> Trajectory:
        trajectory = self.trajectory
        trajectory.verdict = verdict
        trajectory.final_profile = self.profile
        if verdict.kind == TerminalKind.CONVERGED:
            report = verify_pairwise(self.game, self.profile, self.settings)
            trajectory.verification = report.verdict.value
            trajectory.certified = report.stable
            if not report.stable:
                trajectory.discrepancy = (
                    f"no unit can move but the profile fails verification ({report.verdict.value})"
                )
                Logger.warning(f"Dynamics stalled at round {verdict.round}: {trajectory.discrepancy}.")
            elif report.verdict == Verdict.STABLE_AT_RESOLUTION:
                Logger.info(f"Dynamics converged at round {verdict.round}, stable at resolution.")
            else:
                Logger.info(f"Dynamics converged at round {verdict.round}.")
        else:
            Logger.info(f"Dynamics stopped: {verdict.kind.value} at round {verdict.round}.")
        return trajectory


def run_random(
    game: Game,
    start: Optional[Profile] = None,
    seed: int = 0,
    max_rounds: Optional[int] = None,
    settings: Optional[Settings] = None,
    observer: Optional[Observer] = None,
) -> Trajectory:
    """
    Each round activates one of the n nodes and m edges uniformly at random.

    An activated node plays its best response when it gains more than tol,
    an activated edge its bilateral best response.
    """
    settings = settings or Settings()
    max_rounds = int(settings.max_rounds if max_rounds is None else max_rounds)
    rng = SeededRNG(seed)
    run = _Run(game, start or Profile.zero(), "random", rng, settings, observer)
    if run.sweep():
        return run.finish(TerminalVerdict(TerminalKind.CONVERGED, 0))
    for index in range(1, max_rounds + 1):
        unit = rng.choice(run.units)
        deviation = run.move(unit)
        if deviation is None:
            run.record(index, [unit], [IDLE], {})
            if len(run.idle) == len(run.units):
                return run.finish(TerminalVerdict(TerminalKind.CONVERGED, index))
            continue
        verdict = run.apply(deviation.strategies, index)
        run.record(index, [unit], [_kind(unit)], deviation.gains)
        if verdict is not None:
            return run.finish(verdict)
    return run.finish(TerminalVerdict(TerminalKind.EXHAUSTED, max_rounds))


def _pick_units(game: Game, rng: SeededRNG) -> List[Unit]:
    """
    Every node picks itself with probability 1 / (deg + 1), else a uniform
    neighbour; a pair acts when both picked each other.
    """
    picks = {}
    for v in game.node_ids:
        neighbours = game.neighbors(v)
        k = rng.randint(0, len(neighbours))
        picks[v] = v if k == 0 else neighbours[k - 1]
    units: List[Unit] = []
    for v in game.node_ids:
        w = picks[v]
        if w == v:
            units.append((v,))
        elif picks[w] == v:
            edge = game.require_edge_between(v, w)
            if v == edge.u:
                units.append(edge.endpoints)
    return units


def run_concurrent(
    game: Game,
    start: Optional[Profile] = None,
    seed: int = 0,
    max_rounds: Optional[int] = None,
    settings: Optional[Settings] = None,
    observer: Optional[Observer] = None,
) -> Trajectory:
    """
    Every round all enabled units compute their moves against the
    round-start profile; the moves are applied together. A node belongs to
    at most one unit per round, so moves never overlap.
    """
    settings = settings or Settings()
    max_rounds = int(settings.max_rounds if max_rounds is None else max_rounds)
    rng = SeededRNG(seed)
    run = _Run(game, start or Profile.zero(), "concurrent", rng, settings, observer)
    if run.sweep():
        return run.finish(TerminalVerdict(TerminalKind.CONVERGED, 0))
    for index in range(1, max_rounds + 1):
        units, kinds, deltas, strategies = [], [], {}, {}
        for unit in _pick_units(game, rng):
            deviation = run.move(unit)
            units.append(unit)
            if deviation is None:
                kinds.append(IDLE)
                continue
            kinds.append(_kind(unit))
            deltas.update(deviation.gains)
            strategies.update(deviation.strategies)
        if not strategies:
            run.record(index, units, kinds, deltas)
            if run.sweep():
                return run.finish(TerminalVerdict(TerminalKind.CONVERGED, index))
            continue
        verdict = run.apply(strategies, index)
        run.record(index, units, kinds, deltas)
        if verdict is not None:
            return run.finish(verdict)
    return run.finish(TerminalVerdict(TerminalKind.EXHAUSTED, max_rounds))


def _require_min_effort(game: Game) -> None:
    if not game.all_rewards(lambda r: isinstance(r, MinEffort)):
        raise UnsupportedClassError("edge derivatives are defined for min-effort games")


def edge_derivatives(game: Game, profile: Profile) -> Dict[str, float]:
    """h_e^-(s_e) per edge, with s_e = min(s_u(e), s_v(e))."""
    _require_min_effort(game)
    return {
        e.id: e.reward.scalar.left_derivative(edge_effort(game, profile, e.id))
        for e in game.sorted_edges()
    }


def stabilized_edges(game: Game, profile: Profile, tol: float = 1e-9) -> Tuple[str, ...]:
    """
    Edges peeled off from the top derivative down.

    Among the edges not yet peeled, let h'_max be the largest derivative. A
    node whose remaining edges all sit at h'_max and whose matched effort on
    them uses its whole remaining budget is settled: its remaining edges are
    stabilized and its neighbours' budgets shrink by the effort on them.
    Peeling stops when no node is settled.
    """
    slopes = edge_derivatives(game, profile)
    efforts = {e.id: edge_effort(game, profile, e.id) for e in game.edges}
    remaining = set(slopes)
    left = {v: game.budget(v) for v in game.node_ids}
    stable: Set[str] = set()
    while remaining:
        top = max(slopes[e] for e in remaining)
        peeled: Set[str] = set()
        for v in game.node_ids:
            edges = [e.id for e in game.incident(v) if e.id in remaining]
            if not edges or not all(_close(slopes[e], top, tol) for e in edges):
                continue
            if sum(efforts[e] for e in edges) >= left[v] - tol:
                peeled.update(edges)
        if not peeled:
            break
        for e in peeled:
            for x in game.edge(e).endpoints:
                left[x] -= efforts[e]
        remaining -= peeled
        stable |= peeled
    return tuple(e.id for e in game.sorted_edges() if e.id in stable)


def _close(a: float, b: float, tol: float) -> bool:
    if a == b:
        return True
    if math.isinf(a) or math.isinf(b):
        return False
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def max_unstabilized_derivative(game: Game, profile: Profile, tol: float = 1e-9) -> float:
    """Largest edge derivative outside the stabilized set; -inf when every edge is stabilized."""
    slopes = edge_derivatives(game, profile)
    stable = set(stabilized_edges(game, profile, tol))
    rest = [s for e, s in slopes.items() if e not in stable]
    return max(rest) if rest else float("-inf")

