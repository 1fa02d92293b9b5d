"""
controller/solvers.py
---------------------
Equilibrium construction and decision algorithms per reward class, social
optima, LP-dual certificates and the price-of-anarchy ratio.

Functions:
- solve_greedy_c0, solve_weighted_sum, solve_min_convex_uniform,
  solve_min_concave, solve_max_effort
- solve, infer_method
- social_optimum, optimum_method, dual_certificate, price_of_anarchy
"""

import math
from typing import Callable, Dict, List, Optional, Tuple

import networkx as nx

from controller import oracle
from controller.allocation import MatchedResponse, best_response, matched_best_response
from controller.equilibria import verify_pairwise
from controller.simplex import maximize
from model.da.config import Settings
from model.entity.game import Edge, Game, natural_key
from model.entity.profile import Profile
from model.entity.results import BRKind, DualCertificate, GridSpec, Method, SolveOutcome, SolveStatus
from model.entity.reward import (
    MaxEffort,
    MinEffort,
    WeightedSum,
    is_min_concave,
    is_min_convex,
    is_min_linear,
    linear_slope,
)
from model.entity.scalar_fn import Shape, truncate
from model.entity.welfare import edge_effort, potential, social_welfare
from model.tools.errors import (
    SolverInternalError,
    StabilityRefused,
    UnsupportedClassError,
)
from model.tools.logger import Logger

OPTIMUM_METHODS = ("auto", "separable", "tight-matching", "lp", "grid")


def _unsupported(algorithm: str, reason: str) -> SolveOutcome:
    Logger.warning(f"{algorithm}: unsupported game, {reason}.")
    return SolveOutcome(SolveStatus.UNSUPPORTED, algorithm, witness=reason)


def _no_equilibrium(algorithm: str, witness: str, edge: Optional[str] = None) -> SolveOutcome:
    Logger.info(f"{algorithm}: no pairwise equilibrium ({witness}).")
    return SolveOutcome(SolveStatus.NO_EQUILIBRIUM, algorithm, witness=witness, witness_edge=edge)


def _equilibrium(
    game: Game, algorithm: str, profile: Profile, settings: Settings, facts=None, **flags
) -> SolveOutcome:
    welfare = social_welfare(game, profile, settings.tol)
    Logger.info(f"{algorithm}: equilibrium with welfare {welfare:.12g}.")
    return SolveOutcome(
        SolveStatus.EQUILIBRIUM,
        algorithm,
        profile,
        facts={"welfare": welfare, **(facts or {})},
        **flags,
    )


def _full(game: Game, edge: Edge) -> Dict[str, Dict[str, float]]:
    return {x: {edge.id: game.budget(x)} for x in edge.endpoints if game.budget(x) > 0}


def solve_greedy_c0(game: Game, settings: Optional[Settings] = None) -> SolveOutcome:
    """
    Greedy matching on c_{u,v} = f_e(B_u, B_v), heaviest edge first.

    Matched nodes put their whole budget on the matched edge, everybody
    else stays at zero. The result is a strong equilibrium.
    """
    settings = settings or Settings()
    algorithm = "greedy-c0"
    if not game.all_rewards(lambda r: r.in_c0):
        return _unsupported(algorithm, "greedy matching needs every reward in C0")
    matched, matching, efforts = set(), [], {}
    for edge in sorted(game.edges, key=lambda e: (-game.max_reward(e), natural_key(e.id))):
        if edge.u in matched or edge.v in matched:
            continue
        matched.update(edge.endpoints)
        matching.append(edge.id)
        efforts.update(_full(game, edge))
    return _equilibrium(
        game, algorithm, Profile(efforts), settings, {"matching": matching}, strong=True
    )


def solve_weighted_sum(game: Game, settings: Optional[Settings] = None) -> SolveOutcome:
    """
    Decide whether a weighted-sum game has a pairwise equilibrium.

    1. Type-1 edges (maximal for exactly one endpoint) force that endpoint's
       whole budget; two forced edges at one node rule equilibria out.
    2. Edges maximal for both endpoints each need one endpoint spending
       everything on them; a bipartite matching of edges to the nodes left
       over after step 1 has to cover all of them.
    3. Every remaining edge has to pass (c_u - c_e)(c_v - c_e) >= c_e^2.

    Any unilaterally stable profile is a social optimum, so the price of
    anarchy is 1 whenever an equilibrium exists.
    """
    settings = settings or Settings()
    tol = settings.tol
    algorithm = "weighted-sum"
    if not game.all_rewards(lambda r: isinstance(r, WeightedSum)):
        return _unsupported(algorithm, "every reward must be weighted_sum")

    best = {v: max((e.reward.c for e in game.incident(v)), default=0.0) for v in game.node_ids}

    def maximal(edge: Edge, node: str) -> bool:
        return edge.reward.c >= best[node] - tol * (1.0 + best[node])

    def active(edge: Edge) -> bool:
        return game.budget(edge.u) > 0 and game.budget(edge.v) > 0

    forced: Dict[str, str] = {}
    shared: List[Edge] = []
    for edge in game.sorted_edges():
        top_u, top_v = maximal(edge, edge.u), maximal(edge, edge.v)
        if top_u and top_v:
            if active(edge):
                shared.append(edge)
            continue
        if not active(edge) or not (top_u or top_v):
            continue
        node = edge.u if top_u else edge.v
        if node in forced:
            return _no_equilibrium(
                algorithm,
                f"node {node} must spend its whole budget on both {forced[node]} and {edge.id}",
                edge.id,
            )
        forced[node] = edge.id

    assignment: Dict[str, str] = {}
    if shared:
        graph = nx.Graph()
        tops = [("edge", e.id) for e in shared]
        graph.add_nodes_from(tops, bipartite=0)
        for edge in shared:
            for node in edge.endpoints:
                if node not in forced:
                    graph.add_edge(("edge", edge.id), ("node", node))
        matching = nx.bipartite.hopcroft_karp_matching(graph, top_nodes=tops)
        uncovered = [e.id for e in shared if ("edge", e.id) not in matching]
        if uncovered:
            return _no_equilibrium(
                algorithm,
                f"no assignment of free endpoints covers the maximal edges {', '.join(uncovered)}",
                uncovered[0],
            )
        for edge in shared:
            assignment[matching[("edge", edge.id)][1]] = edge.id

    for edge in game.sorted_edges():
        if not active(edge) or maximal(edge, edge.u) or maximal(edge, edge.v):
            continue
        c = edge.reward.c
        cu, cv = best[edge.u], best[edge.v]
        lhs = (cu - c) * (cv - c)
        if lhs < c * c - tol * (1.0 + c * c):
            return _no_equilibrium(
                algorithm,
                f"(c_u - c_e)(c_v - c_e) = ({cu:.12g} - {c:.12g})({cv:.12g} - {c:.12g}) "
                f"= {lhs:.12g} < c_e^2 = {c * c:.12g} on edge {edge.id} ({edge.u}, {edge.v})",
                edge.id,
            )

    efforts: Dict[str, Dict[str, float]] = {}
    for node in game.node_ids:
        budget = game.budget(node)
        if budget <= 0 or not game.incident(node):
            continue
        target = forced.get(node) or assignment.get(node)
        if target is None:
            target = next(e.id for e in game.incident(node) if maximal(e, node))
        efforts[node] = {target: budget}
    return _equilibrium(
        game,
        algorithm,
        Profile(efforts),
        settings,
        {"price_of_anarchy": 1.0, "forced": forced, "assignment": assignment},
    )


def solve_min_convex_uniform(game: Game, settings: Optional[Settings] = None) -> SolveOutcome:
    """Pair sleeping neighbours greedily by h_e(B), both spending everything."""
    settings = settings or Settings()
    algorithm = "min-convex-uniform"
    if not game.all_rewards(is_min_convex):
        return _unsupported(algorithm, "every reward must be min_effort with convex h")
    if not game.uniform_budgets:
        return _unsupported(algorithm, "budgets are not uniform")
    awake, pairs, efforts = set(), [], {}
    for edge in sorted(game.edges, key=lambda e: (-game.max_reward(e), natural_key(e.id))):
        if edge.u in awake or edge.v in awake:
            continue
        awake.update(edge.endpoints)
        pairs.append(edge.id)
        efforts.update(_full(game, edge))
    return _equilibrium(
        game, algorithm, Profile(efforts), settings, {"matching": pairs}, strong=True
    )


def _truncated_game(game: Game) -> Game:
    """h_e made constant beyond min(B_u, B_v), which no profile can exceed."""
    edges = []
    for edge in game.edges:
        cap = min(game.budget(edge.u), game.budget(edge.v))
        edges.append(Edge(edge.id, edge.u, edge.v, MinEffort(truncate(edge.reward.h, cap))))
    return Game(game.nodes, tuple(edges))


def _settle_tie(
    game: Game, response: MatchedResponse, tied: Dict[str, MatchedResponse], tol: float
) -> Optional[Dict[str, float]]:
    """
    An equally good allocation for ``response.node`` that asks no tied
    neighbour for more than that neighbour can give, or None.

    Effort moves along the node's flat-marginal ranges: edges to tied
    neighbours start at their lower bound and the rest of the spent total
    goes to the other sleeping edges first.
    """
    node = response.node
    limits: Dict[str, float] = {}
    for e in response.sleeping:
        other = game.edge(e).other(node)
        limits[e] = response.high[e]
        if other in tied:
            limits[e] = min(limits[e], tied[other].reach(e))
            if limits[e] < response.low[e] - tol:
                return None
    if all(x <= limits[e] + tol for e, x in response.sleeping.items()):
        return response.allocation
    shifted = dict(response.low)
    rest = response.spent - sum(shifted.values())
    for e in sorted(shifted, key=lambda e: game.edge(e).other(node) in tied):
        give = min(rest, max(limits[e] - shifted[e], 0.0))
        shifted[e] += give
        rest -= give
    if rest > tol:
        return None
    return {**response.requests, **{e: x for e, x in shifted.items() if x > 0}}


def solve_min_concave(game: Game, settings: Optional[Settings] = None) -> SolveOutcome:
    """
    Wake players one at a time.

    Every round each sleeping node computes its best response when it
    controls the other sleepers and matches every awake request exactly;
    its score is the smallest left-derivative over its positive sleeping
    edges (+inf when it has none left to decide). The highest score wakes
    and its allocation is frozen. Among tied nodes the first one that can
    shift its effort along flat marginals so that it asks no tied
    neighbour for more than the neighbour can give wakes. The end state is
    re-verified pairwise.

    Raises:
        SolverInternalError: a node is asked beyond its budget, or the end
                             state fails pairwise verification.
    """
    settings = settings or Settings()
    tol = settings.tol
    algorithm = "min-concave"
    if not game.all_rewards(is_min_concave):
        return _unsupported(algorithm, "every reward must be min_effort with concave h")
    work = _truncated_game(game)
    sleeping = list(game.node_ids)
    fixed: Dict[str, Dict[str, float]] = {}
    order: List[str] = []
    reshuffled = unresolved = 0
    while sleeping:
        current = Profile(fixed)
        responses = {
            x: matched_best_response(work, current, x, [y for y in sleeping if y != x], settings)
            for x in sleeping
        }
        top = max(r.score for r in responses.values())
        tied = {x: r for x, r in responses.items() if r.score >= top - tol}
        chosen, allocation = None, None
        for node, response in tied.items():
            allocation = _settle_tie(work, response, tied, tol)
            if allocation is not None:
                chosen = node
                break
        if chosen is None:
            chosen = next(iter(tied))
            allocation = tied[chosen].allocation
            unresolved += 1
            Logger.warning(f"{algorithm}: tie among {list(tied)} resolved by id order.")
        elif allocation != tied[chosen].allocation:
            reshuffled += 1
            Logger.debug(f"{algorithm}: {chosen} shifted effort along a flat marginal.")
        fixed[chosen] = allocation
        order.append(chosen)
        sleeping.remove(chosen)
    profile = Profile(fixed)
    report = verify_pairwise(game, profile, settings)
    if not report.stable:
        raise SolverInternalError(f"wake-up ended at a {report.verdict.value} state")
    unique = game.all_rewards(lambda r: r.h.shape == Shape.STRICTLY_CONCAVE)
    facts = {"wake_order": order, "verification": report.verdict.value}
    if reshuffled:
        facts["reshuffled_ties"] = reshuffled
    if unresolved:
        facts["unresolved_ties"] = unresolved
    return _equilibrium(game, algorithm, profile, settings, facts, strong=True, unique=unique)


def _ascent_cap(game: Game) -> int:
    kinks = sum(len(e.reward.h.kinks()) for e in game.edges)
    return 10 * (game.n + game.m) * (kinks + 1)


def solve_max_effort(
    game: Game, settings: Optional[Settings] = None, start: Optional[Profile] = None
) -> SolveOutcome:
    """
    Iterated unilateral best response from ``start`` (zero by default).

    Each applied move raises the potential, so the sweep stops; the result
    is re-verified pairwise. Grid best responses mark the outcome
    approximate.

    Raises:
        SolverInternalError: the ascent exceeds its step cap, or the end
                             state fails pairwise verification.
    """
    settings = settings or Settings()
    algorithm = "max-effort"
    if not game.all_rewards(lambda r: isinstance(r, MaxEffort)):
        return _unsupported(algorithm, "every reward must be max_effort")
    profile = (start or Profile.zero()).check_feasible(game, settings.tol)
    trace = [potential(game, profile)]
    approximate = False
    cap = _ascent_cap(game)
    steps = 0
    moved = True
    while moved:
        moved = False
        for node in game.node_ids:
            br = best_response(game, profile, node, settings)
            approximate |= br.kind == BRKind.GRID_APPROXIMATE
            candidate = profile.with_strategy(node, br.allocation)
            phi = potential(game, candidate)
            if phi > trace[-1] + settings.tol:
                profile = candidate
                trace.append(phi)
                moved = True
                steps += 1
                if steps > cap:
                    raise SolverInternalError(f"max-effort ascent exceeded {cap} steps")
    if any(b <= a for a, b in zip(trace, trace[1:])):
        raise SolverInternalError("potential trace is not strictly increasing")
    report = verify_pairwise(game, profile, settings)
    if not report.stable:
        raise SolverInternalError(f"max-effort ascent ended at a {report.verdict.value} state")
    return _equilibrium(
        game,
        algorithm,
        profile,
        settings,
        {"potential_trace": trace, "steps": steps, "verification": report.verdict.value},
        approximate=approximate or report.method == Method.GRID,
    )


SOLVERS: Dict[str, Callable[..., SolveOutcome]] = {
    "greedy-c0": solve_greedy_c0,
    "weighted-sum": solve_weighted_sum,
    "min-convex-uniform": solve_min_convex_uniform,
    "min-concave": solve_min_concave,
    "max-effort": solve_max_effort,
}

_APPLIES: Dict[str, Callable[[Game], bool]] = {
    "greedy-c0": lambda g: g.all_rewards(lambda r: r.in_c0),
    "weighted-sum": lambda g: g.all_rewards(lambda r: isinstance(r, WeightedSum)),
    "min-convex-uniform": lambda g: g.all_rewards(is_min_convex) and g.uniform_budgets,
    "min-concave": lambda g: g.all_rewards(is_min_concave),
    "max-effort": lambda g: g.all_rewards(lambda r: isinstance(r, MaxEffort)),
}


def infer_method(game: Game) -> str:
    """
    The one solver whose class covers ``game``.

    Raises:
        ValueError: several solvers apply; the message lists them.
        UnsupportedClassError: none applies (mixed classes are refused).
    """
    candidates = [name for name, applies in _APPLIES.items() if applies(game)]
    if len(candidates) > 1:
        raise ValueError(
            f"method is ambiguous, candidates: {', '.join(candidates)}; pass --method"
        )
    if not candidates:
        raise UnsupportedClassError("no solver covers this mix of reward classes")
    return candidates[0]


def solve(game: Game, method: str = "auto", settings: Optional[Settings] = None) -> SolveOutcome:
    settings = settings or Settings()
    if method == "auto":
        method = infer_method(game)
        Logger.info(f"Inferred solver {method}.")
    if method not in SOLVERS:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(SOLVERS)}")
    return SOLVERS[method](game, settings)


def optimum_method(game: Game, method: str = "auto") -> str:
    """
    Resolve ``auto`` and check the class of an explicit method.

    Raises:
        UnsupportedClassError: the method does not cover the game.
        ValueError: unknown method.
    """
    checks = {
        "separable": lambda: game.all_rewards(lambda r: isinstance(r, WeightedSum)),
        "tight-matching": lambda: game.all_rewards(lambda r: r.in_c0),
        "lp": lambda: game.all_rewards(is_min_linear),
    }
    if method == "auto":
        return next((name for name, check in checks.items() if check()), "grid")
    if method == "grid":
        return method
    if method not in checks:
        raise ValueError(f"unknown optimum method {method!r}; choose from {', '.join(OPTIMUM_METHODS)}")
    if not checks[method]():
        raise UnsupportedClassError(f"optimum method {method} does not cover this game")
    return method


def _separable_optimum(game: Game) -> Profile:
    efforts = {}
    for node in game.node_ids:
        edges = game.incident(node)
        if game.budget(node) > 0 and edges:
            top = max(e.reward.c for e in edges)
            target = next(e for e in edges if e.reward.c == top)
            efforts[node] = {target.id: game.budget(node)}
    return Profile(efforts)


def _matching_optimum(game: Game) -> Profile:
    graph = nx.Graph()
    graph.add_nodes_from(game.node_ids)
    for edge in game.sorted_edges():
        weight = game.max_reward(edge)
        if weight > 0:
            graph.add_edge(edge.u, edge.v, weight=weight, id=edge.id)
    efforts = {}
    for u, v in nx.max_weight_matching(graph):
        efforts.update(_full(game, game.edge(graph.edges[u, v]["id"])))
    return Profile(efforts)


def _lp_optimum(game: Game) -> Profile:
    edges = game.sorted_edges()
    nodes = game.node_ids
    index = {v: i for i, v in enumerate(nodes)}
    c = [2.0 * linear_slope(e.reward) for e in edges]
    A = [[0.0] * len(edges) for _ in nodes]
    for j, edge in enumerate(edges):
        for x in edge.endpoints:
            A[index[x]][j] = 1.0
    b = [game.budget(v) for v in nodes]
    result = maximize(c, A, b)
    efforts: Dict[str, Dict[str, float]] = {}
    for edge, x in zip(edges, result.x):
        if x > 0:
            for end in edge.endpoints:
                efforts.setdefault(end, {})[edge.id] = min(float(x), game.budget(end))
    return Profile(efforts)


def social_optimum(
    game: Game, method: str = "auto", settings: Optional[Settings] = None
) -> Tuple[Profile, float]:
    """
    A welfare-maximizing profile and its welfare.

    Methods: ``separable`` (weighted sums, each node on a best edge),
    ``tight-matching`` (C0, maximum-weight matching on f_e(B_u, B_v)),
    ``lp`` (min-linear, simplex), ``grid`` (any class, lattice lower
    bound), ``auto`` (the first of these that applies).

    Raises:
        UnsupportedClassError: method and class do not match.
        GridCapExceeded: the lattice is larger than the configured cap.
    """
    settings = settings or Settings()
    resolved = optimum_method(game, method)
    if resolved == "separable":
        profile = _separable_optimum(game)
    elif resolved == "tight-matching":
        profile = _matching_optimum(game)
    elif resolved == "lp":
        profile = _lp_optimum(game)
    else:
        profile, _ = oracle.grid_optimum(game, GridSpec(settings.grid, settings.grid_cap))
    welfare = social_welfare(game, profile, settings.tol)
    Logger.info(f"Optimum by {resolved}: welfare {welfare:.12g}.")
    return profile, welfare


def dual_certificate(
    game: Game, profile: Profile, settings: Optional[Settings] = None
) -> DualCertificate:
    """
    y_u = sum_e c_e s_e / B_u from a stable min-linear profile.

    Stability makes max(y_u, y_v) >= c_e on every edge, so y' = 2y is
    dual-feasible and sum_u B_u y'_u = 2 w(s) bounds the optimum.
    Zero-budget nodes with incident edges get y = inf and are left out of
    the dual value.

    Raises:
        UnsupportedClassError: a reward is not min-linear.
        StabilityRefused: the profile is not pairwise stable.
        SolverInternalError: an edge has max(y_u, y_v) < c_e.
    """
    settings = settings or Settings()
    tol = settings.tol
    if not game.all_rewards(is_min_linear):
        raise UnsupportedClassError("dual certificates need min-linear rewards")
    report = verify_pairwise(game, profile, settings)
    if not report.stable:
        raise StabilityRefused("dual certificate needs a pairwise-stable profile", report.verdict.value)
    y: Dict[str, float] = {}
    infinite = []
    for node in game.node_ids:
        earned = sum(linear_slope(e.reward) * edge_effort(game, profile, e.id) for e in game.incident(node))
        budget = game.budget(node)
        if budget > 0:
            y[node] = earned / budget
        elif game.degree(node) > 0:
            y[node] = math.inf
            infinite.append(node)
        else:
            y[node] = 0.0
    for edge in game.sorted_edges():
        c = linear_slope(edge.reward)
        if max(y[edge.u], y[edge.v]) < c - tol:
            raise SolverInternalError(
                f"edge {edge.id} has max(y_u, y_v) = {max(y[edge.u], y[edge.v]):.12g} < c_e = {c:.12g}"
            )
    doubled = {v: 2.0 * value for v, value in y.items()}
    feasible = all(
        doubled[e.u] + doubled[e.v] >= 2.0 * linear_slope(e.reward) - tol for e in game.edges
    )
    dual_value = sum(game.budget(v) * doubled[v] for v in game.node_ids if game.budget(v) > 0)
    primal_value = social_welfare(game, profile, tol)
    Logger.info(f"Dual certificate: value {dual_value:.12g} against welfare {primal_value:.12g}.")
    return DualCertificate(y, doubled, primal_value, dual_value, feasible, tuple(infinite))


def price_of_anarchy(
    game: Game,
    equilibrium: Profile,
    optimum: Profile,
    settings: Optional[Settings] = None,
    force: bool = False,
) -> float:
    """
    w(optimum) / w(equilibrium); 0/0 is 1 and positive/0 is math.inf.

    Raises:
        StabilityRefused: ``equilibrium`` fails verification and ``force`` is off.
    """
    settings = settings or Settings()
    equilibrium.check_feasible(game, settings.tol)
    optimum.check_feasible(game, settings.tol)
    if not force:
        report = verify_pairwise(game, equilibrium, settings)
        if not report.stable:
            raise StabilityRefused(
                "price of anarchy needs a verified equilibrium (use --force to skip)",
                report.verdict.value,
            )
    w_eq = social_welfare(game, equilibrium, settings.tol)
    w_opt = social_welfare(game, optimum, settings.tol)
    if w_eq <= 0:
        return 1.0 if w_opt <= 0 else math.inf
    return w_opt / w_eq
