"""
controller/instances.py
-----------------------
Instance generators: the canonical example games, the 3-SAT hardness
gadgets with their satisfying-assignment profiles, and seeded random
families per reward class.

Functions:
- canonical(name, **params)
- sat_gadget_xy_sum(cnf), xy_sum_recipe(cnf, assignment)
- sat_gadget_min(cnf, uniform), min_recipe(cnf, assignment, uniform)
- brute_force_assignment(cnf)
- random_family(cls, n, density, seed), random_profile(game, seed)
"""

import itertools
import math
from typing import Callable, Dict, List, Optional, Tuple

import networkx as nx

from model.entity.game import Edge, Game, Node, natural_key
from model.entity.profile import Profile
from model.entity.results import CnfFormula
from model.entity.reward import (
    MaxEffort,
    MinEffort,
    PolyConvex,
    Reward,
    WeightedProduct,
    WeightedSum,
)
from model.entity.scalar_fn import Linear, PiecewiseLinear, Power, ScalarFn, Truncated
from model.tools.errors import GameLookupError
from model.tools.logger import Logger
from model.tools.rng import SeededRNG
from model.tools.validators import fraction_validator, resolution_validator

Instance = Tuple[Game, Optional[Profile]]

MAX_BRUTE_FORCE_VARIABLES = 20


def _game(budgets: Dict[str, float], edges: List[Tuple[str, str, str, Reward]]) -> Game:
    return Game(
        tuple(Node(v, b) for v, b in budgets.items()),
        tuple(Edge(eid, u, v, reward) for eid, u, v, reward in edges),
    )


# canonical examples


def _triangle_noeq() -> Instance:
    game = _game(
        {"u1": 1, "u2": 1, "u3": 1},
        [
            ("e1", "u1", "u2", WeightedSum(3)),
            ("e2", "u2", "u3", WeightedSum(3)),
            ("e3", "u1", "u3", WeightedSum(2)),
        ],
    )
    # the Nash state the pair (u1, u3) escapes from
    start = Profile({"u1": {"e1": 1.0}, "u2": {"e1": 1.0}, "u3": {"e2": 1.0}})
    return game, start


def _path_class_c(epsilon: float = 0.1) -> Instance:
    game = _game(
        {"v1": 1, "v2": 1, "v3": 1, "v4": 1},
        [
            ("e1", "v1", "v2", WeightedProduct(1)),
            ("e2", "v2", "v3", WeightedProduct(1 + epsilon)),
            ("e3", "v3", "v4", WeightedProduct(1)),
        ],
    )
    return game, Profile({"v2": {"e2": 1.0}, "v3": {"e2": 1.0}})


def _sqrt_triangle() -> Instance:
    reward = PolyConvex(((1, 1, 1.0),), Power(1, 0.5))
    game = _game(
        {"v1": 1, "v2": 1, "v3": 1},
        [("e1", "v1", "v2", reward), ("e2", "v2", "v3", reward), ("e3", "v1", "v3", reward)],
    )
    start = Profile({v: {e.id: 0.5 for e in game.incident(v)} for v in game.node_ids})
    return game, start


def _min_noeq() -> Instance:
    game = _game(
        {"u": 2, "v": 2, "w": 2, "z": 1},
        [
            ("e1", "u", "v", MinEffort(Power(2, 2))),
            ("e2", "v", "w", MinEffort(Linear(5))),
            ("e3", "w", "z", MinEffort(Linear(6))),
        ],
    )
    return game, Profile({"v": {"e2": 1.5}, "w": {"e2": 1.5}})


def _min_path(epsilon: float) -> Instance:
    game = _game(
        {"v1": 1, "v2": 1, "v3": 1, "v4": 1},
        [
            ("e1", "v1", "v2", MinEffort(Linear(1))),
            ("e2", "v2", "v3", MinEffort(Linear(1 + epsilon))),
            ("e3", "v3", "v4", MinEffort(Linear(1))),
        ],
    )
    return game, Profile({"v2": {"e2": 1.0}, "v3": {"e2": 1.0}})


def _max_effort_path(epsilon: float = 0.01) -> Instance:
    game = _game(
        {"u1": 0, "u2": 1, "u3": 1, "u4": 0},
        [
            ("e1", "u1", "u2", MaxEffort(Power(1, 2))),
            ("e2", "u2", "u3", MaxEffort(Power(1, 2))),
            ("e3", "u3", "u4", MaxEffort(Power(epsilon, 2))),
        ],
    )
    return game, Profile({"u2": {"e2": 1.0}, "u3": {"e3": 1.0}})


def _noconverge() -> Instance:
    budgets = {v: 2 for v in ("u1", "v1", "w1", "z1", "vc", "z2", "w2", "v2", "u2")}
    game = _game(
        budgets,
        [
            ("e1", "u1", "v1", MinEffort(Power(2, 2))),
            ("e2", "v1", "w1", MinEffort(Linear(5))),
            ("e3", "w1", "z1", MinEffort(Linear(6))),
            ("e4", "z1", "vc", MinEffort(Linear(1000))),
            ("e5", "vc", "z2", MinEffort(Linear(1000))),
            ("e6", "z2", "w2", MinEffort(Linear(6))),
            ("e7", "w2", "v2", MinEffort(Linear(5))),
            ("e8", "v2", "u2", MinEffort(Power(2, 2))),
        ],
    )
    start = Profile({"z1": {"e4": 1.0}, "vc": {"e4": 1.0, "e5": 1.0}, "z2": {"e5": 1.0}})
    return game, start


def _star_concave() -> Instance:
    game = _game(
        {"v": 1, "u": 1, "w": 1},
        [
            ("e1", "v", "u", MinEffort(PiecewiseLinear(((0, 0), (0.5, 1.5), (1, 2))))),
            ("e2", "v", "w", MinEffort(Linear(2))),
        ],
    )
    return game, None


def _single_product() -> Instance:
    return _game({"u": 1, "v": 1}, [("e1", "u", "v", WeightedProduct(1))]), None


REGISTRY: Dict[str, Callable[..., Instance]] = {
    "triangle-noeq": _triangle_noeq,
    "path-classC": _path_class_c,
    "sqrt-triangle": _sqrt_triangle,
    "min-noeq": _min_noeq,
    "min-linear-3path": lambda: _min_path(0.1),
    "min-uniform-3path": lambda epsilon=0.1: _min_path(epsilon),
    "max-effort-4path": _max_effort_path,
    "noconverge": _noconverge,
    "star-concave": _star_concave,
    "single-product": _single_product,
}

CANONICAL = tuple(REGISTRY)


def canonical(name: str, **params) -> Instance:
    """
    Build a named example game and, where it has one, its start profile.

    Raises:
        GameLookupError: unknown name.
    """
    try:
        builder = REGISTRY[name]
    except KeyError:
        raise GameLookupError(
            f"unknown instance {name!r}; choose one of {', '.join(CANONICAL)}"
        ) from None
    return builder(**params)


# hardness gadgets
#
# Variable i has a decision player x{i} and two assignment players x{i}t
# and x{i}f; literal +i attaches x{i}t to the clause, literal -i x{i}f.


def _literal_player(literal: int) -> str:
    return f"x{abs(literal)}{'t' if literal > 0 else 'f'}"


def _literal_edges(cnf: CnfFormula, anchor: Callable[[int], str], reward: Reward):
    edges, seen = [], set()
    for j, clause in enumerate(cnf.clauses, start=1):
        for lit in clause:
            player = _literal_player(lit)
            eid = f"{player}-{anchor(j)}"
            if eid not in seen:
                seen.add(eid)
                edges.append((eid, player, anchor(j), reward))
    return edges


def _variable_side(cnf: CnfFormula, decision_budget: float, reward: Reward):
    kl = cnf.k * cnf.l
    budgets, edges = {}, []
    for i in range(1, cnf.k + 1):
        budgets[f"x{i}"] = decision_budget
        budgets[f"x{i}t"] = kl
        budgets[f"x{i}f"] = kl
        for side in ("t", "f"):
            edges.append((f"x{i}-x{i}{side}", f"x{i}", f"x{i}{side}", reward))
    return budgets, edges


def sat_gadget_xy_sum(cnf: CnfFormula) -> Game:
    """
    Gadget mixing c(x+y) and cxy rewards whose pairwise equilibria encode
    the satisfying assignments of ``cnf``.

    Each clause j is a no-equilibrium triangle c{j}u1, c{j}u2, c{j}u3 that
    the assignment players can only stabilise through their 3xy edges to
    c{j}u3.
    """
    if cnf.k < 3:
        raise ValueError("the sum/product gadget needs at least 3 variables")
    budgets, edges = _variable_side(cnf, 1, WeightedProduct(7))
    for j in range(1, cnf.l + 1):
        for corner in ("u1", "u2", "u3"):
            budgets[f"c{j}{corner}"] = 1
        edges += [
            (f"c{j}e1", f"c{j}u1", f"c{j}u2", WeightedSum(3)),
            (f"c{j}e2", f"c{j}u2", f"c{j}u3", WeightedSum(3)),
            (f"c{j}e3", f"c{j}u1", f"c{j}u3", WeightedSum(2)),
        ]
    edges += _literal_edges(cnf, lambda j: f"c{j}u3", WeightedProduct(3))
    game = _game(budgets, edges)
    Logger.info(f"Sum/product gadget with {game.n} nodes and {game.m} edges.")
    return game


def _anchor_cap(kl: int, budget_left: int) -> ScalarFn:
    at = kl - budget_left
    fn = Truncated(Power(10 * at**1.5, 0.5), at)
    expected = 10 * at**2
    if not math.isclose(fn.value(at), expected, rel_tol=1e-12):
        raise ValueError(f"anchor join mismatch at {at}: {fn.value(at)} != {expected}")
    return fn


def sat_gadget_min(cnf: CnfFormula, uniform: bool = False) -> Game:
    """
    Min-effort gadget: every clause is a copy of the no-equilibrium path
    u-v-w-z whose z node is reached by 7x edges from the assignment players.

    With ``uniform`` every budget is kl; primed anchor players soak up the
    clause players' extra budget through capped sqrt rewards.
    """
    kl = cnf.k * cnf.l
    if uniform and kl <= 2:
        raise ValueError("the uniform-budget gadget needs k * l > 2")
    budgets, edges = _variable_side(cnf, kl, MinEffort(Power(10, 2)))
    clause_budgets = {"u": 2, "v": 2, "w": 2, "z": 1}
    for j in range(1, cnf.l + 1):
        for name, budget in clause_budgets.items():
            budgets[f"c{j}{name}"] = kl if uniform else budget
        edges += [
            (f"c{j}e1", f"c{j}u", f"c{j}v", MinEffort(Power(2, 2))),
            (f"c{j}e2", f"c{j}v", f"c{j}w", MinEffort(Linear(5))),
            (f"c{j}e3", f"c{j}w", f"c{j}z", MinEffort(Linear(6))),
        ]
        if uniform:
            for name, budget in clause_budgets.items():
                budgets[f"c{j}{name}'"] = kl
                edges.append(
                    (
                        f"c{j}{name}-anchor",
                        f"c{j}{name}",
                        f"c{j}{name}'",
                        MinEffort(_anchor_cap(kl, budget)),
                    )
                )
    edges += _literal_edges(cnf, lambda j: f"c{j}z", MinEffort(Linear(7)))
    game = _game(budgets, edges)
    Logger.info(f"Min-effort gadget with {game.n} nodes and {game.m} edges (uniform={uniform}).")
    return game


def _clause_assignment(
    cnf: CnfFormula, assignment: Dict[int, bool], anchor: Callable[[int], str]
) -> Dict[str, str]:
    """
    Map each clause anchor to a free assignment player adjacent to it.

    Free players are the ones on the satisfied side of their variable. A
    maximum matching comes first so that no free player idles while
    another one serves two clauses; leftover anchors join their first
    adjacent free player.
    """
    if not cnf.satisfied_by(assignment):
        raise ValueError("assignment does not satisfy the formula")
    free = {f"x{i}{'t' if assignment[i] else 'f'}" for i in range(1, cnf.k + 1)}
    graph = nx.Graph()
    anchors = [anchor(j) for j in range(1, cnf.l + 1)]
    graph.add_nodes_from(anchors, bipartite=0)
    graph.add_nodes_from(sorted(free, key=natural_key), bipartite=1)
    adjacent: Dict[str, List[str]] = {}
    for j, clause in enumerate(cnf.clauses, start=1):
        players = sorted({_literal_player(lit) for lit in clause} & free, key=natural_key)
        adjacent[anchor(j)] = players
        graph.add_edges_from((anchor(j), p) for p in players)
    matching = nx.bipartite.hopcroft_karp_matching(graph, top_nodes=anchors)
    return {a: matching.get(a, adjacent[a][0]) for a in anchors}


def _recipe(
    cnf: CnfFormula,
    assignment: Dict[int, bool],
    anchor: Callable[[int], str],
    anchor_effort: float,
    decision_effort: float,
) -> Dict[str, Dict[str, float]]:
    kl = cnf.k * cnf.l
    efforts: Dict[str, Dict[str, float]] = {}
    for i in range(1, cnf.k + 1):
        # the decision player pairs with the side that is NOT free
        taken = "f" if assignment[i] else "t"
        eid = f"x{i}-x{i}{taken}"
        efforts[f"x{i}"] = {eid: decision_effort}
        efforts[f"x{i}{taken}"] = {eid: kl}
    served: Dict[str, List[str]] = {}
    for a, player in _clause_assignment(cnf, assignment, anchor).items():
        efforts.setdefault(a, {})[f"{player}-{a}"] = anchor_effort
        served.setdefault(player, []).append(a)
    for player, anchors in served.items():
        efforts[player] = {f"{player}-{a}": kl / len(anchors) for a in anchors}
    return efforts


def xy_sum_recipe(cnf: CnfFormula, assignment: Dict[int, bool]) -> Profile:
    """Pairwise-stable profile of ``sat_gadget_xy_sum(cnf)`` built from a satisfying assignment."""
    efforts = _recipe(cnf, assignment, lambda j: f"c{j}u3", 1.0, 1.0)
    for j in range(1, cnf.l + 1):
        efforts[f"c{j}u1"] = {f"c{j}e1": 1.0}
        efforts[f"c{j}u2"] = {f"c{j}e1": 1.0}
    return Profile(efforts)


def min_recipe(cnf: CnfFormula, assignment: Dict[int, bool], uniform: bool = False) -> Profile:
    """Stable profile of ``sat_gadget_min(cnf, uniform)`` built from a satisfying assignment."""
    kl = cnf.k * cnf.l
    efforts = _recipe(cnf, assignment, lambda j: f"c{j}z", 1.0, kl)
    for j in range(1, cnf.l + 1):
        efforts[f"c{j}v"] = {f"c{j}e2": 2.0}
        efforts[f"c{j}w"] = {f"c{j}e2": 2.0}
        if uniform:
            for name, left in (("u", 2), ("v", 2), ("w", 2), ("z", 1)):
                eid = f"c{j}{name}-anchor"
                efforts.setdefault(f"c{j}{name}", {})[eid] = kl - left
                efforts[f"c{j}{name}'"] = {eid: kl - left}
    return Profile(efforts)


def brute_force_assignment(cnf: CnfFormula) -> Optional[Dict[int, bool]]:
    """First satisfying assignment in lexicographic order (False before True), or None."""
    if cnf.k > MAX_BRUTE_FORCE_VARIABLES:
        raise ValueError(f"brute force is limited to {MAX_BRUTE_FORCE_VARIABLES} variables")
    for values in itertools.product((False, True), repeat=cnf.k):
        assignment = dict(enumerate(values, start=1))
        if cnf.satisfied_by(assignment):
            return assignment
    return None


# random families

UNIFORM_BUDGET_CLASSES = ("min-convex-uniform",)


def _coef(rng: SeededRNG) -> float:
    return rng.log_uniform(0.1, 10)


def _concave_pl(rng: SeededRNG) -> PiecewiseLinear:
    pieces = rng.randint(2, 4)
    slopes = sorted((_coef(rng) for _ in range(pieces)), reverse=True)
    cuts = sorted(rng.uniform(0.05, 2.0) for _ in range(pieces - 1))
    xs = [0.0] + cuts + [cuts[-1] + 1.0]
    points, y = [(0.0, 0.0)], 0.0
    for x0, x1, slope in zip(xs, xs[1:], slopes):
        if x1 <= x0:
            continue
        y += slope * (x1 - x0)
        points.append((x1, y))
    return PiecewiseLinear(tuple(points))


def _poly_convex(rng: SeededRNG) -> PolyConvex:
    poly = [(1, 1, _coef(rng))]
    if rng.bernoulli(0.5):
        c2 = _coef(rng)
        poly += [(2, 1, c2), (1, 2, c2)]
        outer = Linear(_coef(rng)) if rng.bernoulli(0.5) else Power(_coef(rng), 2)
    else:
        outer = Power(_coef(rng), 2)
    return PolyConvex(tuple(poly), outer)


REWARD_DRAWS: Dict[str, Callable[[SeededRNG], Reward]] = {
    "c0-product": lambda rng: WeightedProduct(_coef(rng)),
    "poly-convex": _poly_convex,
    "weighted-sum": lambda rng: WeightedSum(_coef(rng)),
    "min-linear": lambda rng: MinEffort(Linear(_coef(rng))),
    "min-convex-uniform": lambda rng: MinEffort(
        Power(_coef(rng), 2) if rng.bernoulli(0.5) else Linear(_coef(rng))
    ),
    "min-concave": lambda rng: MinEffort(_concave_pl(rng)),
    "min-concave-smooth": lambda rng: MinEffort(Power(_coef(rng), 0.5)),
    "max-convex": lambda rng: MaxEffort(Power(_coef(rng), rng.choice((1, 2)))),
    "concave-general": lambda rng: PolyConvex(((1, 1, _coef(rng)),), Power(_coef(rng), 0.5)),
}

RANDOM_CLASSES = tuple(REWARD_DRAWS)


def random_family(cls: str, n: int, density: float, seed: int = 0) -> Game:
    """
    Seeded random game on nodes v1..vn.

    Budgets are drawn first, uniform on [0.5, 2] (all 1 for uniform-budget
    classes); then each pair i < j in order becomes an edge with
    probability ``density`` and draws its reward. Coefficients are
    log-uniform on [0.1, 10].

    Raises:
        ValueError: unknown class, n < 1 or density outside [0, 1].
    """
    if cls not in REWARD_DRAWS:
        raise ValueError(f"unknown random class {cls!r}; choose one of {', '.join(RANDOM_CLASSES)}")
    resolution_validator(n, "node count must be a positive integer")
    fraction_validator(density, "edge density must lie in [0, 1]")
    rng = SeededRNG(seed)
    draw = REWARD_DRAWS[cls]
    nodes = [f"v{i}" for i in range(1, n + 1)]
    if cls in UNIFORM_BUDGET_CLASSES:
        budgets = {v: 1.0 for v in nodes}
    else:
        budgets = {v: round(rng.uniform(0.5, 2.0), 6) for v in nodes}
    edges = []
    for u, v in itertools.combinations(nodes, 2):
        if rng.bernoulli(density):
            edges.append((f"e{len(edges) + 1}", u, v, draw(rng)))
    Logger.debug(f"Random {cls} game: n={n}, m={len(edges)}, seed={seed}.")
    return _game(budgets, edges)


def random_profile(game: Game, seed: int = 0) -> Profile:
    """
    Seeded feasible profile: each node spends a uniform share in [0, 1] of
    its budget, split over its edges by uniform weights.
    """
    rng = SeededRNG(seed).fork()
    efforts: Dict[str, Dict[str, float]] = {}
    for node in game.node_ids:
        edges = [e.id for e in game.incident(node)]
        weights = [rng.random() for _ in edges]
        total = sum(weights)
        if game.budget(node) <= 0 or total <= 0:
            continue
        share = game.budget(node) * rng.random() / total
        efforts[node] = {e: w * share for e, w in zip(edges, weights) if w > 0}
    return Profile(efforts)
