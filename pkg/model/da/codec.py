"""
model/da/codec.py
-----------------
JSON codec for games, profiles and result payloads, and the JSONL
trajectory stream.

Game files keep full float precision so that load(save(g)) == g; result
payloads are printed with 12 significant digits.

Functions:
- load_game / save_game
- load_profile / save_profile
- game_hash / bytes_hash
- to_jsonable / dumps_payload
- trajectory_lines / write_trajectory
"""

import hashlib
import json
import math
from enum import Enum
from typing import Any, Dict, Iterator, List, Union

from model.entity.game import Edge, Game, Node
from model.entity.profile import Profile
from model.entity.results import Trajectory
from model.entity.reward import (
    MaxEffort,
    MinEffort,
    PolyConvex,
    Reward,
    WeightedProduct,
    WeightedSum,
)
from model.entity.scalar_fn import Linear, PiecewiseLinear, Power, ScalarFn, Truncated
from model.tools.errors import ParseError

Source = Union[bytes, str]
SIGNIFICANT_DIGITS = 12


def _decode(data: Source, what: str) -> Any:
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ParseError(what, f"not UTF-8: {e}") from e
    try:
        return json.loads(data)
    except json.JSONDecodeError as e:
        raise ParseError(f"{what} line {e.lineno}", f"invalid JSON: {e.msg}") from e


def _field(obj: Any, key: str, where: str) -> Any:
    if not isinstance(obj, dict):
        raise ParseError(where, "expected an object")
    if key not in obj:
        raise ParseError(where, f"missing field '{key}'")
    return obj[key]


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(where, f"expected a number, got {value!r}")
    return float(value)


def parse_scalar_fn(obj: Any, where: str) -> ScalarFn:
    kind = _field(obj, "kind", where)
    try:
        if kind == "linear":
            return Linear(_number(_field(obj, "a", where), f"{where}.a"))
        if kind == "power":
            return Power(
                _number(_field(obj, "a", where), f"{where}.a"),
                _number(_field(obj, "k", where), f"{where}.k"),
            )
        if kind == "piecewise_linear":
            points = _field(obj, "points", where)
            if not isinstance(points, list):
                raise ParseError(f"{where}.points", "expected a list of [x, value] pairs")
            pairs = []
            for i, point in enumerate(points):
                if not (isinstance(point, list) and len(point) == 2):
                    raise ParseError(f"{where}.points[{i}]", "expected an [x, value] pair")
                pairs.append(
                    (_number(point[0], f"{where}.points[{i}]"), _number(point[1], f"{where}.points[{i}]"))
                )
            try:
                return PiecewiseLinear(tuple(pairs))
            except ValueError as e:
                raise ParseError(f"{where}.points", f"non-monotone piecewise breakpoints: {e}") from e
        if kind == "truncated":
            inner = parse_scalar_fn(_field(obj, "inner", where), f"{where}.inner")
            return Truncated(inner, _number(_field(obj, "at", where), f"{where}.at"))
    except ParseError:
        raise
    except ValueError as e:
        raise ParseError(where, str(e)) from e
    raise ParseError(f"{where}.kind", f"unknown scalar function kind {kind!r}")


def parse_reward(obj: Any, where: str) -> Reward:
    kind = _field(obj, "type", where)
    try:
        if kind == "weighted_sum":
            return WeightedSum(_number(_field(obj, "c", where), f"{where}.c"))
        if kind == "weighted_product":
            return WeightedProduct(_number(_field(obj, "c", where), f"{where}.c"))
        if kind == "poly_convex":
            poly = _field(obj, "poly", where)
            if not isinstance(poly, list):
                raise ParseError(f"{where}.poly", "expected a list of [i, j, coef] terms")
            terms = []
            for t, term in enumerate(poly):
                if not (isinstance(term, list) and len(term) == 3):
                    raise ParseError(f"{where}.poly[{t}]", "expected an [i, j, coef] term")
                i, j, coef = term
                if not (isinstance(i, int) and isinstance(j, int)):
                    raise ParseError(f"{where}.poly[{t}]", "exponents must be integers")
                terms.append((i, j, _number(coef, f"{where}.poly[{t}]")))
            outer = parse_scalar_fn(_field(obj, "outer", where), f"{where}.outer")
            return PolyConvex(tuple(terms), outer)
        if kind == "min_effort":
            return MinEffort(parse_scalar_fn(_field(obj, "h", where), f"{where}.h"))
        if kind == "max_effort":
            return MaxEffort(parse_scalar_fn(_field(obj, "h", where), f"{where}.h"))
    except ParseError:
        raise
    except ValueError as e:
        raise ParseError(where, str(e)) from e
    raise ParseError(f"{where}.type", f"unknown reward type {kind!r}")


def game_from_dict(data: Any) -> Game:
    nodes_raw = _field(data, "nodes", "$")
    edges_raw = _field(data, "edges", "$")
    if not isinstance(nodes_raw, list):
        raise ParseError("nodes", "expected a list")
    if not isinstance(edges_raw, list):
        raise ParseError("edges", "expected a list")
    nodes: List[Node] = []
    seen_nodes = set()
    for i, raw in enumerate(nodes_raw):
        where = f"nodes[{i}]"
        node_id = _field(raw, "id", where)
        budget = _number(_field(raw, "budget", where), f"{where}.budget")
        if budget < 0:
            raise ParseError(f"{where}.budget", "negative budget")
        if node_id in seen_nodes:
            raise ParseError(f"{where}.id", f"duplicate node {node_id!r}")
        seen_nodes.add(node_id)
        try:
            nodes.append(Node(node_id, budget))
        except ValueError as e:
            raise ParseError(where, str(e)) from e
    edges: List[Edge] = []
    seen_edges, seen_pairs = set(), set()
    for i, raw in enumerate(edges_raw):
        where = f"edges[{i}]"
        edge_id = _field(raw, "id", where)
        u, v = _field(raw, "u", where), _field(raw, "v", where)
        for end, key in ((u, "u"), (v, "v")):
            if end not in seen_nodes:
                raise ParseError(f"{where}.{key}", f"unknown node {end!r}")
        pair = frozenset((u, v))
        if edge_id in seen_edges:
            raise ParseError(f"{where}.id", f"duplicate edge id {edge_id!r}")
        if pair in seen_pairs:
            raise ParseError(where, f"duplicate edge between {u!r} and {v!r}")
        seen_edges.add(edge_id)
        seen_pairs.add(pair)
        reward = parse_reward(_field(raw, "reward", where), f"{where}.reward")
        try:
            edges.append(Edge(edge_id, u, v, reward))
        except ValueError as e:
            raise ParseError(where, str(e)) from e
    return Game(tuple(nodes), tuple(edges))


def game_to_dict(game: Game) -> Dict[str, Any]:
    return {
        "nodes": [{"id": n.id, "budget": n.budget} for n in game.nodes],
        "edges": [
            {"id": e.id, "u": e.u, "v": e.v, "reward": e.reward.to_dict()} for e in game.edges
        ],
    }


def load_game(data: Source) -> Game:
    """Parse Game JSON; every schema problem raises ParseError with a location."""
    return game_from_dict(_decode(data, "game"))


def save_game(game: Game) -> bytes:
    """Canonical, byte-stable Game JSON."""
    return (json.dumps(game_to_dict(game), indent=2) + "\n").encode("utf-8")


def load_profile(data: Source, game: Game = None) -> Profile:
    """
    Parse Profile JSON ``{"node": {"edge": effort}}``.

    When ``game`` is given, unknown nodes and non-incident edges are parse
    errors as well.
    """
    raw = _decode(data, "profile")
    if not isinstance(raw, dict):
        raise ParseError("$", "expected an object of node -> {edge: effort}")
    efforts: Dict[str, Dict[str, float]] = {}
    for node, alloc in raw.items():
        if not isinstance(alloc, dict):
            raise ParseError(node, "expected an object of edge -> effort")
        if game is not None and not game.has_node(node):
            raise ParseError(node, f"unknown node {node!r}")
        incident = {e.id for e in game.incident(node)} if game is not None else None
        row = {}
        for edge, amount in alloc.items():
            value = _number(amount, f"{node}.{edge}")
            if value < 0:
                raise ParseError(f"{node}.{edge}", "negative effort")
            if incident is not None and edge not in incident:
                raise ParseError(f"{node}.{edge}", f"edge {edge!r} is not incident to {node!r}")
            row[edge] = value
        efforts[node] = row
    return Profile(efforts)


def save_profile(profile: Profile) -> bytes:
    return (json.dumps(profile.to_dict(), indent=2, sort_keys=True) + "\n").encode("utf-8")


def bytes_hash(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def game_hash(game: Game) -> str:
    return bytes_hash(save_game(game))


def to_jsonable(obj: Any) -> Any:
    """Plain JSON data with floats rounded to 12 significant digits."""
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return float(f"{obj:.{SIGNIFICANT_DIGITS}g}")
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_payload(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True)


def trajectory_lines(trajectory: Trajectory) -> Iterator[str]:
    """Header object, one object per round, then the verdict object."""
    yield dumps_payload(trajectory.header())
    for record in trajectory.rounds:
        yield dumps_payload({"type": "round", **record.to_dict()})
    terminal = {
        "type": "verdict",
        "certified": trajectory.certified,
        "verification": trajectory.verification,
        "discrepancy": trajectory.discrepancy,
    }
    if trajectory.verdict is not None:
        terminal.update(trajectory.verdict.to_dict())
    yield dumps_payload(terminal)


def write_trajectory(trajectory: Trajectory, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for line in trajectory_lines(trajectory):
            handle.write(line + "\n")
