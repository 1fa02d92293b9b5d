"""
model/entity/game.py
--------------------
Game: a simple undirected graph with per-node budgets and per-edge rewards.

Games are immutable once built. Ids are compared in natural order
("e2" < "e10"), which is the tie-breaking order used by every algorithm.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, Optional, Tuple

from model.entity.reward import Reward
from model.tools.errors import GameLookupError
from model.tools.validators import budget_validator, identifier_validator


def natural_key(identifier: str) -> Tuple:
    """Sort key that orders embedded integers numerically."""
    return tuple(
        (0, int(part), "") if part.isdigit() else (1, 0, part)
        for part in re.split(r"(\d+)", identifier)
        if part
    )


@dataclass(frozen=True)
class Node:
    id: str
    budget: float

    def __post_init__(self) -> None:
        identifier_validator(self.id, f"Invalid node id {self.id!r}!")
        object.__setattr__(
            self, "budget", budget_validator(self.budget, f"negative budget for node {self.id}")
        )


@dataclass(frozen=True)
class Edge:
    id: str
    u: str
    v: str
    reward: Reward

    def __post_init__(self) -> None:
        identifier_validator(self.id, f"Invalid edge id {self.id!r}!")
        if self.u == self.v:
            raise ValueError(f"self-loop on edge {self.id}")

    @property
    def endpoints(self) -> Tuple[str, str]:
        return self.u, self.v

    def other(self, node: str) -> str:
        if node == self.u:
            return self.v
        if node == self.v:
            return self.u
        raise GameLookupError(f"node {node} is not an endpoint of edge {self.id}")


@dataclass(frozen=True)
class Game:
    """
    Network contribution game.

    Attributes:
        nodes (Tuple[Node, ...]): players in input order.
        edges (Tuple[Edge, ...]): edges in input order.
    """

    nodes: Tuple[Node, ...]
    edges: Tuple[Edge, ...]
    _nodes: Dict[str, Node] = field(default=None, init=False, repr=False, compare=False)
    _edges: Dict[str, Edge] = field(default=None, init=False, repr=False, compare=False)
    _incident: Dict[str, Tuple[Edge, ...]] = field(
        default=None, init=False, repr=False, compare=False
    )
    _pairs: Dict[frozenset, Edge] = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))
        nodes: Dict[str, Node] = {}
        for node in self.nodes:
            if node.id in nodes:
                raise ValueError(f"duplicate node id {node.id}")
            nodes[node.id] = node
        edges: Dict[str, Edge] = {}
        pairs: Dict[frozenset, Edge] = {}
        incident: Dict[str, list] = {v: [] for v in nodes}
        for edge in self.edges:
            if edge.id in edges:
                raise ValueError(f"duplicate edge id {edge.id}")
            for end in edge.endpoints:
                if end not in nodes:
                    raise ValueError(f"edge {edge.id} references unknown node {end}")
            pair = frozenset(edge.endpoints)
            if pair in pairs:
                raise ValueError(
                    f"duplicate edge between {edge.u} and {edge.v} ({pairs[pair].id}, {edge.id})"
                )
            edges[edge.id] = edge
            pairs[pair] = edge
            incident[edge.u].append(edge)
            incident[edge.v].append(edge)
        object.__setattr__(self, "_nodes", nodes)
        object.__setattr__(self, "_edges", edges)
        object.__setattr__(self, "_pairs", pairs)
        object.__setattr__(
            self,
            "_incident",
            {v: tuple(sorted(es, key=lambda e: natural_key(e.id))) for v, es in incident.items()},
        )

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def node_ids(self) -> Tuple[str, ...]:
        """Node ids in natural order."""
        return tuple(sorted(self._nodes, key=natural_key))

    @property
    def edge_ids(self) -> Tuple[str, ...]:
        """Edge ids in natural order."""
        return tuple(sorted(self._edges, key=natural_key))

    def sorted_edges(self) -> Tuple[Edge, ...]:
        return tuple(self._edges[e] for e in self.edge_ids)

    def node(self, node_id: str) -> Node:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise GameLookupError(f"unknown node {node_id}") from None

    def edge(self, edge_id: str) -> Edge:
        try:
            return self._edges[edge_id]
        except KeyError:
            raise GameLookupError(f"unknown edge {edge_id}") from None

    def has_node(self, node_id: str) -> bool:
        return node_id in self._nodes

    def budget(self, node_id: str) -> float:
        return self.node(node_id).budget

    def incident(self, node_id: str) -> Tuple[Edge, ...]:
        """E_v in natural edge order."""
        self.node(node_id)
        return self._incident[node_id]

    def degree(self, node_id: str) -> int:
        return len(self.incident(node_id))

    def neighbors(self, node_id: str) -> Tuple[str, ...]:
        return tuple(e.other(node_id) for e in self.incident(node_id))

    def edge_between(self, u: str, v: str) -> Optional[Edge]:
        return self._pairs.get(frozenset((u, v)))

    def require_edge_between(self, u: str, v: str) -> Edge:
        edge = self.edge_between(u, v)
        if edge is None:
            raise GameLookupError(f"nodes {u} and {v} are not adjacent")
        return edge

    @property
    def uniform_budgets(self) -> bool:
        budgets = {n.budget for n in self.nodes}
        return len(budgets) <= 1

    def rewards(self) -> Iterator[Reward]:
        return (e.reward for e in self.edges)

    def all_rewards(self, predicate: Callable[[Reward], bool]) -> bool:
        return all(predicate(r) for r in self.rewards())

    def max_reward(self, edge: Edge) -> float:
        return edge.reward.max_reward(self.budget(edge.u), self.budget(edge.v))
