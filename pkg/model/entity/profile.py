"""
model/entity/profile.py
-----------------------
Profile: the strategy state s, one effort map per node.

Profiles are values: every update returns a new Profile. Zero efforts are
dropped on construction so equal states compare equal however they were
built.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, Iterator, Mapping, Tuple

from model.tools.errors import InfeasibleProfileError
from model.tools.validators import budget_validator

if TYPE_CHECKING:
    from model.entity.game import Game

FINGERPRINT_QUANTUM = 1e-9


@dataclass(frozen=True)
class Profile:
    efforts: Mapping[str, Mapping[str, float]]

    def __post_init__(self) -> None:
        clean: Dict[str, Dict[str, float]] = {}
        for node, alloc in self.efforts.items():
            row = {}
            for edge, amount in alloc.items():
                amount = budget_validator(amount, f"negative effort {amount!r} by {node} on {edge}")
                if amount > 0:
                    row[edge] = amount
            if row:
                clean[node] = row
        object.__setattr__(self, "efforts", clean)

    @classmethod
    def zero(cls) -> "Profile":
        return cls({})

    def effort(self, node: str, edge: str) -> float:
        return self.efforts.get(node, {}).get(edge, 0.0)

    def strategy(self, node: str) -> Dict[str, float]:
        """Copy of the node's allocation (nonzero entries only)."""
        return dict(self.efforts.get(node, {}))

    def spent(self, node: str) -> float:
        return sum(self.efforts.get(node, {}).values())

    def with_strategy(self, node: str, allocation: Mapping[str, float]) -> "Profile":
        """Replace one node's whole allocation."""
        return self.with_strategies({node: allocation})

    def with_strategies(self, strategies: Mapping[str, Mapping[str, float]]) -> "Profile":
        merged = {v: dict(a) for v, a in self.efforts.items()}
        for node, alloc in strategies.items():
            merged[node] = dict(alloc)
        return Profile(merged)

    def items(self) -> Iterator[Tuple[str, str, float]]:
        for node in sorted(self.efforts):
            for edge in sorted(self.efforts[node]):
                yield node, edge, self.efforts[node][edge]

    def check_feasible(self, game: "Game", tol: float = 1e-9) -> "Profile":
        """
        Raise InfeasibleProfileError unless every effort sits on an incident
        edge and every node stays within B_v + tol.
        """
        for node, alloc in self.efforts.items():
            if not game.has_node(node):
                raise InfeasibleProfileError(f"profile names unknown node {node}")
            incident = {e.id for e in game.incident(node)}
            for edge in alloc:
                if edge not in incident:
                    raise InfeasibleProfileError(
                        f"node {node} puts effort on non-incident edge {edge}"
                    )
            budget = game.budget(node)
            if sum(alloc.values()) > budget + tol:
                raise InfeasibleProfileError(
                    f"node {node} spends {sum(alloc.values()):.12g} > budget {budget:.12g}"
                )
        return self

    def fingerprint(self, quantum: float = FINGERPRINT_QUANTUM) -> str:
        """sha256 over efforts rounded to multiples of ``quantum``."""
        digest = hashlib.sha256()
        for node, edge, amount in self.items():
            q = round(amount / quantum)
            if q:
                digest.update(f"{node}\x1f{edge}\x1f{q}\x1e".encode("utf-8"))
        return digest.hexdigest()

    def to_dict(self) -> Dict[str, Dict[str, float]]:
        return {node: dict(sorted(alloc.items())) for node, alloc in sorted(self.efforts.items())}
