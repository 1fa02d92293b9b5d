"""
model/entity/results.py
-----------------------
Result records returned by the controllers.

Each record knows how to render itself as a plain dict; number formatting
for output happens in model/da/codec.py.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from model.tools.validators import resolution_validator


class BRKind(str, Enum):
    SINGLE_EDGE_VERTEX = "single-edge-vertex"
    WATER_FILLING = "water-filling"
    ARGMAX_SPREAD = "argmax-spread"
    GRID_APPROXIMATE = "grid-approximate"


@dataclass(frozen=True)
class BestResponse:
    """
    A node's best allocation against fixed neighbours.

    ``tied_edges`` lists the other single-edge vertices that reach the
    same value, when the vertex enumeration had to break a tie.
    """

    node: str
    allocation: Dict[str, float]
    value: float
    kind: BRKind
    tied_edges: Tuple[str, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "node": self.node,
            "allocation": dict(sorted(self.allocation.items())),
            "value": self.value,
            "kind": self.kind.value,
            "tied_edges": list(self.tied_edges),
        }


@dataclass(frozen=True)
class Deviation:
    """Replacement strategies for one or two nodes with their utility change."""

    nodes: Tuple[str, ...]
    strategies: Dict[str, Dict[str, float]]
    before: Dict[str, float]
    after: Dict[str, float]

    @property
    def gains(self) -> Dict[str, float]:
        return {v: self.after[v] - self.before[v] for v in self.nodes}

    @property
    def min_gain(self) -> float:
        return min(self.gains.values())

    def improving(self, tol: float) -> bool:
        return all(g > tol for g in self.gains.values())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "nodes": list(self.nodes),
            "strategies": {v: dict(sorted(self.strategies[v].items())) for v in self.nodes},
            "before": {v: self.before[v] for v in self.nodes},
            "after": {v: self.after[v] for v in self.nodes},
            "gains": self.gains,
        }


class Verdict(str, Enum):
    STABLE = "Stable"
    UNILATERAL = "UnilateralDeviation"
    BILATERAL = "BilateralDeviation"
    STABLE_AT_RESOLUTION = "StableAtResolution"


class Method(str, Enum):
    EXACT = "exact-class"
    SCAN = "parametric-scan"
    GRID = "grid"


@dataclass(frozen=True)
class VerifyReport:
    verdict: Verdict
    method: Method
    witness: Optional[Deviation] = None
    resolution: Optional[int] = None
    notes: Tuple[str, ...] = ()

    @property
    def stable(self) -> bool:
        return self.verdict in (Verdict.STABLE, Verdict.STABLE_AT_RESOLUTION)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict.value,
            "method": self.method.value,
            "witness": self.witness.to_dict() if self.witness else None,
            "resolution": self.resolution,
            "notes": list(self.notes),
        }


class Tightness(str, Enum):
    TIGHT = "tight"
    HALF_SLACK = "half-slack"
    SLACK = "slack"


@dataclass(frozen=True)
class EdgeTightness:
    labels: Dict[str, Tightness]

    def edges_with(self, label: Tightness) -> List[str]:
        return [e for e, lab in self.labels.items() if lab == label]

    @property
    def all_tight(self) -> bool:
        return all(lab == Tightness.TIGHT for lab in self.labels.values())

    def to_dict(self) -> Dict[str, str]:
        return {e: lab.value for e, lab in self.labels.items()}


class SolveStatus(str, Enum):
    EQUILIBRIUM = "Equilibrium"
    NO_EQUILIBRIUM = "NoEquilibrium"
    UNSUPPORTED = "Unsupported"


@dataclass(frozen=True)
class SolveOutcome:
    """
    Result of an equilibrium construction or decision algorithm.

    ``witness`` is a rendered violated condition for NoEquilibrium and the
    reason for Unsupported. ``facts`` carries algorithm-specific numbers
    (welfare, PoA facts, the potential trace of an ascent).
    """

    status: SolveStatus
    algorithm: str
    profile: Optional[Any] = None
    witness: Optional[str] = None
    witness_edge: Optional[str] = None
    strong: bool = False
    unique: bool = False
    approximate: bool = False
    facts: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "status": self.status.value,
            "algorithm": self.algorithm,
            "profile": self.profile.to_dict() if self.profile is not None else None,
            "witness": self.witness,
            "witness_edge": self.witness_edge,
            "strong_equilibrium": self.strong,
            "unique": self.unique,
            "approximate": self.approximate,
            "facts": self.facts,
        }


@dataclass(frozen=True)
class DualCertificate:
    """
    LP-dual values derived from a stable min-linear profile.

    ``y`` may contain math.inf for zero-budget nodes with rewarded edges;
    ``infinite_nodes`` lists them.
    """

    y: Dict[str, float]
    y_doubled: Dict[str, float]
    primal_value: float
    dual_value: float
    dual_feasible: bool
    infinite_nodes: Tuple[str, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "y": self.y,
            "y_doubled": self.y_doubled,
            "primal_value": self.primal_value,
            "dual_value": self.dual_value,
            "dual_feasible": self.dual_feasible,
            "infinite_nodes": list(self.infinite_nodes),
        }


@dataclass(frozen=True)
class GridSpec:
    """Efforts restricted to multiples of B_v / resolution per node."""

    resolution: int = 16
    cap: int = 2_000_000

    def __post_init__(self) -> None:
        resolution_validator(self.resolution, "grid resolution must be a positive integer")
        resolution_validator(self.cap, "grid cap must be a positive integer")


class TerminalKind(str, Enum):
    CONVERGED = "Converged"
    CYCLE = "CycleDetected"
    EXHAUSTED = "RoundBudgetExhausted"


@dataclass(frozen=True)
class TerminalVerdict:
    kind: TerminalKind
    round: int
    period: Optional[int] = None
    first_visit: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.kind.value,
            "round": self.round,
            "period": self.period,
            "first_visit": self.first_visit,
        }


@dataclass(frozen=True)
class RoundRecord:
    index: int
    units: Tuple[Tuple[str, ...], ...]
    kinds: Tuple[str, ...]
    deltas: Dict[str, float]
    fingerprint: str

    def to_dict(self) -> Dict[str, Any]:
        return {
            "round": self.index,
            "units": [list(u) for u in self.units],
            "kinds": list(self.kinds),
            "deltas": dict(sorted(self.deltas.items())),
            "fingerprint": self.fingerprint,
        }


@dataclass
class Trajectory:
    seed: int
    mode: str
    rng: str
    game_hash: str
    rounds: List[RoundRecord] = field(default_factory=list)
    verdict: Optional[TerminalVerdict] = None
    final_profile: Optional[Any] = None
    certified: Optional[bool] = None
    verification: Optional[str] = None
    discrepancy: Optional[str] = None

    def header(self) -> Dict[str, Any]:
        return {
            "type": "header",
            "seed": self.seed,
            "mode": self.mode,
            "rng": self.rng,
            "game_hash": self.game_hash,
        }

    def summary(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "mode": self.mode,
            "rng": self.rng,
            "game_hash": self.game_hash,
            "rounds": len(self.rounds),
            "moves": sum(1 for r in self.rounds for kind in r.kinds if kind != "none"),
            "terminal": self.verdict.to_dict() if self.verdict else None,
            "certified": self.certified,
            "verification": self.verification,
            "discrepancy": self.discrepancy,
            "final_profile": self.final_profile.to_dict() if self.final_profile else None,
        }


@dataclass(frozen=True)
class CnfFormula:
    """3-CNF with k variables; literals are signed 1-based variable indices."""

    k: int
    clauses: Tuple[Tuple[int, int, int], ...]

    def __post_init__(self) -> None:
        resolution_validator(self.k, "variable count must be a positive integer")
        if not self.clauses:
            raise ValueError("formula has no clauses")
        clauses = []
        for index, clause in enumerate(self.clauses):
            clause = tuple(clause)
            if len(clause) != 3:
                raise ValueError(f"clause {index + 1} has {len(clause)} literals, expected 3")
            for lit in clause:
                if not isinstance(lit, int) or lit == 0 or abs(lit) > self.k:
                    raise ValueError(f"clause {index + 1} has literal {lit!r} outside 1..{self.k}")
            clauses.append(clause)
        object.__setattr__(self, "clauses", tuple(clauses))

    @property
    def l(self) -> int:
        return len(self.clauses)

    def satisfied_by(self, assignment: Dict[int, bool]) -> bool:
        return all(
            any(assignment[abs(lit)] == (lit > 0) for lit in clause) for clause in self.clauses
        )


@dataclass(frozen=True)
class RunReport:
    """What a CLI command produced; ``wall_time`` never enters the payload."""

    command: str
    input_hashes: Dict[str, str]
    config: Dict[str, Any]
    result: Dict[str, Any]
    exit_code: int
    wall_time: float = 0.0

    def payload(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "input_hashes": dict(sorted(self.input_hashes.items())),
            "config": dict(sorted(self.config.items())),
            "result": self.result,
            "exit_code": self.exit_code,
        }
