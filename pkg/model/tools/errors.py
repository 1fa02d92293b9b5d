"""
model/tools/errors.py
---------------------
Exception hierarchy shared by every layer.

Input problems subclass ValueError so that callers written against the
validators (which raise ValueError) keep working unchanged.
"""

from typing import Optional


class ContribNetError(Exception):
    """Root of all domain errors."""


class ParseError(ContribNetError, ValueError):
    """
    Malformed game, profile or CNF input.

    Attributes:
        location (str): JSON path (``edges[2].reward.c``) or ``line N``.
    """

    def __init__(self, location: str, message: str) -> None:
        self.location = location
        super().__init__(f"{location}: {message}")


class InfeasibleProfileError(ContribNetError, ValueError):
    """A profile breaks a budget or puts effort on a non-incident edge."""


class GameLookupError(ContribNetError, LookupError):
    """Unknown node id, unknown edge id or a non-adjacent pair."""

    def __str__(self) -> str:
        # LookupError would quote the message like a dict key
        return str(self.args[0]) if self.args else ""


class UnsupportedClassError(ContribNetError):
    """The requested algorithm does not cover the game's reward class."""


class GridCapExceeded(ContribNetError):
    """
    Lattice enumeration refused.

    Attributes:
        required (int): number of lattice points the request needs.
        cap (int): configured enumeration cap.
    """

    def __init__(self, required: int, cap: int, what: str = "profiles") -> None:
        self.required = required
        self.cap = cap
        super().__init__(
            f"grid needs {required} {what}, cap is {cap}; raise the cap to at least {required}"
        )


class SolverInternalError(ContribNetError, RuntimeError):
    """An invariant that the algorithms rely on did not hold."""


class StabilityRefused(ContribNetError):
    """An operation that needs a stable profile was handed an unstable one."""

    def __init__(self, message: str, verdict: Optional[str] = None) -> None:
        self.verdict = verdict
        super().__init__(message)
