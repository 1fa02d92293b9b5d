"""
model/tools/rng.py
------------------
Seeded random number generator for reproducible instances and dynamics.

Wraps random.Random (Mersenne Twister), whose output stream for a given
integer seed is identical on every platform and Python version that ships
it, so trajectories and generated games are portable artifacts.
"""

from __future__ import annotations

import math
import random
from typing import Sequence, TypeVar

T = TypeVar("T")


class SeededRNG:
    """A seeded random number generator for deterministic experiments."""

    algorithm: str = "mt19937"

    def __init__(self, seed: int = 0) -> None:
        self._seed = seed
        self._rng = random.Random(seed)

    @property
    def seed(self) -> int:
        """Get the seed."""
        return self._seed

    def reset(self, seed: int | None = None) -> None:
        """Reset the RNG, optionally with a new seed."""
        self._seed = seed if seed is not None else self._seed
        self._rng = random.Random(self._seed)

    def random(self) -> float:
        """Return a random float in [0, 1)."""
        return self._rng.random()

    def uniform(self, low: float, high: float) -> float:
        return self._rng.uniform(low, high)

    def log_uniform(self, low: float, high: float) -> float:
        """Return a float whose logarithm is uniform on [log low, log high]."""
        return math.exp(self._rng.uniform(math.log(low), math.log(high)))

    def randint(self, low: int, high: int) -> int:
        """Return an integer in [low, high]."""
        return self._rng.randint(low, high)

    def choice(self, seq: Sequence[T]) -> T:
        """Return a random element from a non-empty sequence."""
        return self._rng.choice(seq)

    def bernoulli(self, p: float) -> bool:
        """Return True with probability p."""
        return self._rng.random() < p

    def shuffle(self, items: list) -> None:
        self._rng.shuffle(items)

    def fork(self, suffix: int = 0) -> "SeededRNG":
        """Create a new RNG with a derived seed for an independent stream."""
        return SeededRNG(self._seed * 1_000_003 + suffix + 1)
