"""
model/entity/scalar_fn.py
-------------------------
One-dimensional reward transforms h with h(0) = 0.

Variants:
- Linear(a)               h(x) = a*x
- Power(a, k)             h(x) = a*x**k
- PiecewiseLinear(points) linear interpolation, last slope continues
- Truncated(inner, at)    h(x) = inner(min(x, at)), concave inner only

Besides value and one-sided derivatives each variant answers ``demand``:
the largest effort whose left-derivative still reaches a marginal level.
Water-filling is written against that query, so it is only defined for
concave (or linear) shapes.
"""

from __future__ import annotations

import bisect
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, Tuple

from model.tools.validators import budget_validator, positive_validator


class Shape(str, Enum):
    LINEAR = "linear"
    CONVEX = "convex"
    CONCAVE = "concave"
    STRICTLY_CONVEX = "strictly-convex"
    STRICTLY_CONCAVE = "strictly-concave"
    GENERAL = "general"

    @property
    def convex(self) -> bool:
        return self in (Shape.LINEAR, Shape.CONVEX, Shape.STRICTLY_CONVEX)

    @property
    def concave(self) -> bool:
        return self in (Shape.LINEAR, Shape.CONCAVE, Shape.STRICTLY_CONCAVE)


class ScalarFn(ABC):
    """Nondecreasing scalar function on [0, inf) with h(0) = 0."""

    kind: str = ""

    @abstractmethod
    def value(self, x: float) -> float: ...

    @abstractmethod
    def right_derivative(self, x: float) -> float: ...

    @abstractmethod
    def left_derivative(self, x: float) -> float: ...

    @property
    @abstractmethod
    def shape(self) -> Shape: ...

    def kinks(self) -> Tuple[float, ...]:
        """Effort values where the derivative jumps."""
        return ()

    def levels(self) -> Tuple[float, ...]:
        """Marginal levels at which ``demand`` jumps."""
        return ()

    def demand(self, level: float, strict: bool = False) -> float:
        """
        sup{x >= 0 : h'-(x) >= level} (or > level when strict).

        Only meaningful for concave shapes; returns math.inf when the
        marginal never drops below the level.
        """
        raise NotImplementedError(f"demand is undefined for {self.shape.value} {self.kind}")

    def derivative(self, x: float) -> float:
        """Left-derivative for x > 0, right-derivative at 0."""
        return self.left_derivative(x) if x > 0 else self.right_derivative(0.0)

    def __call__(self, x: float) -> float:
        return self.value(x)

    @abstractmethod
    def to_dict(self) -> Dict: ...


@dataclass(frozen=True)
class Linear(ScalarFn):
    a: float
    kind: str = field(default="linear", init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", positive_validator(self.a, "linear slope must be > 0"))

    def value(self, x: float) -> float:
        return self.a * x

    def right_derivative(self, x: float) -> float:
        return self.a

    def left_derivative(self, x: float) -> float:
        return self.a

    @property
    def shape(self) -> Shape:
        return Shape.LINEAR

    def levels(self) -> Tuple[float, ...]:
        return (self.a,)

    def demand(self, level: float, strict: bool = False) -> float:
        reaches = self.a > level if strict else self.a >= level
        return math.inf if reaches else 0.0

    def to_dict(self) -> Dict:
        return {"kind": "linear", "a": self.a}


@dataclass(frozen=True)
class Power(ScalarFn):
    """a * x**k; 0 < k < 1 is strictly concave, k > 1 strictly convex."""

    a: float
    k: float
    kind: str = field(default="power", init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", positive_validator(self.a, "power coefficient must be > 0"))
        object.__setattr__(self, "k", positive_validator(self.k, "power exponent must be > 0"))

    def value(self, x: float) -> float:
        return self.a * x ** self.k if x > 0 else 0.0

    def right_derivative(self, x: float) -> float:
        if x > 0:
            return self.a * self.k * x ** (self.k - 1.0)
        if self.k < 1:
            return math.inf
        return self.a if self.k == 1 else 0.0

    def left_derivative(self, x: float) -> float:
        return self.right_derivative(x)

    @property
    def shape(self) -> Shape:
        if self.k == 1:
            return Shape.LINEAR
        return Shape.STRICTLY_CONCAVE if self.k < 1 else Shape.STRICTLY_CONVEX

    def levels(self) -> Tuple[float, ...]:
        return (self.a,) if self.k == 1 else ()

    def demand(self, level: float, strict: bool = False) -> float:
        if self.k == 1:
            return Linear(self.a).demand(level, strict)
        if self.k > 1:
            return super().demand(level, strict)
        if level <= 0:
            return math.inf
        return (level / (self.a * self.k)) ** (1.0 / (self.k - 1.0))

    def to_dict(self) -> Dict:
        return {"kind": "power", "a": self.a, "k": self.k}


@dataclass(frozen=True)
class PiecewiseLinear(ScalarFn):
    """
    Interpolates increasing (x, value) points that start at (0, 0).

    Beyond the last point the last slope continues.
    """

    points: Tuple[Tuple[float, float], ...]
    kind: str = field(default="piecewise_linear", init=False, repr=False, compare=False)
    _xs: Tuple[float, ...] = field(default=(), init=False, repr=False, compare=False)
    _slopes: Tuple[float, ...] = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        points = tuple((float(x), float(y)) for x, y in self.points)
        if len(points) < 2:
            raise ValueError("piecewise-linear function needs at least two points")
        if points[0] != (0.0, 0.0):
            raise ValueError("piecewise-linear function must start at (0, 0)")
        slopes = []
        for (x0, y0), (x1, y1) in zip(points, points[1:]):
            if not x1 > x0:
                raise ValueError("piecewise-linear breakpoints must be strictly increasing in x")
            if y1 < y0:
                raise ValueError("piecewise-linear values must be nondecreasing")
            slopes.append((y1 - y0) / (x1 - x0))
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "_xs", tuple(x for x, _ in points))
        object.__setattr__(self, "_slopes", tuple(slopes))

    @property
    def slopes(self) -> Tuple[float, ...]:
        return self._slopes

    def _segment(self, x: float) -> int:
        # index i of the segment [x_i, x_{i+1}) that contains x
        i = bisect.bisect_right(self._xs, x) - 1
        return min(max(i, 0), len(self._slopes) - 1)

    def value(self, x: float) -> float:
        if x <= 0:
            return 0.0
        i = self._segment(x)
        x0, y0 = self.points[i]
        return y0 + self._slopes[i] * (x - x0)

    def right_derivative(self, x: float) -> float:
        return self._slopes[self._segment(x)]

    def left_derivative(self, x: float) -> float:
        if x <= 0:
            return self._slopes[0]
        i = bisect.bisect_left(self._xs, x) - 1
        return self._slopes[min(max(i, 0), len(self._slopes) - 1)]

    @property
    def shape(self) -> Shape:
        s = self._slopes
        if all(abs(a - b) <= 1e-15 * max(1.0, abs(a)) for a, b in zip(s, s[1:])):
            return Shape.LINEAR
        if all(a >= b for a, b in zip(s, s[1:])):
            return Shape.CONCAVE
        if all(a <= b for a, b in zip(s, s[1:])):
            return Shape.CONVEX
        return Shape.GENERAL

    def kinks(self) -> Tuple[float, ...]:
        return tuple(
            x for x, a, b in zip(self._xs[1:], self._slopes, self._slopes[1:]) if a != b
        )

    def levels(self) -> Tuple[float, ...]:
        return tuple(sorted(set(self._slopes), reverse=True))

    def demand(self, level: float, strict: bool = False) -> float:
        if not self.shape.concave:
            return super().demand(level, strict)
        end = 0.0
        for i, slope in enumerate(self._slopes):
            if not (slope > level if strict else slope >= level):
                return end
            end = self._xs[i + 1]
        return math.inf

    def to_dict(self) -> Dict:
        return {"kind": "piecewise_linear", "points": [list(p) for p in self.points]}


@dataclass(frozen=True)
class Truncated(ScalarFn):
    """inner(min(x, at)); the inner function must be concave or linear."""

    inner: ScalarFn
    at: float
    kind: str = field(default="truncated", init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "at", budget_validator(self.at, "truncation point must be >= 0"))
        if not self.inner.shape.concave:
            raise ValueError("only concave or linear functions can be truncated")

    def value(self, x: float) -> float:
        return self.inner.value(min(x, self.at))

    def right_derivative(self, x: float) -> float:
        return self.inner.right_derivative(x) if x < self.at else 0.0

    def left_derivative(self, x: float) -> float:
        if self.at <= 0:
            return 0.0
        return self.inner.left_derivative(x) if x <= self.at else 0.0

    @property
    def shape(self) -> Shape:
        return Shape.CONCAVE

    def kinks(self) -> Tuple[float, ...]:
        return tuple(x for x in self.inner.kinks() if x < self.at) + (self.at,)

    def levels(self) -> Tuple[float, ...]:
        return self.inner.levels() + (0.0,)

    def demand(self, level: float, strict: bool = False) -> float:
        if level < 0 or (level == 0 and not strict):
            return math.inf
        return min(self.at, self.inner.demand(level, strict))

    def to_dict(self) -> Dict:
        return {"kind": "truncated", "inner": self.inner.to_dict(), "at": self.at}


def truncate(fn: ScalarFn, at: float) -> ScalarFn:
    """Cap ``fn`` at ``at``, folding nested truncations."""
    if isinstance(fn, Truncated):
        return Truncated(fn.inner, min(fn.at, at))
    return Truncated(fn, at)


def shape_consistent(fn: ScalarFn, xs: Iterable[float], tol: float = 1e-9) -> bool:
    """
    Spot-check monotonicity and the declared shape on sample points.

    Convex requires h-(x) <= h+(x) <= h-(y) for sampled x < y; concave the
    mirror image.
    """
    pts = sorted(set(x for x in xs if x >= 0))
    values = [fn.value(x) for x in pts]
    if any(b < a - tol for a, b in zip(values, values[1:])):
        return False
    shape = fn.shape
    for x, y in zip(pts, pts[1:]):
        lx, rx, ly = fn.left_derivative(x), fn.right_derivative(x), fn.left_derivative(y)
        if x == 0:
            lx = rx
        if shape.convex and not (lx <= rx + tol and rx <= ly + tol):
            return False
        if shape.concave and not (lx + tol >= rx and rx + tol >= ly):
            return False
    return True
