"""
model/entity/reward.py
----------------------
Symmetric edge reward functions f_e(x, y).

A closed family of variants, so every class predicate is decided from the
structure rather than by sampling:

- WeightedSum(c)         c*(x + y)
- WeightedProduct(c)     c*x*y
- PolyConvex(poly, h)    h(p(x, y)), p symmetric with positive coefficients
- MinEffort(h)           h(min(x, y))
- MaxEffort(h)           h(max(x, y))

Partial derivatives are taken in the first argument; by symmetry the
second argument's partials follow by swapping.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Dict, Tuple

from model.entity.scalar_fn import ScalarFn, Shape
from model.tools.validators import positive_validator


class Reward(ABC):
    """Edge reward paid to both endpoints."""

    family: str = ""

    @abstractmethod
    def value(self, x: float, y: float) -> float: ...

    @abstractmethod
    def partial_right(self, x: float, y: float) -> float:
        """Right-derivative of f(., y) at x."""

    @abstractmethod
    def partial_left(self, x: float, y: float) -> float:
        """Left-derivative of f(., y) at x."""

    @abstractmethod
    def own_shape(self, y: float) -> Shape:
        """Shape of x -> f(x, y) with the partner's effort held at y."""

    def max_reward(self, bu: float, bv: float) -> float:
        """c_{u,v} = f(B_u, B_v)."""
        return self.value(bu, bv)

    @property
    def in_c(self) -> bool:
        """Coordinate-convex (class C)."""
        return False

    @property
    def in_c_strict(self) -> bool:
        """Strictly coordinate-convex (class C')."""
        return False

    @property
    def in_c0(self) -> bool:
        """In C and zero whenever one argument is zero (class C0)."""
        return False

    @property
    def in_p(self) -> bool:
        """Convex transform of a positive symmetric polynomial (class P)."""
        return False

    @property
    def mixed_partials_nonnegative(self) -> bool:
        return False

    @property
    def scalar(self) -> ScalarFn:
        raise AttributeError(f"{self.family} reward has no scalar function")

    def __call__(self, x: float, y: float) -> float:
        return self.value(x, y)

    @abstractmethod
    def to_dict(self) -> Dict: ...


@dataclass(frozen=True)
class WeightedSum(Reward):
    c: float
    family: str = field(default="weighted_sum", init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", positive_validator(self.c, "weighted_sum constant must be > 0"))

    def value(self, x: float, y: float) -> float:
        return self.c * (x + y)

    def partial_right(self, x: float, y: float) -> float:
        return self.c

    def partial_left(self, x: float, y: float) -> float:
        return self.c

    def own_shape(self, y: float) -> Shape:
        return Shape.LINEAR

    in_c = property(lambda self: True)
    in_p = property(lambda self: True)
    mixed_partials_nonnegative = property(lambda self: True)

    def to_dict(self) -> Dict:
        return {"type": "weighted_sum", "c": self.c}


@dataclass(frozen=True)
class WeightedProduct(Reward):
    c: float
    family: str = field(default="weighted_product", init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "c", positive_validator(self.c, "weighted_product constant must be > 0")
        )

    def value(self, x: float, y: float) -> float:
        return self.c * x * y

    def partial_right(self, x: float, y: float) -> float:
        return self.c * y

    def partial_left(self, x: float, y: float) -> float:
        return self.c * y

    def own_shape(self, y: float) -> Shape:
        return Shape.LINEAR

    in_c = property(lambda self: True)
    in_c0 = property(lambda self: True)
    in_p = property(lambda self: True)
    mixed_partials_nonnegative = property(lambda self: True)

    def to_dict(self) -> Dict:
        return {"type": "weighted_product", "c": self.c}


Monomial = Tuple[int, int, float]


@dataclass(frozen=True)
class PolyConvex(Reward):
    """
    h(p(x, y)) with p = sum coef * x**i * y**j.

    ``poly`` is stored sorted, with (i, j) and (j, i) carrying the same
    coefficient. A convex outer h puts the reward in class P. A concave
    outer h is admitted only when every monomial has degree <= 1 in each
    variable, which keeps the reward coordinate-concave (sqrt(xy) style).
    """

    poly: Tuple[Monomial, ...]
    outer: ScalarFn
    family: str = field(default="poly_convex", init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        coefs: Dict[Tuple[int, int], float] = {}
        for term in self.poly:
            i, j, coef = term
            if not (isinstance(i, int) and isinstance(j, int) and i >= 0 and j >= 0):
                raise ValueError("polynomial exponents must be nonnegative integers")
            if i == 0 and j == 0:
                raise ValueError("polynomial must not have a constant term")
            if (i, j) in coefs:
                raise ValueError(f"duplicate monomial x^{i} y^{j}")
            coefs[(i, j)] = positive_validator(coef, "polynomial coefficients must be > 0")
        if not coefs:
            raise ValueError("polynomial must have at least one monomial")
        for (i, j), coef in coefs.items():
            if coefs.get((j, i)) != coef:
                raise ValueError(f"polynomial is not symmetric in x^{i} y^{j}")
        shape = self.outer.shape
        if not shape.convex:
            if not shape.concave:
                raise ValueError("outer function must be convex or concave")
            if any(i > 1 for i, _ in coefs):
                raise ValueError("a concave outer function needs degree <= 1 in each variable")
        object.__setattr__(self, "poly", tuple(sorted((i, j, c) for (i, j), c in coefs.items())))

    def p(self, x: float, y: float) -> float:
        return sum(c * x ** i * y ** j for i, j, c in self.poly)

    def p_x(self, x: float, y: float) -> float:
        return sum(c * i * x ** (i - 1) * y ** j for i, j, c in self.poly if i > 0)

    def value(self, x: float, y: float) -> float:
        return self.outer.value(self.p(x, y))

    def _chain(self, outer_slope: float, x: float, y: float) -> float:
        px = self.p_x(x, y)
        if px == 0:
            return 0.0
        return outer_slope * px

    def partial_right(self, x: float, y: float) -> float:
        return self._chain(self.outer.right_derivative(self.p(x, y)), x, y)

    def partial_left(self, x: float, y: float) -> float:
        if x <= 0:
            return self.partial_right(x, y)
        return self._chain(self.outer.left_derivative(self.p(x, y)), x, y)

    @property
    def max_x_degree(self) -> int:
        return max(i for i, _, _ in self.poly)

    def own_shape(self, y: float) -> Shape:
        shape = self.outer.shape
        if shape == Shape.LINEAR:
            return Shape.LINEAR if self.max_x_degree <= 1 else Shape.CONVEX
        return Shape.CONVEX if shape.convex else Shape.CONCAVE

    @property
    def in_c(self) -> bool:
        return self.outer.shape.convex

    @property
    def in_c_strict(self) -> bool:
        return self.in_c and (
            self.outer.shape == Shape.STRICTLY_CONVEX or self.max_x_degree >= 2
        )

    @property
    def in_c0(self) -> bool:
        return self.in_c and all(i >= 1 and j >= 1 for i, j, _ in self.poly)

    @property
    def in_p(self) -> bool:
        return self.in_c

    @property
    def mixed_partials_nonnegative(self) -> bool:
        return self.in_c

    @property
    def scalar(self) -> ScalarFn:
        return self.outer

    def to_dict(self) -> Dict:
        return {
            "type": "poly_convex",
            "poly": [[i, j, c] for i, j, c in self.poly],
            "outer": self.outer.to_dict(),
        }


@dataclass(frozen=True)
class MinEffort(Reward):
    h: ScalarFn
    family: str = field(default="min_effort", init=False, repr=False, compare=False)

    def value(self, x: float, y: float) -> float:
        return self.h.value(min(x, y))

    def partial_right(self, x: float, y: float) -> float:
        return self.h.right_derivative(x) if x < y else 0.0

    def partial_left(self, x: float, y: float) -> float:
        if x <= 0:
            return 0.0
        return self.h.left_derivative(x) if x <= y else 0.0

    def own_shape(self, y: float) -> Shape:
        # rising then flat: concave whenever h is, convex only if flat from 0
        if y <= 0:
            return Shape.LINEAR
        return Shape.CONCAVE if self.h.shape.concave else Shape.GENERAL

    @property
    def scalar(self) -> ScalarFn:
        return self.h

    def to_dict(self) -> Dict:
        return {"type": "min_effort", "h": self.h.to_dict()}


@dataclass(frozen=True)
class MaxEffort(Reward):
    h: ScalarFn
    family: str = field(default="max_effort", init=False, repr=False, compare=False)

    def value(self, x: float, y: float) -> float:
        return self.h.value(max(x, y))

    def partial_right(self, x: float, y: float) -> float:
        return self.h.right_derivative(x) if x >= y else 0.0

    def partial_left(self, x: float, y: float) -> float:
        if x <= 0:
            return self.partial_right(x, y)
        return self.h.left_derivative(x) if x > y else 0.0

    def own_shape(self, y: float) -> Shape:
        if self.h.shape.convex:
            return Shape.CONVEX
        return self.h.shape if y <= 0 else Shape.GENERAL

    @property
    def in_c(self) -> bool:
        return self.h.shape.convex

    @property
    def scalar(self) -> ScalarFn:
        return self.h

    def to_dict(self) -> Dict:
        return {"type": "max_effort", "h": self.h.to_dict()}


def is_min_concave(reward: Reward) -> bool:
    return isinstance(reward, MinEffort) and reward.h.shape.concave


def is_min_convex(reward: Reward) -> bool:
    return isinstance(reward, MinEffort) and reward.h.shape.convex


def is_min_linear(reward: Reward) -> bool:
    return isinstance(reward, MinEffort) and reward.h.shape == Shape.LINEAR


def linear_slope(reward: Reward) -> float:
    """c_e of a min-linear reward."""
    return reward.scalar.right_derivative(0.0)
