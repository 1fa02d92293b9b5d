"""
controller/simplex.py
---------------------
Dense tableau simplex for max c^T x subject to A x <= b, x >= 0, b >= 0.

The origin is feasible under b >= 0, so a single phase suffices. Bland's
rule picks the entering and leaving variables, which rules out cycling on
the degenerate tableaus that matching-style LPs produce.
"""

from dataclasses import dataclass

import numpy as np

from model.tools.errors import SolverInternalError


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray
    value: float
    duals: np.ndarray
    pivots: int


def maximize(c, A, b, eps: float = 1e-12, max_pivots: int = 50_000) -> LPResult:
    """
    Solve max c^T x s.t. A x <= b, x >= 0.

    Args:
        c: objective, shape (n,).
        A: constraint matrix, shape (m, n).
        b: right-hand side, shape (m,), all entries >= 0.

    Returns:
        LPResult with the primal optimum and the row duals read off the
        slack columns of the final objective row.

    Raises:
        ValueError: negative right-hand side.
        SolverInternalError: unbounded LP or pivot limit reached.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float).reshape(-1, c.size)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if np.any(b < 0):
        raise ValueError("right-hand side must be nonnegative")
    if n == 0:
        return LPResult(np.zeros(0), 0.0, np.zeros(m), 0)

    # rows 0..m-1 constraints, last row reduced costs (-c), last column rhs
    tableau = np.zeros((m + 1, n + m + 1))
    tableau[:m, :n] = A
    tableau[:m, n : n + m] = np.eye(m)
    tableau[:m, -1] = b
    tableau[m, :n] = -c
    basis = list(range(n, n + m))

    pivots = 0
    while True:
        entering = next((j for j in range(n + m) if tableau[m, j] < -eps), None)
        if entering is None:
            break
        column = tableau[:m, entering]
        best_ratio, leaving = np.inf, None
        for i in range(m):
            if column[i] > eps:
                ratio = tableau[i, -1] / column[i]
                if ratio < best_ratio - eps or (
                    abs(ratio - best_ratio) <= eps and basis[i] < basis[leaving]
                ):
                    best_ratio, leaving = ratio, i
        if leaving is None:
            raise SolverInternalError("LP is unbounded")
        tableau[leaving] /= tableau[leaving, entering]
        for i in range(m + 1):
            if i != leaving and tableau[i, entering] != 0:
                tableau[i] -= tableau[i, entering] * tableau[leaving]
        basis[leaving] = entering
        pivots += 1
        if pivots > max_pivots:
            raise SolverInternalError(f"simplex exceeded {max_pivots} pivots")

    x = np.zeros(n + m)
    for i, var in enumerate(basis):
        x[var] = tableau[i, -1]
    return LPResult(
        x=np.clip(x[:n], 0.0, None),
        value=float(tableau[m, -1]),
        duals=tableau[m, n : n + m].copy(),
        pivots=pivots,
    )
