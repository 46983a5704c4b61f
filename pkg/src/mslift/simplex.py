"""Small dense simplex solver for inequality-constrained maximization.

Solves ``max c.y`` subject to ``A y <= b`` with free variables ``y`` and
``b >= 0``, which is the shape of the per-column flux maximization: the
origin is feasible, so a single primal phase suffices. Free variables are
split into positive and negative parts and the tableau is processed densely
with Bland's rule, which cannot cycle.

This is deliberately self-contained: it certifies closed-form energies and
must not share code with them.
"""

from __future__ import annotations

import numpy as np

from .errors import SimplexError


def solve_max(c, a_ub, b_ub, max_iter: int = 20000) -> tuple[float, np.ndarray]:
    """Maximize ``c.y`` over ``{y : a_ub @ y <= b_ub}`` with ``b_ub >= 0``.

    Returns ``(value, y)``. Raises ``SimplexError`` on unbounded problems or
    iteration-cap overruns.
    """
    c = np.asarray(c, dtype=float)
    a = np.atleast_2d(np.asarray(a_ub, dtype=float))
    b = np.asarray(b_ub, dtype=float)
    n = c.size
    if n == 0:
        return 0.0, np.zeros(0)
    if a.shape[1] != n or a.shape[0] != b.size:
        raise SimplexError("inconsistent LP dimensions")
    if np.any(b < 0):
        raise SimplexError("solve_max requires b_ub >= 0 (feasible origin)")

    m = a.shape[0]
    # split free variables: y = y+ - y-; columns [y+, y-, slacks]
    ncols = 2 * n + m
    tableau = np.zeros((m + 1, ncols + 1))
    tableau[:m, :n] = a
    tableau[:m, n:2 * n] = -a
    tableau[:m, 2 * n:2 * n + m] = np.eye(m)
    tableau[:m, -1] = b
    tableau[m, :n] = -c
    tableau[m, n:2 * n] = c
    basis = list(range(2 * n, 2 * n + m))

    for _ in range(max_iter):
        obj = tableau[m, :ncols]
        # Bland: first improving column
        candidates = np.nonzero(obj < -1e-12)[0]
        if candidates.size == 0:
            break
        col = int(candidates[0])
        ratios = np.full(m, np.inf)
        positive = tableau[:m, col] > 1e-12
        ratios[positive] = tableau[:m, -1][positive] / tableau[:m, col][positive]
        if not np.isfinite(ratios).any():
            raise SimplexError("LP is unbounded")
        best = np.min(ratios)
        # Bland on ties: lowest basis index among minimal ratios
        tied = np.nonzero(ratios <= best * (1 + 1e-12) + 1e-300)[0]
        row = int(min(tied, key=lambda r: basis[r]))
        pivot = tableau[row, col]
        tableau[row, :] /= pivot
        for r in range(m + 1):
            if r != row and tableau[r, col] != 0.0:
                tableau[r, :] -= tableau[r, col] * tableau[row, :]
        basis[row] = col
    else:
        raise SimplexError(f"simplex did not converge within {max_iter} pivots")

    x = np.zeros(ncols)
    for r, j in enumerate(basis):
        x[j] = tableau[r, -1]
    y = x[:n] - x[n:2 * n]
    return float(tableau[m, -1]), y
