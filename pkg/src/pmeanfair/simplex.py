"""Small dense two-phase simplex solver.

Solves   max/min  c . x
         s.t.     A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0

via the standard tableau method with Bland's anti-cycling rule.  The
LPs in this package are tiny (at most a few thousand variables), so a
dense tableau with artificial variables in every row is plenty fast and
keeps the logic simple.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

_PIVOT_TOL = 1e-9
_FEAS_TOL = 1e-7


@dataclass(frozen=True)
class LpResult:
    x: np.ndarray
    value: float


def _pivot(T: np.ndarray, basis: list, row: int, col: int) -> None:
    T[row] /= T[row, col]
    piv = T[row].copy()
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, piv)
    T[row] = piv
    basis[row] = col


def _iterate(T: np.ndarray, basis: list, ncols: int) -> None:
    """Run minimization pivots until no reduced cost is negative.

    The objective row is T[-1]; candidate columns are [0, ncols).
    Bland's rule: smallest improving column, smallest basis row on ties.
    """
    nrows = T.shape[0] - 1
    while True:
        obj = T[-1, :ncols]
        entering = -1
        for j in range(ncols):
            if obj[j] < -_PIVOT_TOL:
                entering = j
                break
        if entering < 0:
            return
        best_row, best_ratio = -1, np.inf
        for r in range(nrows):
            a = T[r, entering]
            if a > _PIVOT_TOL:
                ratio = T[r, -1] / a
                if ratio < best_ratio - _PIVOT_TOL or (
                    abs(ratio - best_ratio) <= _PIVOT_TOL
                    and (best_row < 0 or basis[r] < basis[best_row])
                ):
                    best_row, best_ratio = r, ratio
        if best_row < 0:
            raise NumericalError("LP unbounded")
        _pivot(T, basis, best_row, entering)


def solve_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, maximize=True) -> LpResult:
    """Solve the LP; raises NumericalError if infeasible or unbounded."""
    c = np.asarray(c, dtype=float)
    nv = c.size
    obj = -c if maximize else c

    rows, rhs = [], []
    n_ub = 0
    if A_ub is not None:
        A_ub = np.atleast_2d(np.asarray(A_ub, dtype=float))
        b_ub = np.atleast_1d(np.asarray(b_ub, dtype=float))
        n_ub = A_ub.shape[0]
        rows.append(np.hstack([A_ub, np.eye(n_ub)]))
        rhs.append(b_ub)
    if A_eq is not None:
        A_eq = np.atleast_2d(np.asarray(A_eq, dtype=float))
        b_eq = np.atleast_1d(np.asarray(b_eq, dtype=float))
        rows.append(np.hstack([A_eq, np.zeros((A_eq.shape[0], n_ub))]))
        rhs.append(b_eq)
    if not rows:
        raise NumericalError("LP without constraints")
    A = np.vstack(rows)
    b = np.concatenate(rhs)
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1
    ncon = A.shape[0]
    ntot = nv + n_ub  # structural + slack columns

    # Tableau: [A | I_artificial | b] plus a phase objective row.
    T = np.zeros((ncon + 1, ntot + ncon + 1))
    T[:ncon, :ntot] = A
    T[:ncon, ntot : ntot + ncon] = np.eye(ncon)
    T[:ncon, -1] = b
    basis = list(range(ntot, ntot + ncon))

    # Phase 1: minimize the artificial total.
    T[-1, :ntot] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    _iterate(T, basis, ntot)
    if -T[-1, -1] > _FEAS_TOL:
        raise NumericalError("LP infeasible")

    # Drive any artificial still basic (at level 0) out of the basis.
    for r in range(ncon):
        if basis[r] >= ntot:
            cols = np.flatnonzero(np.abs(T[r, :ntot]) > _PIVOT_TOL)
            if cols.size:
                _pivot(T, basis, r, int(cols[0]))

    # Phase 2 objective row from the current basis.
    ext = np.zeros(ntot + ncon)
    ext[:nv] = obj
    cb = ext[basis]
    T[-1, :-1] = ext - cb @ T[:ncon, :-1]
    T[-1, -1] = -cb @ T[:ncon, -1]
    # Redundant rows may still carry an artificial basis column; freeze
    # them by excluding artificial columns from phase-2 pivoting.
    _iterate(T, basis, ntot)

    x = np.zeros(ntot + ncon)
    for r in range(ncon):
        x[basis[r]] = T[r, -1]
    value = float(obj[: nv] @ x[:nv])
    return LpResult(x=x[:nv].copy(), value=-value if maximize else value)
