"""Complex tridiagonal LU (Thomas algorithm) without pivoting.

Every linear solve in the library goes through this: the time-stepping
system (real SPD, factored once per run) and the per-node resolvent solves
of the contour oracle (complex, batched over contour nodes).  Batching: the
diagonals and right-hand sides may carry leading axes; the recurrence runs
along the last axis, vectorized over the rest.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import PivotBreakdown

PIVOT_FLOOR = 1e-300


@dataclass
class TriDiagonalSystem:
    """Tridiagonal matrix with factor-once / solve-many semantics.

    sub[0] and sup[n-1] are ignored.  Shapes: (..., n).
    """

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    _lfac: np.ndarray | None = field(default=None, repr=False)
    _dfac: np.ndarray | None = field(default=None, repr=False)
    factor_count: int = 0

    @property
    def n(self) -> int:
        return self.diag.shape[-1]

    def factor(self) -> "TriDiagonalSystem":
        d = np.array(self.diag, dtype=np.complex128, copy=True)
        sub = np.asarray(self.sub, dtype=np.complex128)
        sup = np.asarray(self.sup, dtype=np.complex128)
        n = d.shape[-1]
        l = np.zeros_like(d)
        if np.any(np.abs(d[..., 0]) <= PIVOT_FLOOR):
            raise PivotBreakdown("zero pivot at row 0")
        for i in range(1, n):
            l[..., i] = sub[..., i] / d[..., i - 1]
            d[..., i] = d[..., i] - l[..., i] * sup[..., i - 1]
            if np.any(np.abs(d[..., i]) <= PIVOT_FLOOR):
                raise PivotBreakdown(f"pivot underflow at row {i}")
        self._lfac = l
        self._dfac = d
        self.factor_count += 1
        return self

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        if self._lfac is None:
            self.factor()
        l, d = self._lfac, self._dfac
        sup = np.asarray(self.sup, dtype=np.complex128)
        x = np.array(rhs, dtype=np.complex128, copy=True)
        n = d.shape[-1]
        for i in range(1, n):
            x[..., i] -= l[..., i] * x[..., i - 1]
        x[..., n - 1] /= d[..., n - 1]
        for i in range(n - 2, -1, -1):
            x[..., i] = (x[..., i] - sup[..., i] * x[..., i + 1]) / d[..., i]
        return x

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.complex128)
        y = self.diag * x
        y[..., 1:] += self.sub[..., 1:] * x[..., :-1]
        y[..., :-1] += self.sup[..., :-1] * x[..., 1:]
        return y


def tridiag_solve(sys: TriDiagonalSystem, rhs: np.ndarray) -> np.ndarray:
    """Factor (if needed) and solve; raises PivotBreakdown on tiny pivots."""
    return sys.solve(rhs)
