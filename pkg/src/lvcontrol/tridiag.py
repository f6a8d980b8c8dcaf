"""Factored tridiagonal systems backed by LAPACK ``?gttrf`` / ``?gttrs``."""
from __future__ import annotations

import numpy as np
from scipy.linalg import lapack


class TridiagonalError(RuntimeError):
    pass


class TridiagonalFactor:
    """LU factorization of a general tridiagonal matrix, reusable for many solves.

    ``lower`` and ``upper`` have length n - 1, ``diag`` has length n.
    """

    def __init__(self, lower, diag, upper):
        lower = np.asarray(lower, dtype=float)
        diag = np.asarray(diag, dtype=float)
        upper = np.asarray(upper, dtype=float)
        if not (len(lower) == len(upper) == len(diag) - 1):
            raise TridiagonalError("inconsistent band lengths")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(diag)) and np.all(np.isfinite(upper))):
            raise TridiagonalError("non-finite matrix entries")
        self.n = len(diag)
        self.lower, self.diag, self.upper = lower, diag, upper
        dl, d, du, du2, ipiv, info = lapack.dgttrf(lower, diag, upper)
        if info != 0:
            raise TridiagonalError(f"singular tridiagonal matrix (dgttrf info={info})")
        self._lu = (dl, d, du, du2, ipiv)

    def solve(self, rhs, transpose: bool = False) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        b = rhs.reshape(self.n, -1)
        x, info = lapack.dgttrs(*self._lu, b, trans="T" if transpose else "N")
        if info != 0:
            raise TridiagonalError(f"dgttrs failed (info={info})")
        return x.reshape(rhs.shape)

    def matvec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = self.diag * x
        y[:-1] += self.upper * x[1:]
        y[1:] += self.lower * x[:-1]
        return y
