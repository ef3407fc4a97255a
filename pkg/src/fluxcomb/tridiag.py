"""Symmetric tridiagonal eigenvalues by implicit-shift QL.

The charge-basis Hamiltonian is tridiagonal, so a dedicated O(n^2)
eigenvalues-only path is all the package needs; nothing here depends on
LAPACK. The iteration is the classic QL with implicit Wilkinson shift,
eigenvectors never formed.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConvergenceError

_EPS = float(np.finfo(np.float64).eps)


def eigvals_tridiag(diag, off, max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of the symmetric tridiagonal matrix with main diagonal
    `diag` (length n) and off-diagonal `off` (length n-1), sorted ascending.

    max_sweeps bounds the QL iterations spent on any single eigenvalue;
    30 is the textbook budget, 60 leaves slack for clustered spectra.
    """
    d = np.array(diag, dtype=np.float64, copy=True)
    n = d.size
    if n == 0:
        raise ValueError("empty matrix")
    e = np.zeros(n, dtype=np.float64)
    if n > 1:
        off = np.asarray(off, dtype=np.float64)
        if off.size != n - 1:
            raise ValueError(f"off-diagonal length {off.size}, expected {n - 1}")
        e[: n - 1] = off

    for l in range(n):
        sweeps = 0
        while True:
            # find the first negligible off-diagonal at or above l
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= _EPS * dd:
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > max_sweeps:
                raise ConvergenceError(
                    f"QL failed to isolate eigenvalue {l} after {max_sweeps} sweeps"
                )
            # Wilkinson shift from the 2x2 at l
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    # rotation annihilated early; restart the sweep
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0

    d.sort()
    return d
