"""Numba kernels: banded LDL^T / LDL^H inertia counts.

Counting eigenvalues below a shift via the signs of the LDL pivots is the
classic Sturm-sequence technique; for banded matrices it costs O(n b^2),
which is what makes dense Brillouin-zone sweeps affordable. Tiny pivots are
replaced by a signed floor, the standard bisection-safety device.
"""

import numba
import numpy as np

_PIVOT_FLOOR = 1e-300


@numba.njit(cache=True, fastmath=False)
def banded_count_below_real(ab, shift):
    """Eigenvalues of the real symmetric banded matrix strictly below shift.

    ab is LAPACK lower banded storage: ab[i, j] = A[j+i, j], shape (b+1, n).
    """
    b1, n = ab.shape
    work = np.empty((n, b1))
    for j in range(n):
        for i in range(b1):
            work[j, i] = ab[i, j]
    count = 0
    for j in range(n):
        d = work[j, 0] - shift
        if abs(d) < _PIVOT_FLOOR:
            d = -_PIVOT_FLOOR
        if d < 0.0:
            count += 1
        top = b1 if j + b1 <= n else n - j
        for i in range(1, top):
            cf = work[j, i] / d
            for r in range(0, b1 - i):
                work[j + i, r] -= cf * work[j, i + r]
    return count


@numba.njit(cache=True, fastmath=False)
def banded_count_below_complex(ab, shift):
    """Hermitian complex variant (LDL^H, real pivots)."""
    b1, n = ab.shape
    work = np.empty((n, b1), dtype=np.complex128)
    for j in range(n):
        for i in range(b1):
            work[j, i] = ab[i, j]
    count = 0
    for j in range(n):
        d = work[j, 0].real - shift
        if abs(d) < _PIVOT_FLOOR:
            d = -_PIVOT_FLOOR
        if d < 0.0:
            count += 1
        top = b1 if j + b1 <= n else n - j
        for i in range(1, top):
            cf = np.conj(work[j, i]) / d
            for r in range(0, b1 - i):
                work[j + i, r] -= cf * work[j, i + r]
    return count


def banded_count_below(ab, shift):
    if np.iscomplexobj(ab):
        return int(banded_count_below_complex(np.ascontiguousarray(ab), float(shift)))
    return int(banded_count_below_real(
        np.ascontiguousarray(ab, dtype=np.float64), float(shift)))


def banded_eigenvalue_by_index(ab, p, lo, hi, tol=1e-12):
    """p-th eigenvalue (1-based, ascending) of a Hermitian banded matrix by
    bisection on the inertia count; [lo, hi] must bracket it."""
    count = banded_count_below_complex if np.iscomplexobj(ab) \
        else banded_count_below_real
    ab = np.ascontiguousarray(ab)
    lo = float(lo)
    hi = float(hi)
    scale = max(abs(lo), abs(hi), 1.0)
    while hi - lo > tol * scale:
        mid = 0.5 * (lo + hi)
        if count(ab, mid) >= p:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
