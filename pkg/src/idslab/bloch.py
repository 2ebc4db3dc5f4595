"""Plane-wave discretization of the fibered operators H(k).

The fiber matrix over modes m (dual-lattice points) is
    H[m, m'] = |m + k|^2 delta_{m,m'} + V^(m - m') / sqrt(vol O).

Two layouts are provided: a dense matrix ordered by energy (the public
BlochMatrix), and a lexicographically ordered banded layout used for O(n b^2)
inertia counting and eigenvalue-by-index bisection across k sweeps.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ._kernels import banded_count_below, banded_count_below_complex, \
    banded_count_below_real
from .errors import CutoffTooSmall, LatticeMismatch, NotHermitian

_TIE = 1e-12


def default_cutoff(lam, v):
    """Exploratory single-fiber default: eigenvalues of interest sit deep
    inside the basis."""
    return 4.0 * lam + 10.0 * v


def quadrature_cutoff(lam, V):
    """Cutoff policy for counting sweeps: lam plus a margin wide enough that
    modes beyond it are several potential hops away from the window.

    Validated by the cutoff-stability tests; each IdsSample records the
    cutoff actually used.
    """
    from .potential import stats
    v = stats(V).v
    margin = max(20.0 + 10.0 * v, 6.0 * max(V.radius, 1.0) * math.sqrt(max(lam, 1.0)))
    return lam + margin


@dataclass(frozen=True)
class PlaneWaveBasis:
    lattice: object
    k: np.ndarray
    cutoff: float
    modes: np.ndarray      # (n, 2) integer dual coordinates
    vectors: np.ndarray    # m + k
    energies: np.ndarray   # |m + k|^2, nondecreasing


def build_basis(lat, k, e_max):
    """All dual-lattice modes with |m + k|^2 <= e_max, sorted by energy then
    lexicographically on integer coordinates."""
    if e_max <= 0:
        raise CutoffTooSmall("cutoff must be positive")
    k = np.asarray(k, dtype=float)
    r = math.sqrt(e_max) + float(np.linalg.norm(k)) + 1e-9
    ints = lat.dual_ball_ints(r)
    vecs = lat.dual_vector(ints) + k
    energies = (vecs ** 2).sum(axis=1)
    keep = energies <= e_max * (1 + 1e-12)
    ints, vecs, energies = ints[keep], vecs[keep], energies[keep]
    if len(ints) == 0:
        raise CutoffTooSmall(f"no modes with |m+k|^2 <= {e_max:g}")
    order = np.lexsort((ints[:, 1], ints[:, 0], energies))
    return PlaneWaveBasis(lattice=lat, k=k, cutoff=float(e_max),
                          modes=ints[order], vectors=vecs[order],
                          energies=energies[order])


@dataclass(frozen=True)
class BlochMatrix:
    basis: PlaneWaveBasis
    entries: np.ndarray


def _mode_keys(ints):
    return ints[:, 0].astype(np.int64) * (1 << 24) + ints[:, 1].astype(np.int64)


def _lookup(sorted_keys, query_keys):
    """Indices of query keys in sorted_keys, -1 where absent."""
    pos = np.searchsorted(sorted_keys, query_keys)
    pos = np.minimum(pos, len(sorted_keys) - 1)
    found = sorted_keys[pos] == query_keys
    return np.where(found, pos, -1)


def assemble(basis, V):
    """Dense Hermitian fiber matrix for the (truncated) potential V."""
    if V.lattice is not basis.lattice and \
            not np.allclose(V.lattice.basis, basis.lattice.basis):
        raise LatticeMismatch("potential and basis live on different lattices")
    n = len(basis.modes)
    root_vol = math.sqrt(basis.lattice.cell_volume)
    dtype = float if V.is_real_symmetric() else complex
    H = np.zeros((n, n), dtype=dtype)
    order = np.argsort(_mode_keys(basis.modes))
    keys = _mode_keys(basis.modes)[order]
    for g, c in V.coeffs.items():
        # H[i, j] = V^(g)/root_vol where m_i = m_j + g
        tgt = _mode_keys(basis.modes + np.array(g, dtype=np.int64))
        i = _lookup(keys, tgt)
        ok = i >= 0
        rows = order[i[ok]]
        cols = np.arange(n)[ok]
        H[rows, cols] += c / root_vol if dtype is complex else c.real / root_vol
    ii = np.arange(n)
    H[ii, ii] += basis.energies
    return BlochMatrix(basis=basis, entries=H)


@dataclass(frozen=True)
class Spectrum:
    values: np.ndarray
    basis: PlaneWaveBasis


def eigenvalues(mat, check_residuals=False):
    """Full ascending spectrum of a BlochMatrix."""
    H = mat.entries
    scale = float(np.abs(H).max()) or 1.0
    if np.abs(H - H.conj().T).max() > 1e-8 * scale:
        raise NotHermitian("fiber matrix asymmetry beyond 1e-8 * |H|")
    if check_residuals:
        w, X = np.linalg.eigh(H)
        res = np.linalg.norm(H @ X - X * w, axis=0)
        hnorm = max(abs(w[0]), abs(w[-1]))
        if res.max() > 1e-10 * max(hnorm, 1.0):
            raise NotHermitian(f"eigenpair residual {res.max():g} out of contract")
    else:
        w = np.linalg.eigvalsh(H)
    return Spectrum(values=w, basis=mat.basis)


def counting(spectrum, lam):
    """#{j : mu_j <= lam} (closed inequality)."""
    return int(np.searchsorted(spectrum.values, lam, side="right"))


# ---------------------------------------------------------------------------
# banded layout

@dataclass(frozen=True)
class BandedFiber:
    """Lower banded storage of one fiber in lexicographic mode order."""

    lattice: object
    k: np.ndarray
    cutoff: float
    modes: np.ndarray
    energies: np.ndarray
    ab: np.ndarray
    bandwidth: int
    offdiag_sum: float  # sum |V^(g != 0)| / root_vol, Gershgorin radius

    @property
    def size(self):
        return len(self.modes)

    def bracket(self):
        lo = float(self.ab[0].real.min()) - self.offdiag_sum - 1.0
        hi = float(self.ab[0].real.max()) + self.offdiag_sum + 1.0
        return lo, hi


def banded_from_modes(lat, V, ints, base, cutoff=0.0):
    """Banded Hermitian matrix of H' over the modes base + ints @ dual_basis,
    sorted lexicographically on integer coordinates."""
    ints = np.asarray(ints, dtype=np.int64)
    keys = _mode_keys(ints)
    order = np.argsort(keys)
    ints, keys = ints[order], keys[order]
    vecs = lat.dual_vector(ints) + np.asarray(base, dtype=float)
    energies = (vecs ** 2).sum(axis=1)
    n = len(ints)
    root_vol = math.sqrt(lat.cell_volume)
    offs = [(g, c) for g, c in V.coeffs.items() if g != (0, 0)]
    dtype = float if V.is_real_symmetric() else complex
    pairs = []
    bandwidth = 0
    for g, c in offs:
        i = _lookup(keys, _mode_keys(ints + np.array(g, dtype=np.int64)))
        ok = (i >= 0) & (i > np.arange(n))  # lower triangle only
        rows, cols = i[ok], np.arange(n)[ok]
        if len(rows):
            bandwidth = max(bandwidth, int((rows - cols).max()))
            pairs.append((rows, cols, c / root_vol))
    ab = np.zeros((bandwidth + 1, n), dtype=dtype)
    ab[0] = energies + V.coefficient((0, 0)).real / root_vol
    for rows, cols, val in pairs:
        ab[rows - cols, cols] += val if dtype is complex else val.real
    return BandedFiber(lattice=lat, k=np.asarray(base, dtype=float),
                       cutoff=float(cutoff), modes=ints, energies=energies,
                       ab=ab, bandwidth=bandwidth,
                       offdiag_sum=sum(abs(c) for _, c in offs) / root_vol)


def banded_fiber(lat, V, k, e_max):
    """Assemble the fiber in banded form (modes in lexicographic order)."""
    k = np.asarray(k, dtype=float)
    r = math.sqrt(e_max) + float(np.linalg.norm(k)) + 1e-9
    ints = lat.dual_ball_ints(r)
    vecs = lat.dual_vector(ints) + k
    energies = (vecs ** 2).sum(axis=1)
    keep = energies <= e_max * (1 + 1e-12)
    ints = ints[keep]
    if len(ints) == 0:
        raise CutoffTooSmall(f"no modes with |m+k|^2 <= {e_max:g}")
    return banded_from_modes(lat, V, ints, k, cutoff=e_max)


def fiber_count_below(fiber, lam):
    """#{mu <= lam} for the banded fiber (matches `counting` semantics)."""
    shift = lam + _TIE * max(1.0, abs(lam))
    if fiber.bandwidth == 0:
        return int((fiber.ab[0].real < shift).sum())
    return banded_count_below(fiber.ab, shift)


def fiber_eigenvalue_by_index(fiber, p, tol=1e-11):
    """p-th ascending eigenvalue (1-based) by bisection on the inertia count."""
    if p < 1 or p > fiber.size:
        raise IndexError(f"index {p} outside 1..{fiber.size}")
    if fiber.bandwidth == 0:
        return float(np.sort(fiber.ab[0].real)[p - 1])
    lo, hi = fiber.bracket()
    count = banded_count_below_complex if np.iscomplexobj(fiber.ab) \
        else banded_count_below_real
    ab = np.ascontiguousarray(fiber.ab)
    scale = max(abs(lo), abs(hi), 1.0)
    while hi - lo > tol * scale:
        mid = 0.5 * (lo + hi)
        if count(ab, mid) >= p:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def fiber_window_eigenvalues(fiber, lo, hi):
    """All eigenvalues in [lo, hi], via the banded LAPACK path."""
    if fiber.bandwidth == 0:
        w = np.sort(fiber.ab[0].real)
        return w[(w >= lo) & (w <= hi)]
    return scipy.linalg.eig_banded(fiber.ab, lower=True, eigvals_only=True,
                                   select="v", select_range=(lo, hi))


def spectra_to_csv(path, entries):
    """Write (k1, k2, j, mu_j) rows for an iterable of Spectrum objects."""
    with open(path, "w") as fh:
        fh.write("k1,k2,j,mu\n")
        for spec in entries:
            k1, k2 = spec.basis.k
            for j, mu in enumerate(spec.values, start=1):
                fh.write(f"{k1:.17g},{k2:.17g},{j},{mu:.17g}\n")
