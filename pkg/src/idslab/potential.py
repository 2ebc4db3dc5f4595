"""Finite trigonometric-polynomial potentials on a 2D lattice.

A potential is V(x) = (1/sqrt(vol O)) * sum_m V^(m) exp(i<m, x>) with the sum
over finitely many dual-lattice vectors m and Hermitian coefficient data
V^(-m) = conj(V^(m)), so V is real-valued.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import NotHermitian, NotLatticeVector
from .lattice import Lattice2, make_lattice

HERMITIAN_TOL = 1e-12


def _as_key(m):
    return (int(m[0]), int(m[1]))


@dataclass(frozen=True)
class TrigPotential:
    """Fourier data of a real trigonometric polynomial.

    coeffs maps integer dual-basis coordinates to complex amplitudes.
    """

    lattice: Lattice2
    coeffs: dict
    radius: float

    def coefficient(self, m):
        return self.coeffs.get(_as_key(m), 0.0 + 0.0j)

    def support_ints(self):
        if not self.coeffs:
            return np.zeros((0, 2), dtype=np.int64)
        return np.array(sorted(self.coeffs.keys()), dtype=np.int64)

    @property
    def abs_sum(self):
        return float(sum(abs(c) for c in self.coeffs.values()))

    def is_real_symmetric(self):
        """True when every coefficient is real (matrices become real symmetric)."""
        return all(abs(c.imag) <= HERMITIAN_TOL * max(1.0, abs(c))
                   for c in self.coeffs.values())


@dataclass(frozen=True)
class PotentialStats:
    b: float
    v: float


def make_potential(lattice, coeffs):
    """Validate Hermitian symmetry and build a TrigPotential.

    coeffs: mapping {(i, j): complex}. Offenders are reported in pairs.
    """
    clean = {}
    for m, c in coeffs.items():
        c = complex(c)
        if c != 0.0:
            clean[_as_key(m)] = c
    scale = max((abs(c) for c in clean.values()), default=0.0)
    offenders = []
    for m, c in clean.items():
        neg = (-m[0], -m[1])
        if abs(clean.get(neg, 0.0) - c.conjugate()) > HERMITIAN_TOL * max(1.0, scale):
            offenders.append((m, neg))
    if offenders:
        raise NotHermitian(
            "non-Hermitian coefficient pairs: "
            + ", ".join(f"{a} vs {b}" for a, b in sorted(offenders)))
    if clean:
        ints = np.array(list(clean.keys()), dtype=np.int64)
        radius = float(np.sqrt((lattice.dual_vector(ints) ** 2).sum(axis=1)).max())
    else:
        radius = 0.0
    return TrigPotential(lattice=lattice, coeffs=clean, radius=radius)


def evaluate(V, x):
    """V(x) at one point or an (..., 2) array of points."""
    x = np.asarray(x, dtype=float)
    if not V.coeffs:
        return np.zeros(x.shape[:-1]) if x.ndim > 1 else 0.0
    ints = V.support_ints()
    freqs = V.lattice.dual_vector(ints)
    amps = np.array([V.coeffs[_as_key(m)] for m in ints])
    phases = x @ freqs.T
    total = (np.exp(1j * phases) * amps).sum(axis=-1) / math.sqrt(V.lattice.cell_volume)
    bound = V.abs_sum / math.sqrt(V.lattice.cell_volume)
    if np.max(np.abs(np.atleast_1d(total.imag))) > 1e-10 * max(1.0, bound):
        raise NotHermitian("evaluation produced a non-negligible imaginary part")
    return total.real if x.ndim > 1 else float(total.real)


def truncate(V, R):
    """Drop all modes with |m| > R (Hermitian symmetry and mean survive)."""
    if R <= 0:
        raise ValueError("truncation radius must be positive")
    kept = {}
    for m, c in V.coeffs.items():
        if np.linalg.norm(V.lattice.dual_vector(np.array(m))) <= R * (1 + 1e-12):
            kept[m] = c
    return make_potential(V.lattice, kept)


def stats(V):
    """Mean b = V^(0)/sqrt(vol O) and the sup-norm certificate
    v = sum |V^(m)|/sqrt(vol O)."""
    root_vol = math.sqrt(V.lattice.cell_volume)
    b = V.coefficient((0, 0)).real / root_vol
    return PotentialStats(b=b, v=V.abs_sum / root_vol)


@dataclass(frozen=True)
class Reduced1dPotential:
    """1D Fourier series: frequency/amplitude pairs plus the quasi-period data."""

    theta: np.ndarray
    theta_len: float
    xi2: float
    frequencies: np.ndarray
    amplitudes: np.ndarray
    orders: np.ndarray

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        total = (np.exp(1j * np.multiply.outer(x, self.frequencies))
                 * self.amplitudes).sum(axis=-1)
        return total

    def sup_bound(self):
        return float(np.abs(self.amplitudes).sum())


def reduced_1d_potential(V, theta, xi2, R):
    """Fourier data of the 1D potential obtained by restricting V to the line
    through theta: frequencies xi2 + m|theta|, amplitudes
    sqrt(|theta|/2pi) * V^(m theta) for |m theta| <= R."""
    theta_int = np.asarray(theta)
    if theta_int.dtype.kind != "i":
        coords = V.lattice.dual_coords(theta_int)
        theta_int = np.rint(coords).astype(np.int64)
        if np.abs(coords - theta_int).max() > 1e-9:
            raise NotLatticeVector(f"{theta} is not a dual-lattice vector")
    theta_vec = V.lattice.dual_vector(theta_int)
    tlen = float(np.linalg.norm(theta_vec))
    if tlen == 0.0:
        raise NotLatticeVector("theta must be nonzero")
    m_max = int(math.floor(R / tlen + 1e-12))
    orders, freqs, amps = [], [], []
    for m in range(-m_max, m_max + 1):
        c = V.coefficient((m * theta_int[0], m * theta_int[1]))
        orders.append(m)
        freqs.append(xi2 + m * tlen)
        amps.append(math.sqrt(tlen / (2.0 * math.pi)) * c)
    orders = np.array(orders)
    keep = np.abs(amps) > 0
    return Reduced1dPotential(theta=theta_vec, theta_len=tlen, xi2=float(xi2),
                              frequencies=np.array(freqs)[keep],
                              amplitudes=np.array(amps)[keep],
                              orders=orders[keep])


def to_json_dict(V):
    return {
        "lattice": [list(map(float, row)) for row in V.lattice.basis],
        "coeffs": [{"m": [int(m[0]), int(m[1])], "re": c.real, "im": c.imag}
                   for m, c in sorted(V.coeffs.items())],
    }


def from_json_dict(data):
    lattice = make_lattice(np.array(data["lattice"], dtype=float))
    coeffs = {}
    for entry in data["coeffs"]:
        m = _as_key(entry["m"])
        coeffs[m] = complex(float(entry.get("re", 0.0)), float(entry.get("im", 0.0)))
    return make_potential(lattice, coeffs)


def save_potential(V, path):
    with open(path, "w") as fh:
        json.dump(to_json_dict(V), fh, indent=1, sort_keys=True)


def load_potential(path):
    with open(path) as fh:
        return from_json_dict(json.load(fh))
