"""2D lattice geometry: dual lattices, fundamental-domain splitting,
primitive-vector enumeration, rotated coordinate frames."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateBasis, EmptyBall

TWO_PI = 2.0 * np.pi


def perp(x):
    """Rotate by -pi/2: (x, y) -> (y, -x)."""
    x = np.asarray(x, dtype=float)
    return np.stack([x[..., 1], -x[..., 0]], axis=-1)


@dataclass(frozen=True)
class Lattice2:
    """A 2D lattice with its dual, rows of `basis` are the generators.

    The dual satisfies <dual_basis[i], basis[j]> = 2*pi*delta_ij, so
    cell_volume * dual_cell_volume = (2*pi)**2.
    """

    basis: np.ndarray
    dual_basis: np.ndarray
    cell_volume: float
    dual_cell_volume: float

    def dual_vector(self, m):
        """Map integer dual coordinates (..., 2) to dual-space vectors."""
        return np.asarray(m, dtype=float) @ self.dual_basis

    def dual_coords(self, v):
        """Coordinates of dual-space vectors in the dual basis."""
        return np.asarray(v, dtype=float) @ np.linalg.inv(self.dual_basis)

    def dual_ball_ints(self, radius, include_zero=True):
        """Integer dual coordinates of all lattice points in B(radius)."""
        inv = np.linalg.inv(self.dual_basis)
        b0 = int(math.floor(radius * np.linalg.norm(inv[:, 0]))) + 1
        b1 = int(math.floor(radius * np.linalg.norm(inv[:, 1]))) + 1
        n0, n1 = np.meshgrid(np.arange(-b0, b0 + 1), np.arange(-b1, b1 + 1),
                             indexing="ij")
        ints = np.stack([n0.ravel(), n1.ravel()], axis=1)
        vecs = ints @ self.dual_basis
        keep = (vecs ** 2).sum(axis=1) <= radius * radius * (1 + 1e-12)
        if not include_zero:
            keep &= (ints != 0).any(axis=1)
        return ints[keep]

    def min_dual_norm(self):
        """Length of the shortest nonzero dual vector."""
        ints = self.dual_ball_ints(2.0 * np.linalg.norm(self.dual_basis, axis=1).max(),
                                   include_zero=False)
        return float(np.sqrt((self.dual_vector(ints) ** 2).sum(axis=1).min()))


def make_lattice(basis):
    """Build a Lattice2 from two basis row vectors."""
    basis = np.asarray(basis, dtype=float).reshape(2, 2)
    det = basis[0, 0] * basis[1, 1] - basis[0, 1] * basis[1, 0]
    scale = np.abs(basis).max()
    if abs(det) < 1e-12 * scale * scale:
        raise DegenerateBasis(f"basis determinant {det:g} below tolerance")
    dual = TWO_PI * np.linalg.inv(basis).T
    vol = abs(det)
    return Lattice2(basis=basis, dual_basis=dual, cell_volume=vol,
                    dual_cell_volume=(TWO_PI ** 2) / vol)


@dataclass(frozen=True)
class DualPoint:
    """A dual-space point split as integer part (on the dual lattice) plus
    fractional part (in the half-open fundamental cell)."""

    coords: np.ndarray
    integer_part: np.ndarray
    fractional_part: np.ndarray
    integer_coords: np.ndarray


def split(lat, xi):
    """Split xi = [xi] + {xi} with [xi] on the dual lattice and {xi} in the
    half-open cell {t1*d1 + t2*d2 : t in [0,1)^2}."""
    xi = np.asarray(xi, dtype=float)
    t = np.linalg.solve(lat.dual_basis.T, xi)
    n = np.floor(t).astype(np.int64)
    integer_part = n @ lat.dual_basis
    return DualPoint(coords=xi, integer_part=integer_part,
                     fractional_part=xi - integer_part, integer_coords=n)


def fractional_parts(lat, pts):
    """Vectorized {xi} for an (n, 2) array of dual-space points."""
    pts = np.asarray(pts, dtype=float)
    t = pts @ np.linalg.inv(lat.dual_basis)
    return pts - np.floor(t) @ lat.dual_basis


@dataclass(frozen=True)
class Frame:
    """Coordinates generated by a dual vector theta: axis1 along theta-perp,
    axis2 along theta. (xi1, xi2) = (<xi, axis1>, <xi, axis2>)."""

    theta: np.ndarray
    axis1: np.ndarray
    axis2: np.ndarray

    def to_frame(self, xi):
        xi = np.asarray(xi, dtype=float)
        return np.stack([xi @ self.axis1, xi @ self.axis2], axis=-1)

    def from_frame(self, c):
        c = np.asarray(c, dtype=float)
        return np.multiply.outer(c[..., 0], self.axis1) + \
            np.multiply.outer(c[..., 1], self.axis2)


def frame_for(theta):
    theta = np.asarray(theta, dtype=float)
    n = np.linalg.norm(theta)
    if n == 0.0:
        raise DegenerateBasis("zero vector cannot generate a frame")
    axis2 = theta / n
    return Frame(theta=theta, axis1=perp(axis2), axis2=axis2)


def _is_primitive(n):
    """gcd test on integer dual coordinates (exact, no float collinearity)."""
    return math.gcd(abs(int(n[0])), abs(int(n[1]))) == 1


def primitive_vectors_int(lat, radius):
    """Integer coordinates of primitive dual vectors in B(radius), sorted by
    angle counterclockwise; closed under negation."""
    ints = lat.dual_ball_ints(radius, include_zero=False)
    if len(ints) == 0:
        raise EmptyBall(f"no nonzero dual vector within radius {radius:g}")
    prim = np.array([n for n in ints if _is_primitive(n)], dtype=np.int64)
    if len(prim) == 0:
        raise EmptyBall(f"no primitive dual vector within radius {radius:g}")
    vecs = lat.dual_vector(prim)
    ang = np.mod(np.arctan2(vecs[:, 1], vecs[:, 0]), TWO_PI)
    # equal angles are impossible for distinct primitives on one lattice;
    # fall back to length for safety
    order = np.lexsort(((vecs ** 2).sum(axis=1), ang))
    return prim[order]


def primitive_vectors(lat, radius):
    """Primitive dual vectors (shortest on their line through 0) in B(radius)."""
    return lat.dual_vector(primitive_vectors_int(lat, radius))


def angle_between(u, v):
    """Angle in [0, pi] between two nonzero vectors."""
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    c = float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))
    return math.acos(min(1.0, max(-1.0, c)))


def min_pairwise_angle(vectors):
    """Smallest angle in (0, pi] over linearly independent pairs."""
    vecs = np.asarray(vectors, dtype=float)
    best = math.pi
    for i in range(len(vecs)):
        for j in range(i + 1, len(vecs)):
            cross = vecs[i, 0] * vecs[j, 1] - vecs[i, 1] * vecs[j, 0]
            scale = np.linalg.norm(vecs[i]) * np.linalg.norm(vecs[j])
            if abs(cross) <= 1e-14 * scale:
                continue
            best = min(best, angle_between(vecs[i], vecs[j]))
    return best
