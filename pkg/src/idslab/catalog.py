"""Built-in potentials used by the test and acceptance suites."""

import math

import numpy as np

from .lattice import make_lattice
from .potential import make_potential

TWO_PI = 2.0 * math.pi


def square_lattice():
    """Gamma = 2*pi*Z^2, dual Z^2, cell volume 4*pi^2."""
    return make_lattice(np.array([[TWO_PI, 0.0], [0.0, TWO_PI]]))


def free(lattice=None):
    return make_potential(lattice or square_lattice(), {})


def cosine2(amplitude=1.0, lattice=None):
    """amplitude * (cos x1 + cos x2) on the square lattice: v = 2*amplitude, b = 0."""
    lat = lattice or square_lattice()
    a = amplitude * math.pi
    return make_potential(lat, {(1, 0): a, (-1, 0): a, (0, 1): a, (0, -1): a})


def cosine2_shifted(shift=0.5, amplitude=1.0):
    """cos x1 + cos x2 + shift: b = shift, v = 2*amplitude + |shift|."""
    lat = square_lattice()
    a = amplitude * math.pi
    return make_potential(lat, {(0, 0): shift * TWO_PI, (1, 0): a, (-1, 0): a,
                                (0, 1): a, (0, -1): a})


def census_potential(scale=5e-6):
    """Tiny-amplitude cosine pair for zone-geometry censuses.

    The zone lemmas hold in the regime where the annulus width (set by v)
    is small against the lattice tangency spacing at the working radius;
    at desk-scale rho this requires v << 1, so the census ships with a
    thin annulus rather than an O(1) potential.
    """
    return cosine2(amplitude=scale)


def volume_potential(amplitude=0.1):
    """0.1*(cos x1 + cos x2): v = 0.2, used by the volume bookkeeping check."""
    return cosine2(amplitude=amplitude)


def line_potential(theta=(0, 1), amplitude=1.0, lattice=None):
    """Mathieu-type potential supported on +-theta only."""
    lat = lattice or square_lattice()
    t = (int(theta[0]), int(theta[1]))
    a = amplitude * math.pi
    return make_potential(lat, {t: a, (-t[0], -t[1]): a})


BUILTINS = {
    "free": free,
    "cos2": cosine2,
    "cos2+0.5": cosine2_shifted,
    "census": census_potential,
    "volume": volume_potential,
    "mathieu": line_potential,
}


def builtin(name):
    try:
        return BUILTINS[name]()
    except KeyError:
        raise KeyError(f"unknown builtin potential {name!r}; "
                       f"choices: {sorted(BUILTINS)}") from None
