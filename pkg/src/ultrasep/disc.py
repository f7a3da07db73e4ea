"""Metrics, Carleson windows, annuli and conformal maps of the unit disc.

Every function accepts plain Python/NumPy complex values (scalars or arrays)
as well as :class:`DiscPoint` instances, and is vectorised where that is
cheap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class DiscPoint:
    """A point of the open unit disc."""

    re: float
    im: float

    def __post_init__(self):
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise ValueError(f"non-finite point ({self.re}, {self.im})")
        if self.re * self.re + self.im * self.im >= 1.0:
            raise ValueError(f"point ({self.re}, {self.im}) is not inside the open unit disc")

    @classmethod
    def from_complex(cls, z: complex) -> "DiscPoint":
        z = complex(z)
        return cls(z.real, z.imag)

    def __complex__(self) -> complex:
        return complex(self.re, self.im)

    @property
    def z(self) -> complex:
        return complex(self.re, self.im)


@dataclass(frozen=True)
class BoundaryDirection:
    """A point of the unit circle, stored as an angle so that |zeta| = 1 exactly."""

    angle: float

    def __post_init__(self):
        object.__setattr__(self, "angle", float(self.angle) % TWO_PI)

    @property
    def zeta(self) -> complex:
        return complex(math.cos(self.angle), math.sin(self.angle))

    @classmethod
    def toward(cls, z) -> "BoundaryDirection":
        z = as_complex(z)
        if z == 0:
            raise ValueError("the origin has no boundary direction")
        return cls(math.atan2(z.imag, z.real))


@dataclass(frozen=True)
class CarlesonWindow:
    """W(zeta, h) = {z : |1 - conj(zeta) z| < h}."""

    direction: BoundaryDirection
    height: float

    def __post_init__(self):
        if not 0.0 < self.height < 1.0:
            raise ValueError(f"window height must lie in (0, 1), got {self.height}")

    @classmethod
    def at(cls, angle: float, height: float) -> "CarlesonWindow":
        return cls(BoundaryDirection(angle), height)

    @property
    def zeta(self) -> complex:
        return self.direction.zeta

    def contains(self, z):
        return window_contains(self, z)

    def halfplane_box(self) -> tuple[float, float]:
        """Half-width and top of the rectangle bounding the window in half-plane coordinates.

        Under :func:`cayley_to_halfplane` the window becomes the part of the
        upper half-plane inside an Apollonius circle (points whose distances
        to 0 and -i have ratio h/2).  Returns ``(half_width, top)`` of its
        bounding box ``[-half_width, half_width] x (0, top]``.
        """
        k = self.height / 2.0
        return k / (1.0 - k * k), k / (1.0 - k)


def as_complex(z):
    """Coerce a DiscPoint / number / array-like to complex (scalar or ndarray)."""
    if isinstance(z, DiscPoint):
        return z.z
    if isinstance(z, (complex, float, int, np.number)):
        return complex(z)
    return np.asarray(z, dtype=complex)


def pseudo_hyperbolic_distance(a, b):
    a = as_complex(a)
    b = as_complex(b)
    return np.abs(a - b) / np.abs(1.0 - np.conj(b) * a)


def hyperbolic_distance(a, b):
    return np.arctanh(pseudo_hyperbolic_distance(a, b))


def euclidean_distance(a, b):
    return np.abs(as_complex(a) - as_complex(b))


def window_contains(w: CarlesonWindow, z):
    z = as_complex(z)
    return np.abs(1.0 - np.conj(w.zeta) * z) < w.height


def _check_gamma(gamma: float) -> None:
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")


def annulus_index(z, gamma: float) -> int:
    """The n with gamma**(n+1) < 1 - |z| <= gamma**n."""
    _check_gamma(gamma)
    t = 1.0 - abs(as_complex(z))
    if not t > 0.0:
        raise ValueError("point is not inside the open unit disc")
    n = max(0, int(math.floor(math.log(t) / math.log(gamma))))
    # the logarithm can be off by one at exact powers of gamma
    while gamma ** (n + 1) >= t:
        n += 1
    while n > 0 and t > gamma**n:
        n -= 1
    return n


def annulus_indices(z, gamma: float) -> np.ndarray:
    return np.array([annulus_index(v, gamma) for v in np.ravel(as_complex(z))], dtype=int)


def disc_automorphism(c, z):
    """phi_c(z) = (c - z) / (1 - conj(c) z); an involution swapping c and 0."""
    c = as_complex(c)
    z = as_complex(z)
    return (c - z) / (1.0 - np.conj(c) * z)


def cayley_to_halfplane(z, direction: BoundaryDirection):
    """Map the disc to the upper half-plane with `direction` sent to 0 and 0 sent to i.

    Returns ``(x, y)`` with ``y > 0``.  Near the boundary point the height
    ``y`` and ``1 - |z|`` agree up to a factor in ``[1/2, 2]``.
    """
    w = np.conj(direction.zeta) * as_complex(z)
    f = 1j * (1.0 - w) / (1.0 + w)
    return np.real(f), np.imag(f)


def halfplane_to_disc(x, y, direction: BoundaryDirection):
    """Inverse of :func:`cayley_to_halfplane`."""
    f = np.asarray(x, dtype=float) + 1j * np.asarray(y, dtype=float)
    w = (1j - f) / (1j + f)
    out = direction.zeta * w
    return complex(out) if np.ndim(out) == 0 else out
