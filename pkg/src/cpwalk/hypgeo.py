"""Poincaré disc and upper half-plane geometry.

Hyperbolic radii are allowed to be ``inf`` in the corner-angle formulas;
an infinite radius is a horocycle (circle internally tangent to the unit
circle).  All formulas are written with ``expm1``/``log1p`` style forms so
that circles very close to the boundary keep full relative precision.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import BoundaryPoint, DegenerateTriangle, NotInsideDisc

PLANE = "plane"
DISC = "disc"


def _check_geometry(geometry):
    if geometry not in (PLANE, DISC):
        raise ValueError(f"geometry must be 'plane' or 'disc', got {geometry!r}")


def dist_hyp(p: complex, q: complex) -> float:
    """Hyperbolic distance in the disc (curvature -1)."""
    p, q = complex(p), complex(q)
    if abs(p) >= 1 or abs(q) >= 1:
        raise BoundaryPoint("distance to a boundary point is infinite")
    num = abs(p - q)
    if num == 0:
        return 0.0
    den = abs(1 - p.conjugate() * q)
    t = num / den
    # 1 - t^2 = (1-|p|^2)(1-|q|^2)/|1 - conj(p) q|^2, exact and cancellation-free
    ap, aq = abs(p), abs(q)
    one_minus_t2 = (1 - ap) * (1 + ap) * (1 - aq) * (1 + aq) / (den * den)
    return 2 * math.log1p(t) - math.log(one_minus_t2)


def dist_hyp_many(p: complex, q) -> np.ndarray:
    """Vectorised ``dist_hyp(p, q_i)`` for a fixed base point ``p``."""
    p = complex(p)
    q = np.asarray(q, dtype=complex)
    if abs(p) >= 1 or np.any(np.abs(q) >= 1):
        raise BoundaryPoint("distance to a boundary point is infinite")
    den = np.abs(1 - np.conj(p) * q)
    t = np.abs(p - q) / den
    ap, aq = abs(p), np.abs(q)
    one_minus_t2 = (1 - ap) * (1 + ap) * (1 - aq) * (1 + aq) / (den * den)
    return 2 * np.log1p(t) - np.log(one_minus_t2)


def dist_from_origin(z) -> np.ndarray:
    """Vectorised ``d_hyp(0, z) = 2 atanh|z|``."""
    s = np.abs(np.asarray(z))
    return np.log1p(s) - np.log1p(-s)


@dataclass(frozen=True)
class MobiusMap:
    """z -> (a z + b) / (c z + d)."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        if self.det == 0:
            raise ValueError("Mobius map with ad - bc = 0")

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def __call__(self, z):
        if z == math.inf or (isinstance(z, complex) and cmath.isinf(z)):
            return self.a / self.c if self.c != 0 else complex(math.inf)
        den = self.c * z + self.d
        if den == 0:
            return complex(math.inf)
        return (self.a * z + self.b) / den

    def apply(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return (self.a * z + self.b) / (self.c * z + self.d)

    def __matmul__(self, other: "MobiusMap") -> "MobiusMap":
        """Composition: ``(self @ other)(z) == self(other(z))``."""
        return MobiusMap(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "MobiusMap":
        return MobiusMap(self.d, -self.b, -self.c, self.a)

    @property
    def pole(self) -> complex:
        if self.c == 0:
            return complex(math.inf)
        return -self.d / self.c

    def image_circle(self, center: complex, radius: float) -> tuple[complex, float]:
        """Image of a Euclidean circle that does not pass through the pole.

        The image centre is the image of the pole's reflection in the circle
        (symmetric points map to symmetric points, and the centre is the
        reflection of infinity).
        """
        center = complex(center)
        p = self.pole
        if cmath.isinf(p):
            w = center
        else:
            diff = p - center
            if abs(abs(diff) - radius) <= 1e-15 * max(1.0, radius):
                raise ValueError("circle passes through the pole")
            w = center + radius * radius / diff.conjugate()
        new_c = self(w)
        new_r = abs(self(center + radius) - new_c)
        # average over three points to symmetrise rounding
        new_r = (new_r + abs(self(center + 1j * radius) - new_c) + abs(self(center - radius) - new_c)) / 3
        return new_c, new_r

    @classmethod
    def identity(cls) -> "MobiusMap":
        return cls(1, 0, 0, 1)

    @classmethod
    def rotation(cls, theta: float) -> "MobiusMap":
        return cls(cmath.exp(1j * theta), 0, 0, 1)

    @classmethod
    def to_origin(cls, p: complex) -> "MobiusMap":
        """Disc automorphism z -> (z - p)/(1 - conj(p) z) sending p to 0."""
        p = complex(p)
        return cls(1, -p, -p.conjugate(), 1)

    @classmethod
    def from_origin(cls, p: complex) -> "MobiusMap":
        p = complex(p)
        return cls(1, p, p.conjugate(), 1)

    def preserves_disc(self, tol: float = 1e-12) -> bool:
        pts = np.exp(1j * np.linspace(0, 2 * np.pi, 7, endpoint=False))
        img = self.apply(pts)
        return bool(np.all(np.abs(np.abs(img) - 1) < tol) and abs(self(0)) < 1)


def mobius_to_halfplane(xi: complex) -> MobiusMap:
    """Phi(z) = -i (z + xi)/(z - xi): disc onto upper half-plane, xi -> inf."""
    xi = complex(xi)
    if abs(abs(xi) - 1) > 1e-12:
        raise ValueError("xi must lie on the unit circle")
    return MobiusMap(-1j, -1j * xi, 1, -xi)


def euclid_to_hyper(center: complex, radius: float) -> tuple[complex, float]:
    """Hyperbolic centre and radius of a Euclidean circle inside the disc."""
    center = complex(center)
    s = abs(center)
    if radius <= 0 or s + radius >= 1:
        raise NotInsideDisc(f"circle |z - {center}| = {radius} is not inside the disc")
    # solve on the diameter through the centre, then rotate back
    lo, hi = s - radius, s + radius
    x_lo = 2 * math.atanh(lo)
    x_hi = math.log1p(hi) - math.log1p(-hi)
    mid = 0.5 * (x_lo + x_hi)
    r_h = 0.5 * (x_hi - x_lo)
    phase = center / s if s > 0 else 1.0
    return math.tanh(mid / 2) * phase, r_h


def hyper_to_euclid(z_h: complex, r_h: float) -> tuple[complex, float]:
    z_h = complex(z_h)
    s = abs(z_h)
    if s >= 1:
        raise NotInsideDisc("hyperbolic centre must be inside the disc")
    if not (0 < r_h < math.inf):
        raise ValueError("hyperbolic radius must be finite and positive")
    m = math.log1p(s) - math.log1p(-s)
    lo = math.tanh((m - r_h) / 2)
    hi = math.tanh((m + r_h) / 2)
    phase = z_h / s if s > 0 else 1.0
    return 0.5 * (lo + hi) * phase, 0.5 * (hi - lo)


def _sinh_ratio(rv, x):
    """sinh(x)/sinh(rv + x), valid for x = inf (limit exp(-rv))."""
    rv = np.asarray(rv, dtype=float)
    x = np.asarray(x, dtype=float)
    with np.errstate(invalid="ignore", over="ignore"):
        num = -np.expm1(-2 * x)
        den = -np.expm1(-2 * (rv + x))
    return np.exp(-rv) * num / den


def corner_angle(r_v, r_1, r_2, geometry: str = PLANE):
    """Angle at the circle of radius ``r_v`` in a mutually tangent triple.

    Plane radii are Euclidean; disc radii are hyperbolic (``inf`` allowed for
    the two neighbours).  Uses the half-angle form of the law of cosines,
    ``sin^2(A/2) = f(r_1) f(r_2)`` with ``f(x) = x/(r_v + x)`` in the plane
    and ``f(x) = sinh x / sinh(r_v + x)`` in the disc.
    """
    _check_geometry(geometry)
    if geometry == PLANE:
        r_v = np.asarray(r_v, dtype=float)
        s2 = (r_1 / (r_v + r_1)) * (r_2 / (r_v + r_2))
    else:
        s2 = _sinh_ratio(r_v, r_1) * _sinh_ratio(r_v, r_2)
    out = 2 * np.arcsin(np.sqrt(np.clip(s2, 0.0, 1.0)))
    return float(out) if np.ndim(out) == 0 else out


def hyp_triangle_area(angles, geometry: str = DISC, tol: float = 1e-12) -> float:
    """Area of a hyperbolic triangle from its angles (pi minus angle sum)."""
    total = math.fsum(float(a) for a in angles)
    area = math.pi - total
    if geometry == DISC and area < -tol:
        raise DegenerateTriangle(f"angle sum {total} exceeds pi")
    return max(area, 0.0) if geometry == DISC else area


def equilateral_radius(degree: int) -> float:
    """Hyperbolic radius of the circles in the degree-regular packing (degree >= 7)."""
    c = math.cos(2 * math.pi / degree)
    return 0.5 * math.acosh(c / (1 - c))


def disc_circle_on_ray(direction: complex, inner: float, r_h_pivot: float, r_h: float):
    """Euclidean circle of radius ``r_h`` tangent to a circle centred at 0.

    The pivot circle has hyperbolic radius ``r_h_pivot`` and is centred at
    the origin; the new circle lies on the ray ``direction``.  ``r_h = inf``
    gives the horocycle.  Returns (centre, radius).
    """
    lo = inner
    hi = 1.0 if math.isinf(r_h) else math.tanh(r_h_pivot / 2 + r_h)
    return 0.5 * (lo + hi) * direction, 0.5 * (hi - lo)
