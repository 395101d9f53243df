"""Geometric primitives for rotation search over line correspondences.

A camera rotation Q acts on a 3-D line direction v; an image line gives the
unit normal n of its back-projected plane. For the correct rotation
n . (Q v) = 0, so |n . (Q v)| <= epsilon is the inlier test. With the
axis-angle form Q = I + sin(theta) [u]_x + (1 - cos(theta)) [u]_x^2 the
residual splits into

    res(u, theta) = a + sin(theta) * h1(u) + (1 - cos(theta)) * h2(u)

with a = n . v, h1(u) = u . (v x n) and h2(u) = (n . u)(u . v) - n . v.
Everything downstream (closed-form bounds, interval stabbing, the solver)
builds on the quantities defined here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SingularIntrinsicsError, ZeroLineError

TWO_PI = 2.0 * math.pi

# Unit-norm deviation accepted by validating constructors.
UNIT_TOL = 1e-12
# sin(alpha) below this counts as a pole of the (alpha, phi) chart.
POLE_TOL = 1e-12
# ||v x n|| below this marks a correspondence with an ill-defined rotation
# plane; h1 collapses to the trivial bound and frame vectors orthogonal to v
# are substituted (value impact bounded by w itself).
DEGENERATE_W = 1e-9
# Inclusive slack for cube membership tests. Points within this angular
# distance of the boundary count as inside, which can only widen bounds.
MEMBER_TOL = 1e-12

_RANGE_TOL = 1e-9


def _wrap_phi(phi: float) -> float:
    out = math.fmod(phi, TWO_PI)
    if out < 0.0:
        out += TWO_PI
    return 0.0 if out == TWO_PI else out


@dataclass(frozen=True)
class UnitVec3:
    """Unit vector in R^3. The constructor rescales to unit norm."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        x, y, z = float(self.x), float(self.y), float(self.z)
        norm = math.sqrt(x * x + y * y + z * z)
        if norm < 1e-15:
            raise ValueError("cannot normalize a zero vector")
        if abs(norm - 1.0) > UNIT_TOL:
            x, y, z = x / norm, y / norm, z / norm
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "z", z)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "UnitVec3":
        return cls(float(arr[0]), float(arr[1]), float(arr[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)

    def negated(self) -> "UnitVec3":
        return UnitVec3(-self.x, -self.y, -self.z)


@dataclass(frozen=True)
class PolarCoord:
    """Point on the axis sphere: colatitude alpha in [0, pi], azimuth phi in [0, 2pi)."""

    alpha: float
    phi: float

    def __post_init__(self) -> None:
        a = self.alpha
        if a < -_RANGE_TOL or a > math.pi + _RANGE_TOL:
            raise ValueError(f"alpha {a} outside [0, pi]")
        object.__setattr__(self, "alpha", min(max(a, 0.0), math.pi))
        object.__setattr__(self, "phi", _wrap_phi(self.phi))


@dataclass(frozen=True)
class AxisAngle:
    """Rotation as unit axis plus angle theta restricted to [0, pi].

    (u, theta) and (-u, 2pi - theta) describe the same rotation, so the
    half-turn range with a full axis sphere is a double cover of SO(3).
    """

    axis: UnitVec3
    theta: float

    def __post_init__(self) -> None:
        t = self.theta
        if t < -_RANGE_TOL or t > math.pi + _RANGE_TOL:
            raise ValueError(f"theta {t} outside [0, pi]")
        object.__setattr__(self, "theta", min(max(t, 0.0), math.pi))

    def matrix(self) -> np.ndarray:
        return rodrigues(self.axis, self.theta)


def polar_to_unit(p: PolarCoord) -> UnitVec3:
    sa = math.sin(p.alpha)
    return UnitVec3(sa * math.cos(p.phi), sa * math.sin(p.phi), math.cos(p.alpha))


def unit_to_polar(u: UnitVec3) -> PolarCoord:
    alpha = math.acos(min(max(u.z, -1.0), 1.0))
    if math.sin(alpha) < POLE_TOL:
        return PolarCoord(alpha, 0.0)
    return PolarCoord(alpha, math.atan2(u.y, u.x))


def rodrigues(axis: UnitVec3, theta: float) -> np.ndarray:
    """Rotation matrix I + sin(theta) [u]_x + (1 - cos(theta)) [u]_x^2."""
    u = axis.as_array()
    k = np.array(
        [
            [0.0, -u[2], u[1]],
            [u[2], 0.0, -u[0]],
            [-u[1], u[0], 0.0],
        ]
    )
    return np.eye(3) + math.sin(theta) * k + (1.0 - math.cos(theta)) * (k @ k)


def rotation_distance(q1: np.ndarray, q2: np.ndarray) -> float:
    """Geodesic angle between two rotation matrices."""
    c = (float(np.trace(q1.T @ q2)) - 1.0) / 2.0
    return math.acos(min(max(c, -1.0), 1.0))


def _orthogonal_completion(v: np.ndarray) -> np.ndarray:
    # Deterministic unit vector orthogonal to v: project out the axis with
    # the smallest |component| so the subtraction is well conditioned.
    idx = int(np.argmin(np.abs(v)))
    e = np.zeros(3)
    e[idx] = 1.0
    t = e - v[idx] * v
    return t / np.linalg.norm(t)


@dataclass(frozen=True)
class Correspondence:
    """One line pairing: 3-D direction v, back-projected plane normal n.

    Derived quantities are cached at construction:
      a       n . v, the residual at theta = 0
      w       ||v x n||, the amplitude of h1
      c       (v x n) / w, the h1 maximizer (degenerate: any unit _|_ v)
      m       (v + n) / ||v + n||, the h2 maximizer, value (1 - a) / 2
      m_perp  (v - n) / ||v - n||, the h2 minimizer, value -(1 + a) / 2
    """

    v: UnitVec3
    n: UnitVec3
    a: float = field(init=False)
    w: float = field(init=False)
    c: UnitVec3 = field(init=False)
    m: UnitVec3 = field(init=False)
    m_perp: UnitVec3 = field(init=False)
    degenerate: bool = field(init=False)
    c_polar: PolarCoord = field(init=False)
    m_polar: PolarCoord = field(init=False)
    m_perp_polar: PolarCoord = field(init=False)

    def __post_init__(self) -> None:
        v = self.v.as_array()
        n = self.n.as_array()
        a = float(np.dot(n, v))
        cross = np.cross(v, n)
        w = float(np.linalg.norm(cross))
        degenerate = w < DEGENERATE_W
        c_arr = _orthogonal_completion(v) if degenerate else cross / w
        vs = v + n
        vd = v - n
        m_arr = vs / np.linalg.norm(vs) if np.linalg.norm(vs) > DEGENERATE_W else _orthogonal_completion(v)
        mp_arr = vd / np.linalg.norm(vd) if np.linalg.norm(vd) > DEGENERATE_W else _orthogonal_completion(v)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "degenerate", degenerate)
        object.__setattr__(self, "c", UnitVec3.from_array(c_arr))
        object.__setattr__(self, "m", UnitVec3.from_array(m_arr))
        object.__setattr__(self, "m_perp", UnitVec3.from_array(mp_arr))
        object.__setattr__(self, "c_polar", unit_to_polar(self.c))
        object.__setattr__(self, "m_polar", unit_to_polar(self.m))
        object.__setattr__(self, "m_perp_polar", unit_to_polar(self.m_perp))

    @classmethod
    def from_vectors(cls, v, n) -> "Correspondence":
        return cls(UnitVec3(*np.asarray(v, dtype=np.float64)), UnitVec3(*np.asarray(n, dtype=np.float64)))


def h1(s: Correspondence, u: UnitVec3) -> float:
    """u . (v x n): coefficient of sin(theta) in the residual."""
    ua = u.as_array()
    return float(np.dot(ua, np.cross(s.v.as_array(), s.n.as_array())))


def h2(s: Correspondence, u: UnitVec3) -> float:
    """(n . u)(u . v) - n . v: coefficient of (1 - cos(theta))."""
    ua = u.as_array()
    return float(np.dot(s.n.as_array(), ua) * np.dot(ua, s.v.as_array()) - s.a)


def residual(s: Correspondence, rot: AxisAngle) -> float:
    """n . (Q v) for Q = rodrigues(axis, theta), via the h-decomposition."""
    u = rot.axis
    return s.a + math.sin(rot.theta) * h1(s, u) + (1.0 - math.cos(rot.theta)) * h2(s, u)


def pixel_line_to_normal(abc, intrinsics) -> UnitVec3:
    """Map pixel-space line coefficients [A, B, C] to the unit plane normal.

    The plane normal in camera coordinates is the row vector [A, B, C] K,
    normalized. Raises ZeroLineError for zero coefficients and
    SingularIntrinsicsError when K has no inverse (the mapping would lose
    the back-projected plane).
    """
    l = np.asarray(abc, dtype=np.float64).reshape(3)
    if np.linalg.norm(l) < 1e-15:
        raise ZeroLineError("pixel line coefficients are all zero")
    k = np.asarray(intrinsics, dtype=np.float64).reshape(3, 3)
    if abs(np.linalg.det(k)) < 1e-12:
        raise SingularIntrinsicsError("intrinsics matrix is singular")
    cam = l @ k
    norm = np.linalg.norm(cam)
    if norm < 1e-15:
        raise ZeroLineError("mapped plane normal is numerically zero")
    return UnitVec3.from_array(cam / norm)


@dataclass(frozen=True)
class SphericalCube:
    """Axis-sphere rectangle [alpha_lo, alpha_hi] x [phi_lo, phi_hi].

    The phi interval is read modulo 2pi: phi_hi < phi_lo means the range
    wraps through 0 (width phi_hi - phi_lo + 2pi). Raw endpoint values are
    kept as given so repeated bisection stays exact.
    """

    alpha_lo: float
    alpha_hi: float
    phi_lo: float
    phi_hi: float

    def __post_init__(self) -> None:
        if self.alpha_lo < -_RANGE_TOL or self.alpha_hi > math.pi + _RANGE_TOL:
            raise ValueError("alpha range outside [0, pi]")
        if self.alpha_lo > self.alpha_hi:
            raise ValueError("alpha_lo exceeds alpha_hi")
        object.__setattr__(self, "alpha_lo", min(max(self.alpha_lo, 0.0), math.pi))
        object.__setattr__(self, "alpha_hi", min(max(self.alpha_hi, 0.0), math.pi))
        if self.phi_width > TWO_PI + _RANGE_TOL:
            raise ValueError("phi range wider than 2pi")

    @classmethod
    def full_sphere(cls) -> "SphericalCube":
        return cls(0.0, math.pi, 0.0, TWO_PI)

    @property
    def alpha_width(self) -> float:
        return self.alpha_hi - self.alpha_lo

    @property
    def phi_width(self) -> float:
        d = self.phi_hi - self.phi_lo
        if d < 0.0:
            d += TWO_PI
        return min(d, TWO_PI)

    @property
    def max_edge(self) -> float:
        return max(self.alpha_width, self.phi_width)

    def center(self) -> PolarCoord:
        return PolarCoord(
            0.5 * (self.alpha_lo + self.alpha_hi),
            _wrap_phi(self.phi_lo + 0.5 * self.phi_width),
        )

    def corners(self) -> tuple[PolarCoord, ...]:
        pr = self.phi_lo + self.phi_width
        return (
            PolarCoord(self.alpha_lo, self.phi_lo),
            PolarCoord(self.alpha_lo, pr),
            PolarCoord(self.alpha_hi, self.phi_lo),
            PolarCoord(self.alpha_hi, pr),
        )

    def contains(self, p: PolarCoord, tol: float = MEMBER_TOL) -> bool:
        if p.alpha < self.alpha_lo - tol or p.alpha > self.alpha_hi + tol:
            return False
        # Poles collapse the phi coordinate: any azimuth matches.
        if p.alpha <= POLE_TOL or p.alpha >= math.pi - POLE_TOL:
            return True
        w = self.phi_width
        if w >= TWO_PI:
            return True
        rel = (p.phi - self.phi_lo) % TWO_PI
        return rel <= w + tol or rel >= TWO_PI - tol


def cube_contains(cube: SphericalCube, p: "PolarCoord | UnitVec3") -> bool:
    if isinstance(p, UnitVec3):
        p = unit_to_polar(p)
    return cube.contains(p)
