"""Exact extreme-value bounds for h1 and h2 over axis-sphere rectangles.

h1(u) = u . (v x n) is a pure sinusoid in the polar chart: writing the
normalized cross product c at colatitude alpha_k and azimuth phi_k,

    h1(u) = w * (sin(alpha_k) sin(alpha) cos(phi_k - phi) + cos(alpha_k) cos(alpha)).

cos of the azimuth gap is monotone in angular distance, so over a rectangle
the azimuth that maximizes h1 is the nearest point of the phi range to
phi_k and the minimizing azimuth is the farthest. What remains is a 1-D
sinusoid P sin(alpha) + Q cos(alpha) whose extreme over an alpha interval
has a closed form. The minimum is the mirrored maximum at the antipode.

h2(u) = (n . u)(u . v) - n . v is the quadratic form u^T S u - a with
S = (n v^T + v n^T) / 2. Its sphere-wide extremes sit at m = (v + n)/|v + n|
(value (1 - a)/2) and m_perp = (v - n)/|v - n| (value -(1 + a)/2); the only
other critical directions (+-c) are saddles, so over a rectangle each
extreme is either one of those interior points or lies on the boundary.
Boundary arcs reduce to one- and two-harmonic trigonometric polynomials
whose stationary points are found in closed form (meridian edges) or by
dense seeding plus derivative-sign bisection backed by the exact roots of
the degree-4 companion polynomial (parallel edges).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateAlphaKError, EmptyDataError
from .geometry import (
    DEGENERATE_W,
    MEMBER_TOL,
    POLE_TOL,
    TWO_PI,
    Correspondence,
    SphericalCube,
)

PI = math.pi

# |alpha_k - pi/2| below this makes tan(alpha_k) useless.
ALPHA_K_PIVOT_TOL = 1e-12

# Dense seeding resolution for the parallel-edge derivative scan.
EDGE_SEEDS = 64

# Default bisection target on the edge azimuth.
DEFAULT_PHI_TOL = 1e-12

# Leading-coefficient gate: below this ratio the second harmonic is treated
# as absent and the first-harmonic closed form is used instead.
_LEAD_RATIO = 1e-6

_QUARTER_TURNS = np.array([-0.5 * PI, 0.0, 0.5 * PI, PI])


@dataclass(frozen=True)
class HBounds:
    """Component-wise bounds of h1 and h2 over one cube, attained at cube points."""

    h1_lo: float
    h1_hi: float
    h2_lo: float
    h2_hi: float

    def __post_init__(self) -> None:
        if self.h1_lo > self.h1_hi or self.h2_lo > self.h2_hi:
            raise ValueError("bounds out of order")


def alpha_star(alpha_k: float, delta_phi: float) -> float:
    """Stationary colatitude of w(sin a_k cos(dphi) sin a + cos a_k cos a) in [0, pi].

    Solves sin(alpha_k) cos(alpha) cos(delta_phi) = sin(alpha) cos(alpha_k):
    with t = tan(alpha_k) cos(delta_phi) the zero is atan(t), lifted by pi
    when negative. alpha_k at pi/2 has no tangent; callers must split that
    case (the bound machinery itself never needs it).
    """
    if abs(alpha_k - 0.5 * PI) < ALPHA_K_PIVOT_TOL:
        raise DegenerateAlphaKError("alpha_k too close to pi/2")
    t = math.tan(alpha_k) * math.cos(delta_phi)
    a = math.atan(t)
    return a if a >= 0.0 else a + PI


class PackedCorrespondences:
    """Struct-of-arrays layout for batched bound evaluation.

    Precomputes per-correspondence scalars plus the symmetric products that
    feed the edge harmonics, so every bound evaluation is a handful of
    vectorized operations over all rows at once.
    """

    __slots__ = (
        "size",
        "v",
        "n",
        "a",
        "w",
        "degenerate",
        "cvn",
        "c_alpha",
        "c_phi",
        "m_alpha",
        "m_phi",
        "mp_alpha",
        "mp_phi",
        "g1",
        "g2",
        "g3",
        "g4",
        "g5",
        "g6",
    )

    def __init__(self, data: Sequence[Correspondence]):
        if not data:
            raise EmptyDataError("no correspondences")
        self.size = len(data)
        self.v = np.stack([s.v.as_array() for s in data])
        self.n = np.stack([s.n.as_array() for s in data])
        self.a = np.array([s.a for s in data])
        self.w = np.array([s.w for s in data])
        self.degenerate = np.array([s.degenerate for s in data], dtype=bool)
        self.cvn = np.cross(self.v, self.n)
        self.c_alpha = np.array([s.c_polar.alpha for s in data])
        self.c_phi = np.array([s.c_polar.phi for s in data])
        self.m_alpha = np.array([s.m_polar.alpha for s in data])
        self.m_phi = np.array([s.m_polar.phi for s in data])
        self.mp_alpha = np.array([s.m_perp_polar.alpha for s in data])
        self.mp_phi = np.array([s.m_perp_polar.phi for s in data])
        self._fill_products()

    def _fill_products(self) -> None:
        n1, n2, n3 = self.n[:, 0], self.n[:, 1], self.n[:, 2]
        v1, v2, v3 = self.v[:, 0], self.v[:, 1], self.v[:, 2]
        self.g1 = n1 * v3 + v1 * n3
        self.g2 = n2 * v3 + v2 * n3
        self.g3 = n1 * v1 - n2 * v2
        self.g4 = n1 * v2 + n2 * v1
        self.g5 = n1 * v1 + n2 * v2
        self.g6 = n3 * v3

    def take(self, idx: np.ndarray) -> "PackedCorrespondences":
        sub = object.__new__(PackedCorrespondences)
        sub.size = int(idx.shape[0])
        for name in self.__slots__[1:]:
            setattr(sub, name, getattr(self, name)[idx])
        return sub

    def h_values(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """h1 and h2 of every row at one axis u (3,)."""
        h1v = self.cvn @ u
        h2v = (self.n @ u) * (self.v @ u) - self.a
        return h1v, h2v


# ---------------------------------------------------------------------------
# shared helpers


def _members(alpha: np.ndarray, phi: np.ndarray, cube: SphericalCube) -> np.ndarray:
    """Vectorized cube membership with inclusive tolerance (widening-safe)."""
    tol = MEMBER_TOL
    a_in = (alpha >= cube.alpha_lo - tol) & (alpha <= cube.alpha_hi + tol)
    pole = (alpha <= POLE_TOL) | (alpha >= PI - POLE_TOL)
    w = cube.phi_width
    if w >= TWO_PI:
        return a_in
    rel = (phi - cube.phi_lo) % TWO_PI
    p_in = (rel <= w + tol) | (rel >= TWO_PI - tol)
    return a_in & (pole | p_in)


def _nearest_azimuth_gap(phi_k: np.ndarray, phi_lo: float, width: float) -> np.ndarray:
    """Angular distance from phi_k to the closest azimuth of the range."""
    rel = (phi_k - phi_lo) % TWO_PI
    d_left = np.minimum(rel, TWO_PI - rel)
    rel_r = (rel - width) % TWO_PI
    d_right = np.minimum(rel_r, TWO_PI - rel_r)
    out = np.minimum(d_left, d_right)
    return np.where(rel <= width, 0.0, out)


def _max_sinusoid(p: np.ndarray, q: np.ndarray, a_lo: float, a_hi: float) -> np.ndarray:
    """max over alpha in [a_lo, a_hi] of p sin(alpha) + q cos(alpha).

    gamma = atan2(p, q) is the sphere-wide maximizer when it lands in
    [0, pi] (p >= 0); then the interval max sits at the nearest feasible
    point, i.e. gamma clamped. Otherwise gamma + pi is the interior
    minimizer and the max is at the endpoint farthest from it.
    """
    gamma = np.arctan2(p, q)
    near = np.clip(gamma, a_lo, a_hi)
    a_min = gamma + PI
    far = np.where(np.abs(a_lo - a_min) >= np.abs(a_hi - a_min), a_lo, a_hi)
    sel = np.where(gamma >= 0.0, near, far)
    return p * np.sin(sel) + q * np.cos(sel)


# ---------------------------------------------------------------------------
# h1 bounds


def h1_bounds_packed(p: PackedCorrespondences, cube: SphericalCube) -> tuple[np.ndarray, np.ndarray]:
    al, ar = cube.alpha_lo, cube.alpha_hi
    pl, width = cube.phi_lo, cube.phi_width
    near = _nearest_azimuth_gap(p.c_phi, pl, width)
    # max distance to the range = pi - min distance from the antipode
    far = PI - _nearest_azimuth_gap(p.c_phi + PI, pl, width)
    sa = np.sin(p.c_alpha)
    ca = np.cos(p.c_alpha)
    hi = p.w * _max_sinusoid(sa * np.cos(near), ca, al, ar)
    lo = -p.w * _max_sinusoid(-sa * np.cos(far), -ca, al, ar)
    # membership fast paths pin the attained extremes exactly
    c_in = _members(p.c_alpha, p.c_phi, cube)
    cm_in = _members(PI - p.c_alpha, p.c_phi + PI, cube)
    hi = np.where(c_in, p.w, hi)
    lo = np.where(cm_in, -p.w, lo)
    # ill-defined rotation plane: fall back to the amplitude box
    hi = np.where(p.degenerate, p.w, hi)
    lo = np.where(p.degenerate, -p.w, lo)
    np.clip(lo, -p.w, p.w, out=lo)
    np.clip(hi, -p.w, p.w, out=hi)
    # both sides are exact attained values; on width-zero cubes their
    # different float paths can invert the pair by an ulp
    return np.minimum(lo, hi), np.maximum(lo, hi)


# ---------------------------------------------------------------------------
# h2 bounds


def _h2_at_angles(p: PackedCorrespondences, alpha: float, phi: float) -> np.ndarray:
    sa = math.sin(alpha)
    u = np.array([sa * math.cos(phi), sa * math.sin(phi), math.cos(alpha)])
    return (p.n @ u) * (p.v @ u) - p.a


def _edge_val(d0, d1, d2, d3, d4, phi):
    return (
        d0
        + d1 * np.cos(phi)
        + d2 * np.sin(phi)
        + d3 * np.cos(2.0 * phi)
        + d4 * np.sin(2.0 * phi)
    )


def _edge_der(d1, d2, d3, d4, phi):
    return (
        -d1 * np.sin(phi)
        + d2 * np.cos(phi)
        - 2.0 * d3 * np.sin(2.0 * phi)
        + 2.0 * d4 * np.cos(2.0 * phi)
    )


def _companion_unit_angles(lead: np.ndarray, c3: np.ndarray, c1: np.ndarray, c0: np.ndarray):
    """Unit-circle roots of lead z^4 + c3 z^3 + c1 z + c0, as angles.

    The polynomial is self-inversive (it encodes a real trigonometric
    derivative), so the roots of interest have |z| = 1. Returns (angles,
    keep mask) of shape (B, 4).
    """
    b3 = c3 / lead
    b1 = c1 / lead
    b0 = c0 / lead
    m = lead.shape[0]
    comp = np.zeros((m, 4, 4), dtype=np.complex128)
    comp[:, 0, 0] = -b3
    comp[:, 0, 2] = -b1
    comp[:, 0, 3] = -b0
    comp[:, 1, 0] = 1.0
    comp[:, 2, 1] = 1.0
    comp[:, 3, 2] = 1.0
    z = np.linalg.eigvals(comp)
    keep = np.abs(np.abs(z) - 1.0) < 1e-6
    return np.angle(z), keep


def h2_bounds_packed(
    p: PackedCorrespondences, cube: SphericalCube, phi_tol: float = DEFAULT_PHI_TOL
) -> tuple[np.ndarray, np.ndarray]:
    k = p.size
    al, ar = cube.alpha_lo, cube.alpha_hi
    pl, width = cube.phi_lo, cube.phi_width
    pr = pl + width
    cap_hi = 0.5 * (1.0 - p.a)
    cap_lo = -0.5 * (1.0 + p.a)
    m_in = _members(p.m_alpha, p.m_phi, cube) | _members(PI - p.m_alpha, p.m_phi + PI, cube)
    mp_in = _members(p.mp_alpha, p.mp_phi, cube) | _members(PI - p.mp_alpha, p.mp_phi + PI, cube)
    if bool(np.all(m_in & mp_in)):
        return cap_lo.copy(), cap_hi.copy()

    bhi = np.full(k, -np.inf)
    blo = np.full(k, np.inf)

    def absorb(vals: np.ndarray) -> None:
        nonlocal bhi, blo
        if vals.ndim == 1:
            np.maximum(bhi, vals, out=bhi)
            np.minimum(blo, vals, out=blo)
        else:
            np.maximum(bhi, vals.max(axis=1), out=bhi)
            np.minimum(blo, vals.min(axis=1), out=blo)

    # corners (defensive: also the endpoints of every edge search)
    for aa, pp in ((al, pl), (al, pr), (ar, pl), (ar, pr)):
        absorb(_h2_at_angles(p, aa, pp))

    # meridian edges: h2(alpha) = c0 + c1 cos(2 alpha) + c2 sin(2 alpha)
    for pp in (pl, pr):
        cp, sp = math.cos(pp), math.sin(pp)
        pn = p.n[:, 0] * cp + p.n[:, 1] * sp
        pv = p.v[:, 0] * cp + p.v[:, 1] * sp
        n3, v3 = p.n[:, 2], p.v[:, 2]
        c0 = 0.5 * (pn * pv + n3 * v3) - p.a
        c1 = 0.5 * (n3 * v3 - pn * pv)
        c2 = 0.5 * (pn * v3 + pv * n3)
        base = 0.5 * np.arctan2(c2, c1)
        cand = base[:, None] + _QUARTER_TURNS[None, :]
        ok = (cand >= al) & (cand <= ar)
        vals = c0[:, None] + c1[:, None] * np.cos(2.0 * cand) + c2[:, None] * np.sin(2.0 * cand)
        neg = np.where(ok, vals, -np.inf).max(axis=1)
        pos = np.where(ok, vals, np.inf).min(axis=1)
        np.maximum(bhi, neg, out=bhi)
        np.minimum(blo, pos, out=blo)

    # parallel edges: two-harmonic trigonometric polynomial in phi
    for aa in (al, ar):
        s_, c_ = math.sin(aa), math.cos(aa)
        if s_ < POLE_TOL:
            absorb(_h2_at_angles(p, aa, 0.0))
            continue
        d0 = 0.5 * s_ * s_ * p.g5 + c_ * c_ * p.g6 - p.a
        d1 = s_ * c_ * p.g1
        d2 = s_ * c_ * p.g2
        d3 = 0.5 * s_ * s_ * p.g3
        d4 = 0.5 * s_ * s_ * p.g4

        phis = np.linspace(pl, pr, EDGE_SEEDS + 1)
        sin1, cos1 = np.sin(phis), np.cos(phis)
        sin2, cos2 = np.sin(2.0 * phis), np.cos(2.0 * phis)
        fval = (
            d0[:, None]
            + d1[:, None] * cos1
            + d2[:, None] * sin1
            + d3[:, None] * cos2
            + d4[:, None] * sin2
        )
        absorb(fval)
        fder = (
            -d1[:, None] * sin1
            + d2[:, None] * cos1
            - 2.0 * d3[:, None] * sin2
            + 2.0 * d4[:, None] * cos2
        )

        # Lipschitz certificate: |f'| clear of zero across every seed gap
        # means the edge is strictly monotone between corners.
        m2 = np.abs(d1) + np.abs(d2) + 4.0 * (np.abs(d3) + np.abs(d4))
        gap = width / EDGE_SEEDS
        quiet = np.abs(fder).min(axis=1) > 0.5 * m2 * gap
        if bool(quiet.all()):
            continue
        act = np.nonzero(~quiet)[0]
        fa = fder[act]

        # derivative-sign bisection on flagged seed gaps
        rows_b, cols = np.nonzero((fa[:, :-1] * fa[:, 1:]) < 0.0)
        if rows_b.size:
            rows = act[rows_b]
            lo_ = phis[cols].copy()
            hi_ = phis[cols + 1].copy()
            d1r, d2r, d3r, d4r = d1[rows], d2[rows], d3[rows], d4[rows]
            flo = _edge_der(d1r, d2r, d3r, d4r, lo_)
            if gap > phi_tol:
                iters = int(math.ceil(math.log2(gap / phi_tol)))
            else:
                iters = 1
            for _ in range(iters):
                mid = 0.5 * (lo_ + hi_)
                fm = _edge_der(d1r, d2r, d3r, d4r, mid)
                same = flo * fm > 0.0
                lo_ = np.where(same, mid, lo_)
                flo = np.where(same, fm, flo)
                hi_ = np.where(same, hi_, mid)
            root = 0.5 * (lo_ + hi_)
            vals = _edge_val(d0[rows], d1r, d2r, d3r, d4r, root)
            np.maximum.at(bhi, rows, vals)
            np.minimum.at(blo, rows, vals)

        # first-harmonic stationary azimuths (exact when d3 = d4 = 0,
        # cheap extra candidates otherwise)
        hroot = np.arctan2(d2[act], d1[act])
        for off in (0.0, PI):
            ph = hroot + off
            rel = (ph - pl) % TWO_PI
            inr = rel <= width + 1e-9
            if inr.any():
                rows = act[inr]
                ph_in = pl + np.minimum(rel[inr], width)
                vals = _edge_val(d0[rows], d1[rows], d2[rows], d3[rows], d4[rows], ph_in)
                np.maximum.at(bhi, rows, vals)
                np.minimum.at(blo, rows, vals)

        # companion-polynomial backstop: exact stationary set, catches
        # extremum pairs hiding inside one seed gap with no sign change
        lead = d4[act] + 1j * d3[act]
        c3c = 0.5 * (d2[act] + 1j * d1[act])
        c1c = 0.5 * (d2[act] - 1j * d1[act])
        c0c = d4[act] - 1j * d3[act]
        scale = np.maximum.reduce(
            [np.abs(lead), np.abs(c3c), np.abs(c1c), np.abs(c0c), np.full(act.size, 1e-300)]
        )
        okq = np.abs(lead) >= _LEAD_RATIO * scale
        if okq.any():
            sel = np.nonzero(okq)[0]
            ang, keep = _companion_unit_angles(lead[sel], c3c[sel], c1c[sel], c0c[sel])
            rel = (ang - pl) % TWO_PI
            keep &= rel <= width + 1e-9
            if keep.any():
                rows_q = act[sel]
                rows = np.repeat(rows_q, 4)[keep.ravel()]
                ph_in = pl + np.minimum(rel, width)[keep]
                vals = _edge_val(d0[rows], d1[rows], d2[rows], d3[rows], d4[rows], ph_in)
                np.maximum.at(bhi, rows, vals)
                np.minimum.at(blo, rows, vals)

    hi = np.where(m_in, cap_hi, bhi)
    lo = np.where(mp_in, cap_lo, blo)
    np.minimum(hi, cap_hi, out=hi)
    np.maximum(lo, cap_lo, out=lo)
    # see h1_bounds_packed: reconcile ulp inversions on width-zero cubes
    return np.minimum(lo, hi), np.maximum(lo, hi)


# ---------------------------------------------------------------------------
# scalar wrappers


def h1_bounds(cube: SphericalCube, s: Correspondence) -> tuple[float, float]:
    """Exact (min, max) of h1 over the cube, attained at cube points."""
    lo, hi = h1_bounds_packed(PackedCorrespondences([s]), cube)
    return float(lo[0]), float(hi[0])


def h2_bounds(
    cube: SphericalCube, s: Correspondence, phi_tol: float = DEFAULT_PHI_TOL
) -> tuple[float, float]:
    """Exact (min, max) of h2 over the cube, attained at cube points."""
    lo, hi = h2_bounds_packed(PackedCorrespondences([s]), cube, phi_tol)
    return float(lo[0]), float(hi[0])


def h_bounds(cube: SphericalCube, s: Correspondence) -> HBounds:
    """All four component bounds over the cube in one struct."""
    p = PackedCorrespondences([s])
    l1, u1 = h1_bounds_packed(p, cube)
    l2, u2 = h2_bounds_packed(p, cube)
    return HBounds(float(l1[0]), float(u1[0]), float(l2[0]), float(u2[0]))
