"""Feasible rotation-angle sets for banded sinusoids.

For a fixed axis u the residual is a pure sinusoid in theta:

    res(theta) = (a + h2) + R sin(theta + psi),
    R = sqrt(h1^2 + h2^2),  psi = atan2(-h2, h1),

so |res| <= eps is solved exactly over theta in [0, pi] by walking the
monotone pieces of sin. Over an axis cube the same machinery bounds the
residual: with sin(theta) >= 0 and 1 - cos(theta) >= 0 on [0, pi], the
envelope built from (h1_lo, h2_lo) lower-bounds every residual in the cube
and the (h1_hi, h2_hi) envelope upper-bounds it, so the relaxed feasible
set is {f_lo <= eps} intersect {f_hi >= -eps}, padded outward a hair to
keep floating-point rounding on the safe side.
"""

from __future__ import annotations

import math

import numpy as np

from .geometry import Correspondence, UnitVec3, h1 as _h1_at, h2 as _h2_at
from .hbounds import HBounds
from .intervals import IntervalSet

PI = math.pi

# Amplitudes below this are treated as a constant residual.
AMP_TOL = 1e-15

# Outward padding applied to relaxed sets only.
RELAX_MARGIN = 1e-12

# Window around theta in {0, pi} where an interval endpoint is pinned to the
# domain end when direct evaluation says the end is feasible. Wider gaps are
# genuine interior endpoints and stay put.
END_SNAP = 1e-14


def _domain_end_fixup(out, offset, amp, ph, band_lo, band_hi):
    """Exact closure of the solution at theta in {0, pi}.

    The x-shift in sinusoid_solve computes endpoints as (x0 + pi) - x0,
    which can land an ulp off the domain end. Membership of the two ends is
    decided here by direct evaluation instead, in both directions.
    """
    if not out:
        return out
    r0 = offset + amp * math.sin(ph)
    rpi = offset + amp * math.sin(PI + ph)
    lo0, hi0 = out[0]
    if band_lo <= r0 <= band_hi:
        if 0.0 < lo0 <= END_SNAP:
            out[0] = (0.0, hi0)
    elif lo0 == 0.0:
        out[0] = (math.nextafter(0.0, 1.0), hi0)
    lon, hin = out[-1]
    if band_lo <= rpi <= band_hi:
        if PI - END_SNAP <= hin < PI:
            out[-1] = (lon, PI)
    elif hin == PI:
        out[-1] = (lon, math.nextafter(PI, 0.0))
    return [(a, b) for a, b in out if a <= b]


def _piece_solution(j: int, pz: float, qz: float, s_lo: float, s_hi: float):
    """Solve sin(x) in [s_lo, s_hi] on one monotone piece [pz, qz].

    The piece lies inside [j pi - pi/2, j pi + pi/2] where sin is monotone
    (increasing for even j). Returns an x-interval or None.
    """
    sp, sq = math.sin(pz), math.sin(qz)
    even = j % 2 == 0
    lo_v, hi_v = (sp, sq) if sp <= sq else (sq, sp)
    a_s = max(s_lo, lo_v)
    b_s = min(s_hi, hi_v)
    if a_s > b_s:
        return None
    a_s = min(max(a_s, -1.0), 1.0)
    b_s = min(max(b_s, -1.0), 1.0)
    # Where the band does not bind, the solution endpoint is the piece
    # endpoint itself; pin it exactly instead of round-tripping through
    # asin, which loses precision near the crests.
    if even:
        xa = pz if lo_v >= s_lo else j * PI + math.asin(a_s)
        xb = qz if hi_v <= s_hi else j * PI + math.asin(b_s)
    else:
        xa = pz if hi_v <= s_hi else j * PI - math.asin(b_s)
        xb = qz if lo_v >= s_lo else j * PI - math.asin(a_s)
    xa = min(max(xa, pz), qz)
    xb = min(max(xb, pz), qz)
    if xb < xa:
        xa, xb = xb, xa
    return xa, xb


def sinusoid_solve(
    offset: float, amplitude: float, phase: float, band_lo: float, band_hi: float
) -> IntervalSet:
    """{theta in [0, pi] : band_lo <= offset + amplitude sin(theta + phase) <= band_hi}.

    Exact up to floating point; at most two disjoint intervals arise because
    theta + phase sweeps half a period.
    """
    if band_lo > band_hi:
        return IntervalSet()
    amp, ph = amplitude, phase
    if amp < 0.0:
        amp, ph = -amp, ph + PI
    if amp <= AMP_TOL:
        if band_lo <= offset <= band_hi:
            return IntervalSet.from_pairs([(0.0, PI)])
        return IntervalSet()
    s_lo = (band_lo - offset) / amp
    s_hi = (band_hi - offset) / amp
    if s_lo > 1.0 or s_hi < -1.0:
        return IntervalSet()

    x0 = ph
    j0 = math.floor((x0 - 0.5 * PI) / PI) + 1.0
    cut = min(0.5 * PI + j0 * PI, x0 + PI)
    pieces = [(x0, cut)]
    if cut < x0 + PI:
        pieces.append((cut, x0 + PI))

    out = []
    for pz, qz in pieces:
        j = int(math.floor(0.5 * (pz + qz) / PI + 0.5))
        sol = _piece_solution(j, pz, qz, s_lo, s_hi)
        if sol is None:
            continue
        ta = min(max(sol[0] - x0, 0.0), PI)
        tb = min(max(sol[1] - x0, 0.0), PI)
        out.append((ta, tb))
    out = _domain_end_fixup(out, offset, amp, ph, band_lo, band_hi)
    return IntervalSet.from_pairs(out)


def feasible_theta_exact(s: Correspondence, u: UnitVec3, eps: float) -> IntervalSet:
    """Exact {theta : |res(u, theta)| <= eps} for one axis."""
    h1v = _h1_at(s, u)
    h2v = _h2_at(s, u)
    offset = s.a + h2v
    amp = math.hypot(h1v, h2v)
    phase = math.atan2(-h2v, h1v)
    return sinusoid_solve(offset, amp, phase, -eps, eps)


def feasible_theta_relaxed(s: Correspondence, hb: HBounds, eps: float) -> IntervalSet:
    """Superset of every exact set over a cube with the given h-bounds."""
    set_lo = sinusoid_solve(
        s.a + hb.h2_lo,
        math.hypot(hb.h1_lo, hb.h2_lo),
        math.atan2(-hb.h2_lo, hb.h1_lo),
        -math.inf,
        eps,
    )
    set_hi = sinusoid_solve(
        s.a + hb.h2_hi,
        math.hypot(hb.h1_hi, hb.h2_hi),
        math.atan2(-hb.h2_hi, hb.h1_hi),
        -eps,
        math.inf,
    )
    inter = set_lo.intersect(set_hi)
    if inter.is_empty:
        return inter
    return IntervalSet.from_pairs(
        [
            (max(iv.lo - RELAX_MARGIN, 0.0), min(iv.hi + RELAX_MARGIN, PI))
            for iv in inter
        ]
    )


# ---------------------------------------------------------------------------
# batched engine (used by the solver; mirrors the scalar path)


def _band_solve_batch(off, amp, ph, band_lo, band_hi):
    """Vector form of sinusoid_solve: returns intervals (K, 2, 2), valid (K, 2).

    Slots are emitted in ascending theta order. band_lo/band_hi may be
    scalars (possibly infinite) or (K,) arrays.
    """
    k = off.shape[0]
    band_lo = np.broadcast_to(np.asarray(band_lo, dtype=np.float64), (k,))
    band_hi = np.broadcast_to(np.asarray(band_hi, dtype=np.float64), (k,))
    const = amp <= AMP_TOL
    amp_safe = np.where(const, 1.0, amp)
    with np.errstate(invalid="ignore"):
        s_lo = (band_lo - off) / amp_safe
        s_hi = (band_hi - off) / amp_safe

    x0 = ph
    j0 = np.floor((x0 - 0.5 * PI) / PI) + 1.0
    cut = np.minimum(0.5 * PI + j0 * PI, x0 + PI)

    ivs = np.zeros((k, 2, 2))
    valid = np.zeros((k, 2), dtype=bool)
    for slot, (pz, qz) in enumerate(((x0, cut), (cut, x0 + PI))):
        live = qz > pz if slot == 1 else np.ones(k, dtype=bool)
        j = np.floor(0.5 * (pz + qz) / PI + 0.5)
        even = np.mod(j, 2.0) == 0.0
        sp, sq = np.sin(pz), np.sin(qz)
        lo_v = np.minimum(sp, sq)
        hi_v = np.maximum(sp, sq)
        a_s = np.maximum(s_lo, lo_v)
        b_s = np.minimum(s_hi, hi_v)
        ok = live & (a_s <= b_s) & ~const
        a_c = np.arcsin(np.clip(a_s, -1.0, 1.0))
        b_c = np.arcsin(np.clip(b_s, -1.0, 1.0))
        xa = np.where(even, j * PI + a_c, j * PI - b_c)
        xb = np.where(even, j * PI + b_c, j * PI - a_c)
        # pin to piece endpoints where the band does not bind (see
        # _piece_solution; asin loses precision near the crests)
        lo_unbound = lo_v >= s_lo
        hi_unbound = hi_v <= s_hi
        xa = np.where(np.where(even, lo_unbound, hi_unbound), pz, xa)
        xb = np.where(np.where(even, hi_unbound, lo_unbound), qz, xb)
        xa = np.clip(xa, pz, qz)
        xb = np.clip(xb, pz, qz)
        ta = np.clip(np.minimum(xa, xb) - x0, 0.0, PI)
        tb = np.clip(np.maximum(xa, xb) - x0, 0.0, PI)
        ivs[:, slot, 0] = ta
        ivs[:, slot, 1] = tb
        valid[:, slot] = ok
    # exact closure at theta in {0, pi}: see _domain_end_fixup
    rows = np.arange(k)
    live = valid.any(axis=1) & ~const
    front = np.where(valid[:, 0], 0, 1)
    back = np.where(valid[:, 1], 1, 0)
    r0 = off + amp * np.sin(ph)
    rpi = off + amp * np.sin(PI + ph)
    feas0 = live & (r0 >= band_lo) & (r0 <= band_hi)
    feaspi = live & (rpi >= band_lo) & (rpi <= band_hi)
    flo = ivs[rows, front, 0]
    m = feas0 & (flo > 0.0) & (flo <= END_SNAP)
    ivs[rows[m], front[m], 0] = 0.0
    m = live & ~feas0 & (ivs[rows, front, 0] == 0.0)
    ivs[rows[m], front[m], 0] = np.nextafter(0.0, 1.0)
    bhi = ivs[rows, back, 1]
    m = feaspi & (bhi >= PI - END_SNAP) & (bhi < PI)
    ivs[rows[m], back[m], 1] = PI
    m = live & ~feaspi & (ivs[rows, back, 1] == PI)
    ivs[rows[m], back[m], 1] = np.nextafter(PI, 0.0)
    valid &= ~(ivs[:, :, 0] > ivs[:, :, 1])
    # constant residual: whole range or nothing, in slot 0
    ok_const = const & (band_lo <= off) & (off <= band_hi)
    if ok_const.any():
        ivs[ok_const, 0, 0] = 0.0
        ivs[ok_const, 0, 1] = PI
        valid[ok_const, 0] = True
        valid[ok_const, 1] = False
    return ivs, valid


def _merge_sorted_slots(ivs: np.ndarray, valid: np.ndarray):
    """Merge touching/overlapping interval slots per row.

    Valid slots must be ascending by lower bound. Merging matters: the
    stabbing count treats every interval as one vote, so a correspondence
    must never contribute two overlapping pieces. Classic sweep: with lows
    sorted, a slot opens a new union component exactly when its low exceeds
    the running max of the highs seen so far.
    """
    nslots = ivs.shape[1]
    lo = np.where(valid, ivs[:, :, 0], np.inf)
    hi = np.where(valid, ivs[:, :, 1], -np.inf)
    run_hi = np.maximum.accumulate(hi, axis=1)
    new = np.ones_like(valid)
    new[:, 1:] = lo[:, 1:] > run_hi[:, :-1]
    gid = np.cumsum(new, axis=1) - 1
    out_ivs = np.zeros_like(ivs)
    out_valid = np.zeros_like(valid)
    for g in range(nslots):
        mask = valid & (gid == g)
        any_g = mask.any(axis=1)
        if not any_g.any():
            continue
        out_ivs[:, g, 0] = np.where(any_g, np.where(mask, lo, np.inf).min(axis=1), 0.0)
        out_ivs[:, g, 1] = np.where(any_g, np.where(mask, hi, -np.inf).max(axis=1), 0.0)
        out_valid[:, g] = any_g
    return out_ivs, out_valid


def exact_sets_batch(a, h1v, h2v, eps):
    """Per-row exact feasible sets at one axis: intervals (K, 2, 2), valid (K, 2)."""
    off = a + h2v
    amp = np.hypot(h1v, h2v)
    ph = np.arctan2(-h2v, h1v)
    ivs, valid = _band_solve_batch(off, amp, ph, -eps, eps)
    return _merge_sorted_slots(ivs, valid)


def relaxed_sets_batch(a, h1_lo, h1_hi, h2_lo, h2_hi, eps):
    """Per-row relaxed feasible sets over a cube: intervals (K, 4, 2), valid (K, 4)."""
    iv_lo, ok_lo = _band_solve_batch(
        a + h2_lo, np.hypot(h1_lo, h2_lo), np.arctan2(-h2_lo, h1_lo), -np.inf, eps
    )
    iv_hi, ok_hi = _band_solve_batch(
        a + h2_hi, np.hypot(h1_hi, h2_hi), np.arctan2(-h2_hi, h1_hi), -eps, np.inf
    )
    k = a.shape[0]
    lo = np.maximum(iv_lo[:, :, None, 0], iv_hi[:, None, :, 0]).reshape(k, 4)
    hi = np.minimum(iv_lo[:, :, None, 1], iv_hi[:, None, :, 1]).reshape(k, 4)
    ok = (ok_lo[:, :, None] & ok_hi[:, None, :]).reshape(k, 4) & (lo <= hi)
    # outward rounding, then re-sort and merge (padding can fuse pieces)
    lo = np.clip(lo - RELAX_MARGIN, 0.0, PI)
    hi = np.clip(hi + RELAX_MARGIN, 0.0, PI)
    order = np.argsort(np.where(ok, lo, np.inf), axis=1, kind="stable")
    lo = np.take_along_axis(lo, order, axis=1)
    hi = np.take_along_axis(hi, order, axis=1)
    ok = np.take_along_axis(ok, order, axis=1)
    ivs = np.stack([lo, hi], axis=2)
    return _merge_sorted_slots(ivs, ok)


def stab_arrays(los: np.ndarray, his: np.ndarray) -> tuple[int, float]:
    """Max stab count and a witness over closed intervals given as arrays."""
    m = los.shape[0]
    if m == 0:
        return 0, 0.0
    coords = np.concatenate([los, his])
    kinds = np.concatenate([np.zeros(m, dtype=np.int8), np.ones(m, dtype=np.int8)])
    order = np.lexsort((kinds, coords))
    cum = np.cumsum(np.where(kinds[order] == 0, 1, -1))
    idx = int(np.argmax(cum))
    best = int(cum[idx])
    start = float(coords[order[idx]])
    end = float(coords[order[idx + 1]])
    return best, 0.5 * (start + end)
