"""Brute-force oracles used to validate the closed-form machinery.

Everything here is re-derived from raw dot and cross products on dense
grids; nothing imports the bound formulas it is meant to check. The
consensus oracle enumerates the full (alpha, phi, theta) grid. Its inner
loop locates each correspondence's feasible theta-grid run per monotone
piece of the residual with direct residual evaluations at every decision
point, so its counts are identical to the naive triple loop (which is also
provided, and cross-checked in the tests) at a fraction of the cost.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .geometry import (
    AxisAngle,
    Correspondence,
    PolarCoord,
    SphericalCube,
    UnitVec3,
    polar_to_unit,
)
from .intervals import IntervalSet

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba present in the supported env
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


def _raw_arrays(data: Sequence[Correspondence]):
    v = np.stack([s.v.as_array() for s in data])
    n = np.stack([s.n.as_array() for s in data])
    a = np.einsum("ij,ij->i", n, v)
    cvn = np.cross(v, n)
    return v, n, a, cvn


# ---------------------------------------------------------------------------
# h extremes over a cube


@njit(cache=True)
def _h_extrema_kernel(v, n, a, cvn, alphas, phis):  # pragma: no cover - jit
    h1_min = np.inf
    h1_max = -np.inf
    h2_min = np.inf
    h2_max = -np.inf
    for ia in range(alphas.size):
        sa = math.sin(alphas[ia])
        ca = math.cos(alphas[ia])
        for ip in range(phis.size):
            ux = sa * math.cos(phis[ip])
            uy = sa * math.sin(phis[ip])
            uz = ca
            h1 = ux * cvn[0] + uy * cvn[1] + uz * cvn[2]
            nd = n[0] * ux + n[1] * uy + n[2] * uz
            vd = v[0] * ux + v[1] * uy + v[2] * uz
            h2 = nd * vd - a
            if h1 < h1_min:
                h1_min = h1
            if h1 > h1_max:
                h1_max = h1
            if h2 < h2_min:
                h2_min = h2
            if h2 > h2_max:
                h2_max = h2
    return h1_min, h1_max, h2_min, h2_max


def _h_extrema_numpy(v, n, a, cvn, alphas, phis):
    h1_min, h1_max = np.inf, -np.inf
    h2_min, h2_max = np.inf, -np.inf
    sa, ca = np.sin(alphas), np.cos(alphas)
    cp, sp = np.cos(phis), np.sin(phis)
    chunk = max(1, int(4_000_000 // max(phis.size, 1)))
    for start in range(0, alphas.size, chunk):
        end = min(start + chunk, alphas.size)
        ux = sa[start:end, None] * cp[None, :]
        uy = sa[start:end, None] * sp[None, :]
        uz = ca[start:end, None]
        h1 = ux * cvn[0] + uy * cvn[1] + uz * cvn[2]
        nd = n[0] * ux + n[1] * uy + n[2] * uz
        vd = v[0] * ux + v[1] * uy + v[2] * uz
        h2 = nd * vd - a
        h1_min = min(h1_min, float(h1.min()))
        h1_max = max(h1_max, float(h1.max()))
        h2_min = min(h2_min, float(h2.min()))
        h2_max = max(h2_max, float(h2.max()))
    return h1_min, h1_max, h2_min, h2_max


def oracle_h_extrema(
    cube: SphericalCube, s: Correspondence, grid: int = 2000
) -> tuple[float, float, float, float]:
    """(h1_min, h1_max, h2_min, h2_max) over a dense grid incl. all corners."""
    if grid < 2:
        raise ValueError("grid must be at least 2")
    v, n, a, cvn = _raw_arrays([s])
    alphas = np.linspace(cube.alpha_lo, cube.alpha_hi, grid)
    phis = np.linspace(cube.phi_lo, cube.phi_lo + cube.phi_width, grid)
    fn = _h_extrema_kernel if HAVE_NUMBA else _h_extrema_numpy
    out = fn(v[0], n[0], float(a[0]), cvn[0], alphas, phis)
    return tuple(float(x) for x in out)


# ---------------------------------------------------------------------------
# exhaustive consensus search


@njit(cache=True)
def _axis_runs(
    h1, h2, a, eps, thetas, starts, ends, base
):  # pragma: no cover - jit
    """Feasible theta-grid runs of one correspondence at one axis.

    Direct residual evaluation at every queried index; the sinusoid shape
    is used only to know that runs are contiguous per monotone piece.
    Returns the number of runs appended starting at `base`.
    """
    t_count = thetas.size
    # residual at index i: a + sin(t) h1 + (1 - cos(t)) h2
    # critical interior point of the residual, if any
    theta_c = math.atan2(-h1, h2)
    if theta_c <= 0.0:
        theta_c += math.pi
    h = thetas[1] - thetas[0]
    n_runs = 0
    if theta_c <= 0.0 or theta_c >= math.pi:
        piece_bounds = ((0, t_count - 1), (1, 0), (1, 0))
        i_near = -1
    else:
        i_near = int(round(theta_c / h))
        if i_near < 0:
            i_near = 0
        if i_near > t_count - 1:
            i_near = t_count - 1
        # singleton kept in the middle so runs are emitted sorted by start;
        # the merge below relies on that order
        piece_bounds = ((0, i_near - 1), (i_near, i_near), (i_near + 1, t_count - 1))
    for pb in range(3):
        i0, i1 = piece_bounds[pb]
        if i0 > i1:
            continue
        if pb == 1 and i_near >= 0:
            t = thetas[i0]
            r = a + math.sin(t) * h1 + (1.0 - math.cos(t)) * h2
            if abs(r) <= eps:
                starts[base + n_runs] = i0
                ends[base + n_runs] = i0
                n_runs += 1
            continue
        t0 = thetas[i0]
        t1 = thetas[i1]
        r0 = a + math.sin(t0) * h1 + (1.0 - math.cos(t0)) * h2
        r1 = a + math.sin(t1) * h1 + (1.0 - math.cos(t1)) * h2
        increasing = r1 >= r0
        if increasing:
            if r1 < -eps or r0 > eps:
                continue
        else:
            if r0 < -eps or r1 > eps:
                continue
        # first index with r >= -eps (increasing) / r <= eps (decreasing)
        lo, hi = i0, i1
        while lo < hi:
            mid = (lo + hi) // 2
            t = thetas[mid]
            r = a + math.sin(t) * h1 + (1.0 - math.cos(t)) * h2
            inside_low = r >= -eps if increasing else r <= eps
            if inside_low:
                hi = mid
            else:
                lo = mid + 1
        run_s = lo
        # last index with r <= eps (increasing) / r >= -eps (decreasing)
        lo, hi = i0, i1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            t = thetas[mid]
            r = a + math.sin(t) * h1 + (1.0 - math.cos(t)) * h2
            inside_high = r <= eps if increasing else r >= -eps
            if inside_high:
                lo = mid
            else:
                hi = mid - 1
        run_e = lo
        if run_s > run_e:
            continue
        t = thetas[run_s]
        if abs(a + math.sin(t) * h1 + (1.0 - math.cos(t)) * h2) > eps:
            continue
        starts[base + n_runs] = run_s
        ends[base + n_runs] = run_e
        n_runs += 1
    # merge overlapping or touching runs (they arrive ordered)
    w = base
    for r_i in range(base + 1, base + n_runs):
        if starts[r_i] <= ends[w] + 1:
            if ends[r_i] > ends[w]:
                ends[w] = ends[r_i]
        else:
            w += 1
            starts[w] = starts[r_i]
            ends[w] = ends[r_i]
    if n_runs == 0:
        return 0
    return w - base + 1


@njit(cache=True)
def _consensus_kernel(v, n, a, cvn, alphas, phis, thetas, eps):  # pragma: no cover
    k_count = a.size
    best = -1
    bia = 0
    bip = 0
    bit = 0
    starts = np.empty(3 * k_count, np.int64)
    ends = np.empty(3 * k_count, np.int64)
    for ia in range(alphas.size):
        sa = math.sin(alphas[ia])
        ca = math.cos(alphas[ia])
        for ip in range(phis.size):
            ux = sa * math.cos(phis[ip])
            uy = sa * math.sin(phis[ip])
            uz = ca
            n_ev = 0
            for k in range(k_count):
                h1 = ux * cvn[k, 0] + uy * cvn[k, 1] + uz * cvn[k, 2]
                nd = n[k, 0] * ux + n[k, 1] * uy + n[k, 2] * uz
                vd = v[k, 0] * ux + v[k, 1] * uy + v[k, 2] * uz
                h2 = nd * vd - a[k]
                n_ev += _axis_runs(h1, h2, a[k], eps, thetas, starts, ends, n_ev)
            if n_ev == 0:
                continue
            # insertion sort both event lists (tiny)
            for i in range(1, n_ev):
                sv = starts[i]
                j = i - 1
                while j >= 0 and starts[j] > sv:
                    starts[j + 1] = starts[j]
                    j -= 1
                starts[j + 1] = sv
                ev = ends[i]
                j = i - 1
                while j >= 0 and ends[j] > ev:
                    ends[j + 1] = ends[j]
                    j -= 1
                ends[j + 1] = ev
            # sweep: count at a start s = #{starts <= s} - #{ends < s}
            je = 0
            axis_best = -1
            axis_pos = 0
            for i in range(n_ev):
                while je < n_ev and ends[je] < starts[i]:
                    je += 1
                cur = (i + 1) - je
                if cur > axis_best:
                    axis_best = cur
                    axis_pos = starts[i]
            if axis_best > best:
                best = axis_best
                bia = ia
                bip = ip
                bit = axis_pos
    return best, bia, bip, bit


@njit(cache=True)
def _consensus_kernel_naive(v, n, a, cvn, alphas, phis, thetas, eps):  # pragma: no cover
    k_count = a.size
    best = -1
    bia = 0
    bip = 0
    bit = 0
    for ia in range(alphas.size):
        sa = math.sin(alphas[ia])
        ca = math.cos(alphas[ia])
        for ip in range(phis.size):
            ux = sa * math.cos(phis[ip])
            uy = sa * math.sin(phis[ip])
            uz = ca
            for it in range(thetas.size):
                st = math.sin(thetas[it])
                omc = 1.0 - math.cos(thetas[it])
                cnt = 0
                for k in range(k_count):
                    h1 = ux * cvn[k, 0] + uy * cvn[k, 1] + uz * cvn[k, 2]
                    nd = n[k, 0] * ux + n[k, 1] * uy + n[k, 2] * uz
                    vd = v[k, 0] * ux + v[k, 1] * uy + v[k, 2] * uz
                    h2 = nd * vd - a[k]
                    if abs(a[k] + st * h1 + omc * h2) <= eps:
                        cnt += 1
                if cnt > best:
                    best = cnt
                    bia = ia
                    bip = ip
                    bit = it
    return best, bia, bip, bit


def _consensus_grids(resolution: float):
    n_alpha = int(math.ceil(math.pi / resolution)) + 1
    n_phi = max(1, int(math.ceil(2.0 * math.pi / resolution)))
    n_theta = int(math.ceil(math.pi / resolution)) + 1
    alphas = np.linspace(0.0, math.pi, n_alpha)
    phis = np.linspace(0.0, 2.0 * math.pi, n_phi, endpoint=False)
    thetas = np.linspace(0.0, math.pi, n_theta)
    return alphas, phis, thetas


def oracle_consensus(
    data: Sequence[Correspondence],
    eps: float,
    resolution: float = 0.005,
    naive: bool = False,
) -> tuple[int, AxisAngle]:
    """Best consensus over the full (alpha, phi, theta) grid, by enumeration.

    Ties resolve to the first grid point in (alpha, phi, theta) scan order.
    `naive=True` forces the literal triple loop (slow; used to validate the
    run-based kernel).
    """
    if not data:
        raise ValueError("no correspondences")
    if resolution <= 0.0:
        raise ValueError("resolution must be positive")
    v, n, a, cvn = _raw_arrays(data)
    alphas, phis, thetas = _consensus_grids(resolution)
    kernel = _consensus_kernel_naive if naive else _consensus_kernel
    best, bia, bip, bit = kernel(v, n, a, cvn, alphas, phis, thetas, eps)
    axis = polar_to_unit(PolarCoord(float(alphas[bia]), float(phis[bip])))
    return int(best), AxisAngle(axis, float(thetas[bit]))


# ---------------------------------------------------------------------------
# theta sampling for one axis


def oracle_theta(
    s: Correspondence, u: UnitVec3, eps: float, samples: int = 10_000
) -> IntervalSet:
    """Approximate feasible-theta set from dense sampling of the residual.

    The residual is evaluated through the rotated-vector form of the
    rotation (v cos t + (u x v) sin t + u (u . v)(1 - cos t)), a separate
    derivation path from the h decomposition.
    """
    if samples < 2:
        raise ValueError("need at least two samples")
    thetas = np.linspace(0.0, math.pi, samples)
    ua = u.as_array()
    va = s.v.as_array()
    na = s.n.as_array()
    cu = np.cross(ua, va)
    udv = float(ua @ va)
    ct = np.cos(thetas)[:, None]
    st = np.sin(thetas)[:, None]
    qv = ct * va[None, :] + st * cu[None, :] + (1.0 - ct) * udv * ua[None, :]
    res = qv @ na
    mask = np.abs(res) <= eps
    idx = np.nonzero(mask)[0]
    if idx.size == 0:
        return IntervalSet()
    breaks = np.nonzero(np.diff(idx) > 1)[0]
    pieces = np.split(idx, breaks + 1)
    return IntervalSet.from_pairs(
        [(float(thetas[p[0]]), float(thetas[p[-1]])) for p in pieces]
    )
