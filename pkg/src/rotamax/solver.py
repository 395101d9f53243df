"""Globally optimal consensus maximization by best-first branch and bound.

The search space is the axis sphere in polar coordinates; theta never gets
branched. For each axis rectangle ("cube"):

  lower bound   exact 1-D consensus at the cube center: per-correspondence
                feasible theta intervals plus interval stabbing;
  upper bound   the same stabbing over relaxed intervals built from exact
                h1/h2 ranges of the cube, which contain every exact set of
                every axis inside, so the count can only overshoot.

Cubes whose upper bound cannot beat the incumbent are pruned; the best-first
order (largest upper bound, then larger cube, then insertion order) makes
the incumbent-versus-top gap a global optimality certificate the moment it
closes. Correspondences whose relaxed set is empty on a cube stay empty on
every sub-cube, so children skip them.
"""

from __future__ import annotations

import heapq
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .geometry import (
    AxisAngle,
    Correspondence,
    PolarCoord,
    SphericalCube,
    polar_to_unit,
)
from .hbounds import (
    DEFAULT_PHI_TOL,
    PackedCorrespondences,
    h1_bounds_packed,
    h2_bounds_packed,
)
from .thetaint import exact_sets_batch, relaxed_sets_batch, stab_arrays

_log = logging.getLogger("rotamax.solver")

# Solver-internal bisection target for edge stationary points. Coarser than
# the public 1e-12 because the value error is quadratically flat there and
# the relaxed sets already carry a 1e-12 outward pad that absorbs it.
_SOLVER_PHI_TOL = 1e-7

_BRANCH_ORDERS = ("split-longest", "quadrisect")

NodeLogFn = Callable[[tuple], None]


@dataclass(frozen=True)
class SolverConfig:
    """Knobs for solve(). epsilon is the inlier residual threshold."""

    epsilon: float
    min_edge: float = 1e-3
    max_nodes: int = 1_000_000
    branch_order: str = "split-longest"
    workers: int = 1
    refine: bool = True
    refine_floor: float = 1e-8
    timing: bool = False

    def __post_init__(self) -> None:
        if not (self.epsilon > 0.0):
            raise ValueError("epsilon must be positive")
        if not (self.min_edge > 0.0):
            raise ValueError("min_edge must be positive")
        if self.max_nodes < 1:
            raise ValueError("max_nodes must be at least 1")
        if self.branch_order not in _BRANCH_ORDERS:
            raise ValueError(f"branch_order must be one of {_BRANCH_ORDERS}")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if not (0.0 < self.refine_floor <= self.min_edge):
            raise ValueError("refine_floor must be in (0, min_edge]")


@dataclass
class SolveStats:
    nodes: int = 0
    lb_evals: int = 0
    time_ms: float = 0.0
    max_nodes_reached: bool = False
    termination: str = ""


@dataclass(frozen=True)
class SolveResult:
    rotation: AxisAngle
    consensus: int
    upper_bound: int
    gap: int
    inliers: tuple[int, ...]
    stats: SolveStats


def branch(cube: SphericalCube, order: str = "split-longest") -> tuple[SphericalCube, ...]:
    """Deterministic subdivision; children inherit raw phi endpoints."""
    if order not in _BRANCH_ORDERS:
        raise ValueError(f"branch order must be one of {_BRANCH_ORDERS}")
    a_mid = 0.5 * (cube.alpha_lo + cube.alpha_hi)
    p_hi = cube.phi_lo + cube.phi_width
    p_mid = cube.phi_lo + 0.5 * cube.phi_width
    if order == "quadrisect":
        a_parts = (
            [(cube.alpha_lo, a_mid), (a_mid, cube.alpha_hi)]
            if cube.alpha_width > 0.0
            else [(cube.alpha_lo, cube.alpha_hi)]
        )
        p_parts = (
            [(cube.phi_lo, p_mid), (p_mid, p_hi)]
            if cube.phi_width > 0.0
            else [(cube.phi_lo, p_hi)]
        )
        return tuple(
            SphericalCube(a0, a1, q0, q1) for a0, a1 in a_parts for q0, q1 in p_parts
        )
    # split-longest; ties go to alpha so traversal is reproducible
    if cube.alpha_width >= cube.phi_width:
        return (
            SphericalCube(cube.alpha_lo, a_mid, cube.phi_lo, cube.phi_hi),
            SphericalCube(a_mid, cube.alpha_hi, cube.phi_lo, cube.phi_hi),
        )
    return (
        SphericalCube(cube.alpha_lo, cube.alpha_hi, cube.phi_lo, p_mid),
        SphericalCube(cube.alpha_lo, cube.alpha_hi, p_mid, p_hi),
    )


def _as_packed(data: Union[PackedCorrespondences, Sequence[Correspondence]]) -> PackedCorrespondences:
    if isinstance(data, PackedCorrespondences):
        return data
    return PackedCorrespondences(list(data))


def _eval_lower(p: PackedCorrespondences, cube: SphericalCube, eps: float) -> tuple[int, float]:
    u = polar_to_unit(cube.center()).as_array()
    h1v, h2v = p.h_values(u)
    ivs, ok = exact_sets_batch(p.a, h1v, h2v, eps)
    los = ivs[:, :, 0][ok]
    if los.size == 0:
        return 0, 0.0
    return stab_arrays(los, ivs[:, :, 1][ok])


def _eval_upper(
    p: PackedCorrespondences, cube: SphericalCube, eps: float, phi_tol: float
) -> tuple[int, np.ndarray]:
    h1lo, h1hi = h1_bounds_packed(p, cube)
    h2lo, h2hi = h2_bounds_packed(p, cube, phi_tol)
    ivs, ok = relaxed_sets_batch(p.a, h1lo, h1hi, h2lo, h2hi, eps)
    nonempty = ok.any(axis=1)
    los = ivs[:, :, 0][ok]
    if los.size == 0:
        return 0, nonempty
    count, _ = stab_arrays(los, ivs[:, :, 1][ok])
    return count, nonempty


def lower_bound(
    cube: SphericalCube, data: Sequence[Correspondence], eps: float
) -> tuple[int, float]:
    """Exact consensus count at the cube-center axis and a witness theta."""
    return _eval_lower(_as_packed(data), cube, eps)


def upper_bound(cube: SphericalCube, data: Sequence[Correspondence], eps: float) -> int:
    """Count certified to dominate the exact consensus of every axis in the cube."""
    count, _ = _eval_upper(_as_packed(data), cube, eps, DEFAULT_PHI_TOL)
    return count


def solve(
    data: Sequence[Correspondence],
    config: SolverConfig,
    node_log: Optional[NodeLogFn] = None,
) -> SolveResult:
    """Globally optimal rotation consensus over the full axis sphere."""
    t0 = time.perf_counter()
    packed = _as_packed(data)
    eps = config.epsilon
    floor = config.refine_floor if config.refine else config.min_edge
    stats = SolveStats()

    def elapsed_ms() -> float:
        return (time.perf_counter() - t0) * 1000.0 if config.timing else 0.0

    root = SphericalCube.full_sphere()
    all_idx = np.arange(packed.size)
    ub_root, nonempty = _eval_upper(packed, root, eps, _SOLVER_PHI_TOL)
    lb_root, th_root = _eval_lower(packed, root, eps)
    stats.lb_evals += 1

    inc_count = lb_root
    inc_axis: PolarCoord = root.center()
    inc_theta = th_root

    heap: list = []
    seq = 0
    if ub_root > inc_count:
        heapq.heappush(
            heap, (-ub_root, -root.max_edge, seq, root, all_idx[nonempty], lb_root, 0)
        )
        seq += 1

    floor_ub = 0
    stop: Optional[str] = None
    while heap:
        # re-checked every round: the top dominates the whole frontier
        if -heap[0][0] <= inc_count:
            break
        if stats.nodes >= config.max_nodes:
            stats.max_nodes_reached = True
            stop = "max-nodes"
            break
        batch = []
        while heap and len(batch) < config.workers:
            if -heap[0][0] <= inc_count:
                break
            if stats.nodes + len(batch) >= config.max_nodes:
                break
            entry = heapq.heappop(heap)
            if entry[3].max_edge <= floor:
                floor_ub = max(floor_ub, -entry[0])
                continue
            batch.append(entry)
        if not batch:
            continue
        for entry in batch:
            neg_ub, _, _, cube, active, node_lb, depth = entry
            node_ub = -neg_ub
            if node_ub <= inc_count:
                continue
            if node_log is not None:
                node_log(
                    (
                        stats.nodes,
                        depth,
                        cube.alpha_lo,
                        cube.alpha_hi,
                        cube.phi_lo,
                        cube.phi_hi,
                        node_lb,
                        node_ub,
                        elapsed_ms(),
                    )
                )
            stats.nodes += 1
            if stats.nodes % 4096 == 0:
                _log.debug(
                    "nodes=%d heap=%d incumbent=%d top_ub=%d",
                    stats.nodes,
                    len(heap),
                    inc_count,
                    node_ub,
                )
            sub = packed.take(active)
            for child in branch(cube, config.branch_order):
                ub, okmask = _eval_upper(sub, child, eps, _SOLVER_PHI_TOL)
                if ub <= inc_count:
                    continue
                lbc, th = _eval_lower(sub, child, eps)
                stats.lb_evals += 1
                if lbc > inc_count:
                    inc_count = lbc
                    inc_axis = child.center()
                    inc_theta = th
                heapq.heappush(
                    heap,
                    (-ub, -child.max_edge, seq, child, active[okmask], lbc, depth + 1),
                )
                seq += 1

    # final recount at the incumbent rotation (authoritative consensus)
    axis = polar_to_unit(inc_axis)
    u = axis.as_array()
    h1v, h2v = packed.h_values(u)
    res = packed.a + math.sin(inc_theta) * h1v + (1.0 - math.cos(inc_theta)) * h2v
    mask = np.abs(res) <= eps
    consensus = int(mask.sum())
    inliers = tuple(int(i) for i in np.nonzero(mask)[0])

    outstanding = floor_ub
    if heap:
        outstanding = max(outstanding, -heap[0][0])
    certified = max(consensus, outstanding)
    gap = certified - consensus

    if stop == "max-nodes":
        stats.termination = "max-nodes"
    elif gap > 0:
        stats.termination = "min-edge"
    else:
        stats.termination = "gap-zero"
    stats.time_ms = elapsed_ms()
    _log.info(
        "solve done: consensus=%d upper=%d gap=%d nodes=%d lb_evals=%d termination=%s",
        consensus,
        certified,
        gap,
        stats.nodes,
        stats.lb_evals,
        stats.termination,
    )
    return SolveResult(
        rotation=AxisAngle(axis, inc_theta),
        consensus=consensus,
        upper_bound=certified,
        gap=gap,
        inliers=inliers,
        stats=stats,
    )
