"""Conversions between documents and core types, plus the three operations
(simulate, solve, verify-bounds) shared by the CLI and the HTTP service."""

from __future__ import annotations

import io
import logging
import math
import os

import numpy as np

from .errors import RotamaxError
from .geometry import (
    AxisAngle,
    Correspondence,
    SphericalCube,
    UnitVec3,
    pixel_line_to_normal,
)
from .hbounds import h_bounds
from .oracles import oracle_h_extrema
from .schemas import (
    CorrespondenceDocument,
    CorrespondenceRecord,
    GroundTruthDoc,
    RotationOut,
    SimulateRequest,
    SimulateResponse,
    SolveRequest,
    SolveResponse,
    SolveResultDoc,
    SolveStatsOut,
    VerifyBoundsRequest,
    VerifyBoundsReport,
    WorstCase,
)
from .simulate import GroundTruth, SceneConfig, generate_scene
from .solver import SolveResult, SolverConfig, solve

NODE_LOG_HEADER = "node,depth,alpha_lo,alpha_hi,phi_lo,phi_hi,lower,upper,t_ms"

# Soundness failures beyond this are reported as violations.
SOUNDNESS_TOL = 1e-9

logger = logging.getLogger("rotamax")


def configure_logging(env: str | None = None) -> None:
    """Wire the package logger to stderr per PNL_LOG (off|info|debug)."""
    level_name = (env if env is not None else os.environ.get("PNL_LOG", "off")).lower()
    if level_name not in ("off", "info", "debug"):
        raise ValueError("PNL_LOG must be one of off, info, debug")
    if level_name == "off":
        logger.addHandler(logging.NullHandler())
        logger.setLevel(logging.CRITICAL + 1)
        return
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    logger.handlers[:] = [handler]
    logger.setLevel(logging.INFO if level_name == "info" else logging.DEBUG)


def document_to_correspondences(doc: CorrespondenceDocument) -> list[Correspondence]:
    out: list[Correspondence] = []
    k = np.asarray(doc.K, dtype=np.float64) if doc.K is not None else None
    for i, rec in enumerate(doc.records):
        try:
            if rec.n is not None:
                out.append(Correspondence.from_vectors(rec.v, rec.n))
            else:
                normal = pixel_line_to_normal(rec.abc, k)
                out.append(Correspondence(UnitVec3(*rec.v), normal))
        except (RotamaxError, ValueError) as exc:
            raise type(exc)(f"records[{i}]: {exc}") from exc
    return out


def correspondences_to_document(
    data: list[Correspondence],
) -> CorrespondenceDocument:
    return CorrespondenceDocument(
        records=[
            CorrespondenceRecord(
                v=tuple(s.v.as_array().tolist()), n=tuple(s.n.as_array().tolist())
            )
            for s in data
        ]
    )


def rotation_out(rot: AxisAngle) -> RotationOut:
    axis = rot.axis.as_array()
    mat = rot.matrix()
    return RotationOut(
        axis=tuple(axis.tolist()),
        theta=rot.theta,
        matrix=tuple(tuple(row) for row in mat.tolist()),
    )


def ground_truth_doc(gt: GroundTruth) -> GroundTruthDoc:
    return GroundTruthDoc(
        rotation=rotation_out(gt.rotation),
        translation=gt.translation,
        inlier_mask=list(gt.inlier_mask),
        line_points=list(gt.line_points),
    )


def result_doc(res: SolveResult) -> SolveResultDoc:
    return SolveResultDoc(
        rotation=rotation_out(res.rotation),
        consensus=res.consensus,
        upper_bound=res.upper_bound,
        gap=res.gap,
        inliers=list(res.inliers),
        stats=SolveStatsOut(
            nodes=res.stats.nodes,
            lb_evals=res.stats.lb_evals,
            time_ms=res.stats.time_ms,
            max_nodes_reached=res.stats.max_nodes_reached,
            termination=res.stats.termination,
        ),
    )


def run_simulate(req: SimulateRequest) -> SimulateResponse:
    rotation = None
    if req.rotation is not None:
        rotation = AxisAngle(UnitVec3(*req.rotation.axis), req.rotation.theta)
    cfg = SceneConfig(
        num_lines=req.lines,
        outlier_ratio=req.outlier_ratio,
        noise_sigma=req.noise_sigma,
        seed=req.seed,
        rotation=rotation,
        translation=req.translation,
        outlier_mode=req.outlier_mode,
    )
    data, gt = generate_scene(cfg)
    logger.info(
        "simulated %d lines (%d inliers), seed %d", req.lines, gt.inlier_count, req.seed
    )
    return SimulateResponse(
        correspondences=correspondences_to_document(data),
        ground_truth=ground_truth_doc(gt),
    )


def run_solve(req: SolveRequest) -> SolveResponse:
    data = document_to_correspondences(req.correspondences)
    opt = req.options
    cfg = SolverConfig(
        epsilon=opt.epsilon,
        min_edge=opt.min_edge,
        max_nodes=opt.max_nodes,
        branch_order=opt.branch_order,
        workers=opt.workers,
        refine=opt.refine,
        timing=opt.timing,
    )
    rows: list[tuple] = []
    res = solve(data, cfg, node_log=rows.append if req.node_log else None)
    logger.info(
        "solved %d correspondences: consensus %d, gap %d, %d nodes",
        len(data),
        res.consensus,
        res.gap,
        res.stats.nodes,
    )
    csv_text = None
    if req.node_log:
        buf = io.StringIO()
        buf.write(NODE_LOG_HEADER + "\n")
        for row in rows:
            buf.write(
                "%d,%d,%.17g,%.17g,%.17g,%.17g,%d,%d,%.6f\n" % tuple(row)
            )
        csv_text = buf.getvalue()
    return SolveResponse(result=result_doc(res), node_log=csv_text)


def _random_unit(rng: np.random.Generator) -> np.ndarray:
    while True:
        w = rng.normal(size=3)
        norm = float(np.linalg.norm(w))
        if norm > 1e-12:
            return w / norm


def _random_cube(rng: np.random.Generator) -> SphericalCube:
    alpha_lo = rng.uniform(0.0, math.pi)
    alpha_hi = min(math.pi, alpha_lo + 10 ** rng.uniform(-3.0, math.log10(math.pi)))
    phi_lo = rng.uniform(0.0, 2.0 * math.pi)
    width = 10 ** rng.uniform(-3.0, math.log10(2.0 * math.pi))
    return SphericalCube(alpha_lo, alpha_hi, phi_lo, phi_lo + width)


def run_verify_bounds(req: VerifyBoundsRequest) -> VerifyBoundsReport:
    """Random (correspondence, cube) trials: closed-form h bounds vs the
    grid oracle. Soundness violation = amount the oracle extreme escapes the
    bound; tightness slack = amount the bound overshoots the oracle."""
    rng = np.random.default_rng(req.seed)
    max_viol = 0.0
    max_slack = 0.0
    worst_viol: WorstCase | None = None
    worst_slack: WorstCase | None = None
    for trial in range(req.trials):
        s = Correspondence.from_vectors(_random_unit(rng), _random_unit(rng))
        cube = _random_cube(rng)
        hb = h_bounds(cube, s)
        o1_lo, o1_hi, o2_lo, o2_hi = oracle_h_extrema(cube, s, req.grid)
        cases = (
            ("h1", "lo", hb.h1_lo, o1_lo, o1_lo - hb.h1_lo),
            ("h1", "hi", hb.h1_hi, o1_hi, hb.h1_hi - o1_hi),
            ("h2", "lo", hb.h2_lo, o2_lo, o2_lo - hb.h2_lo),
            ("h2", "hi", hb.h2_hi, o2_hi, hb.h2_hi - o2_hi),
        )
        for family, side, bound, oracle, slack in cases:
            viol = -slack
            if viol > max_viol:
                max_viol = viol
                worst_viol = _worst(trial, family, side, cube, s, bound, oracle, viol)
            if slack > max_slack:
                max_slack = slack
                worst_slack = _worst(trial, family, side, cube, s, bound, oracle, slack)
        if trial % 100 == 99:
            logger.debug("verify-bounds trial %d done", trial + 1)
    return VerifyBoundsReport(
        trials=req.trials,
        grid=req.grid,
        seed=req.seed,
        max_soundness_violation=max_viol,
        max_tightness_slack=max_slack,
        ok=max_viol <= SOUNDNESS_TOL,
        worst_violation=worst_viol,
        worst_slack=worst_slack,
    )


def _worst(trial, family, side, cube, s, bound, oracle, amount) -> WorstCase:
    return WorstCase(
        trial=trial,
        family=family,
        side=side,
        alpha_lo=cube.alpha_lo,
        alpha_hi=cube.alpha_hi,
        phi_lo=cube.phi_lo,
        phi_hi=cube.phi_hi,
        v=tuple(s.v.as_array().tolist()),
        n=tuple(s.n.as_array().tolist()),
        bound=bound,
        oracle=oracle,
        amount=amount,
    )
