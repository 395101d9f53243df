"""Serialized document shapes for files and the HTTP service.

One document language everywhere: the CLI reads and writes these models as
JSON files and the service exchanges them over HTTP, so a file produced by
`simulate` can be posted to /solve verbatim.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

Vec3 = tuple[float, float, float]
Mat3 = tuple[Vec3, Vec3, Vec3]


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class CorrespondenceRecord(StrictModel):
    """One line correspondence: 3-D direction v plus either the unit plane
    normal n or raw pixel-line coefficients abc (requires document-level
    intrinsics)."""

    v: Vec3
    n: Optional[Vec3] = None
    abc: Optional[Vec3] = None

    @model_validator(mode="after")
    def _one_normal_source(self) -> "CorrespondenceRecord":
        if (self.n is None) == (self.abc is None):
            raise ValueError("record needs exactly one of 'n' or 'abc'")
        return self


class CorrespondenceDocument(StrictModel):
    """Array of correspondence records; intrinsics K (row-major rows) is
    required exactly when any record carries pixel-line coefficients."""

    records: list[CorrespondenceRecord] = Field(min_length=1)
    K: Optional[Mat3] = None

    @model_validator(mode="after")
    def _k_iff_abc(self) -> "CorrespondenceDocument":
        needs_k = any(r.abc is not None for r in self.records)
        if needs_k and self.K is None:
            raise ValueError("records with 'abc' require document intrinsics 'K'")
        return self


class RotationOut(StrictModel):
    axis: Vec3
    theta: float
    matrix: Mat3


class SolveStatsOut(StrictModel):
    nodes: int
    lb_evals: int
    time_ms: float
    max_nodes_reached: bool
    termination: str


class SolveResultDoc(StrictModel):
    rotation: RotationOut
    consensus: int
    upper_bound: int
    gap: int
    inliers: list[int]
    stats: SolveStatsOut


class GroundTruthDoc(StrictModel):
    rotation: RotationOut
    translation: Vec3
    inlier_mask: list[bool]
    line_points: list[Vec3]


class RotationIn(StrictModel):
    axis: Vec3
    theta: float


class SimulateRequest(StrictModel):
    lines: int = Field(ge=1)
    outlier_ratio: float = Field(default=0.0, ge=0.0, le=1.0)
    noise_sigma: float = Field(default=0.0, ge=0.0, description="radians")
    seed: int = 0
    outlier_mode: Literal["uniform", "mismatch"] = "uniform"
    rotation: Optional[RotationIn] = None
    translation: Optional[Vec3] = None


class SimulateResponse(StrictModel):
    correspondences: CorrespondenceDocument
    ground_truth: GroundTruthDoc


class SolveOptions(StrictModel):
    epsilon: float = Field(gt=0.0)
    min_edge: float = Field(default=1e-3, gt=0.0)
    max_nodes: int = Field(default=1_000_000, ge=1)
    branch_order: Literal["split-longest", "quadrisect"] = "split-longest"
    workers: int = Field(default=1, ge=1)
    refine: bool = True
    timing: bool = False


class SolveRequest(StrictModel):
    correspondences: CorrespondenceDocument
    options: SolveOptions
    node_log: bool = False


class SolveResponse(StrictModel):
    result: SolveResultDoc
    node_log: Optional[str] = Field(
        default=None, description="CSV text when requested"
    )


class VerifyBoundsRequest(StrictModel):
    trials: int = Field(ge=1)
    grid: int = Field(default=2000, ge=2)
    seed: int = 0


class WorstCase(StrictModel):
    """Most offending trial for triage: the cube, the correspondence, and
    the bound vs oracle values that produced the extreme."""

    trial: int
    family: Literal["h1", "h2"]
    side: Literal["lo", "hi"]
    alpha_lo: float
    alpha_hi: float
    phi_lo: float
    phi_hi: float
    v: Vec3
    n: Vec3
    bound: float
    oracle: float
    amount: float


class VerifyBoundsReport(StrictModel):
    trials: int
    grid: int
    seed: int
    max_soundness_violation: float
    max_tightness_slack: float
    ok: bool
    worst_violation: Optional[WorstCase] = None
    worst_slack: Optional[WorstCase] = None
