"""Synthetic line-correspondence scenes with known ground truth.

A scene is a camera pose (rotation Q0, translation t) plus 3-D lines, each
given by a point p0 and unit direction v in world coordinates. The camera
sees the line on the back-projected plane through the origin with unit
normal

    n = normalize( (Q0 (p0 - t)) x (Q0 v) ),

so n . (Q0 v) = 0 holds exactly before noise. Inlier noise tilts n by
|N(0, sigma^2)| radians about a random axis orthogonal to n; outliers
replace n with either a uniform random direction or the normal of a freshly
drawn unrelated line ("mismatch" mode).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateLineError
from .geometry import AxisAngle, Correspondence, UnitVec3, rodrigues

OUTLIER_MODES = ("uniform", "mismatch")

# ||(p0 - t) x v|| below this means the line passes through the camera
# center and its image is a point, not a line.
LINE_DEGENERACY_TOL = 1e-12

_MAX_RESAMPLES = 64


@dataclass(frozen=True)
class SceneConfig:
    """Scene recipe. Angles in radians; the box is centered on the origin."""

    num_lines: int
    outlier_ratio: float = 0.0
    noise_sigma: float = 0.0
    seed: int = 0
    rotation: Optional[AxisAngle] = None
    translation: Optional[tuple[float, float, float]] = None
    outlier_mode: str = "uniform"
    box_halfwidth: float = 5.0
    translation_halfwidth: float = 1.0

    def __post_init__(self) -> None:
        if self.num_lines < 1:
            raise ValueError("num_lines must be at least 1")
        if not (0.0 <= self.outlier_ratio <= 1.0):
            raise ValueError("outlier_ratio must be in [0, 1]")
        if self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be nonnegative")
        if self.outlier_mode not in OUTLIER_MODES:
            raise ValueError(f"outlier_mode must be one of {OUTLIER_MODES}")


@dataclass(frozen=True)
class GroundTruth:
    """Everything needed to score a solver run against the simulation."""

    rotation: AxisAngle
    translation: tuple[float, float, float]
    inlier_mask: tuple[bool, ...]
    line_points: tuple[tuple[float, float, float], ...]

    @property
    def inlier_count(self) -> int:
        return sum(self.inlier_mask)


def _random_unit(rng: np.random.Generator) -> np.ndarray:
    while True:
        x = rng.normal(size=3)
        norm = np.linalg.norm(x)
        if norm > 1e-12:
            return x / norm


def _random_unit_orthogonal(rng: np.random.Generator, ref: np.ndarray) -> np.ndarray:
    while True:
        x = rng.normal(size=3)
        x -= (x @ ref) * ref
        norm = np.linalg.norm(x)
        if norm > 1e-12:
            return x / norm


def _line_normal(
    q0: np.ndarray, t: np.ndarray, p0: np.ndarray, v: np.ndarray
) -> Optional[np.ndarray]:
    d_cam = q0 @ (p0 - t)
    v_cam = q0 @ v
    cr = np.cross(d_cam, v_cam)
    norm = np.linalg.norm(cr)
    if norm < LINE_DEGENERACY_TOL:
        return None
    return cr / norm


def perturb_normal(n: UnitVec3, sigma: float, rng: np.random.Generator) -> UnitVec3:
    """Tilt n by |N(0, sigma^2)| radians about a random axis orthogonal to n.

    sigma = 0 returns n unchanged without consuming randomness.
    """
    if sigma < 0.0:
        raise ValueError("sigma must be nonnegative")
    if sigma == 0.0:
        return n
    na = n.as_array()
    tilt = abs(float(rng.normal(0.0, sigma)))
    about = _random_unit_orthogonal(rng, na)
    return UnitVec3.from_array(rodrigues(UnitVec3.from_array(about), tilt) @ na)


def generate_scene(config: SceneConfig) -> tuple[list[Correspondence], GroundTruth]:
    """Draw a deterministic scene; same config and seed give the same scene."""
    rng = np.random.default_rng(config.seed)

    if config.rotation is not None:
        rot = config.rotation
    else:
        axis = _random_unit(rng)
        theta = float(rng.uniform(0.0, math.pi))
        rot = AxisAngle(UnitVec3.from_array(axis), theta)
    q0 = rodrigues(rot.axis, rot.theta)

    if config.translation is not None:
        t = np.asarray(config.translation, dtype=np.float64)
    else:
        h = config.translation_halfwidth
        t = rng.uniform(-h, h, size=3)

    n_total = config.num_lines
    n_inliers = int(round((1.0 - config.outlier_ratio) * n_total))

    def draw_line() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        for _ in range(_MAX_RESAMPLES):
            v = _random_unit(rng)
            p0 = rng.uniform(-config.box_halfwidth, config.box_halfwidth, size=3)
            n = _line_normal(q0, t, p0, v)
            if n is not None:
                return p0, v, n
        raise DegenerateLineError("could not sample a line missing the camera center")

    correspondences: list[Correspondence] = []
    inlier_mask: list[bool] = []
    points: list[tuple[float, float, float]] = []
    for i in range(n_total):
        p0, v, n = draw_line()
        if i < n_inliers:
            if config.noise_sigma > 0.0:
                n = perturb_normal(
                    UnitVec3.from_array(n), config.noise_sigma, rng
                ).as_array()
            inlier_mask.append(True)
        else:
            if config.outlier_mode == "uniform":
                n = _random_unit(rng)
            else:
                _, _, n = draw_line()
            inlier_mask.append(False)
        correspondences.append(
            Correspondence(UnitVec3.from_array(v), UnitVec3.from_array(n))
        )
        points.append((float(p0[0]), float(p0[1]), float(p0[2])))

    truth = GroundTruth(
        rotation=rot,
        translation=(float(t[0]), float(t[1]), float(t[2])),
        inlier_mask=tuple(inlier_mask),
        line_points=tuple(points),
    )
    return correspondences, truth
