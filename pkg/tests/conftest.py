"""Shared fixtures: random factories and the 1,000-trial bound study."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import pytest

from rotamax import Correspondence, SphericalCube
from rotamax.hbounds import h_bounds
from rotamax.oracles import oracle_h_extrema


def random_unit(rng: np.random.Generator) -> np.ndarray:
    while True:
        w = rng.normal(size=3)
        norm = float(np.linalg.norm(w))
        if norm > 1e-12:
            return w / norm


def random_correspondence(rng: np.random.Generator) -> Correspondence:
    return Correspondence.from_vectors(random_unit(rng), random_unit(rng))


def random_cube(
    rng: np.random.Generator, min_width: float = 1e-3
) -> SphericalCube:
    lo_exp = math.log10(min_width)
    alpha_lo = rng.uniform(0.0, math.pi)
    alpha_hi = min(
        math.pi, alpha_lo + 10 ** rng.uniform(lo_exp, math.log10(math.pi))
    )
    phi_lo = rng.uniform(0.0, 2.0 * math.pi)
    width = 10 ** rng.uniform(lo_exp, math.log10(2.0 * math.pi))
    return SphericalCube(alpha_lo, alpha_hi, phi_lo, phi_lo + width)


@dataclass(frozen=True)
class BoundTrial:
    violation: float
    slack: float
    grid_step: float


@dataclass(frozen=True)
class BoundStudy:
    trials: tuple[BoundTrial, ...]
    elapsed_s: float


@pytest.fixture(scope="session")
def bound_study() -> BoundStudy:
    """1,000 random (correspondence, cube) trials against a 2000x2000 grid
    oracle; shared by the soundness and tightness acceptance criteria."""
    import time

    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    grid = 2000
    trials: list[BoundTrial] = []
    for _ in range(1000):
        s = random_correspondence(rng)
        cube = random_cube(rng)
        hb = h_bounds(cube, s)
        o1_lo, o1_hi, o2_lo, o2_hi = oracle_h_extrema(cube, s, grid)
        sides = (
            o1_lo - hb.h1_lo,
            hb.h1_hi - o1_hi,
            o2_lo - hb.h2_lo,
            hb.h2_hi - o2_hi,
        )
        step = max(cube.alpha_width, cube.phi_width) / (grid - 1)
        trials.append(
            BoundTrial(
                violation=max(0.0, -min(sides)),
                slack=max(sides),
                grid_step=step,
            )
        )
    return BoundStudy(tuple(trials), time.perf_counter() - t0)


@pytest.fixture()
def announce(capsys):
    """Print a criterion verdict on the real terminal despite capture."""

    def emit(line: str) -> None:
        with capsys.disabled():
            print(line)

    return emit
