"""Banded sinusoid solving, exact and relaxed theta sets."""

import math

import numpy as np

from rotamax import (
    AxisAngle,
    PolarCoord,
    UnitVec3,
    feasible_theta_exact,
    feasible_theta_relaxed,
    h_bounds,
    oracle_theta,
    polar_to_unit,
    residual,
    sinusoid_solve,
)
from rotamax.thetaint import exact_sets_batch, relaxed_sets_batch, stab_arrays

from conftest import random_correspondence, random_cube

RNG = np.random.default_rng(404)


def sample_values(offset, amplitude, phase, n=2500):
    ts = np.linspace(0.0, math.pi, n)
    return ts, offset + amplitude * np.sin(ts + phase)


class TestSinusoidSolve:
    def test_constant_inside(self):
        s = sinusoid_solve(0.3, 0.0, 1.0, 0.0, 1.0)
        assert [(iv.lo, iv.hi) for iv in s] == [(0.0, math.pi)]

    def test_constant_outside(self):
        assert sinusoid_solve(2.0, 0.0, 1.0, 0.0, 1.0).is_empty

    def test_band_misses_range(self):
        assert sinusoid_solve(0.0, 1.0, 0.0, 5.0, 6.0).is_empty

    def test_negative_amplitude_normalized(self):
        a = sinusoid_solve(0.1, -0.7, 0.3, -0.2, 0.4)
        b = sinusoid_solve(0.1, 0.7, 0.3 + math.pi, -0.2, 0.4)
        assert len(a) == len(b)
        for ia, ib in zip(a, b):
            assert math.isclose(ia.lo, ib.lo, abs_tol=1e-12)
            assert math.isclose(ia.hi, ib.hi, abs_tol=1e-12)

    def test_matches_sampling(self):
        for _ in range(500):
            off = RNG.uniform(-2, 2)
            amp = RNG.uniform(0, 2)
            ph = RNG.uniform(-math.pi, math.pi)
            lo, hi = sorted(RNG.uniform(-2.5, 2.5, 2))
            got = sinusoid_solve(off, amp, ph, lo, hi)
            ts, vals = sample_values(off, amp, ph)
            member = np.array([got.contains(t) for t in ts])
            strictly_in = (vals >= lo + 1e-7) & (vals <= hi - 1e-7)
            strictly_out = (vals < lo - 1e-7) | (vals > hi + 1e-7)
            assert not (strictly_in & ~member).any()
            assert not (strictly_out & member).any()

    def test_at_most_two_pieces(self):
        for _ in range(300):
            got = sinusoid_solve(
                RNG.uniform(-1, 1),
                RNG.uniform(0, 2),
                RNG.uniform(-math.pi, math.pi),
                -RNG.uniform(0, 1),
                RNG.uniform(0, 1),
            )
            assert len(got) <= 2


class TestExactSets:
    def test_residual_feasible_at_boundaries(self):
        for _ in range(200):
            s = random_correspondence(RNG)
            u = UnitVec3.from_array(np.linalg.qr(RNG.normal(size=(3, 3)))[0][:, 0])
            eps = 10 ** RNG.uniform(-3, -0.5)
            ex = feasible_theta_exact(s, u, eps)
            for iv in ex:
                for t in (iv.lo, 0.5 * (iv.lo + iv.hi), iv.hi):
                    assert abs(residual(s, AxisAngle(u, t))) <= eps + 1e-9

    def test_covers_oracle_runs(self):
        for _ in range(200):
            s = random_correspondence(RNG)
            w = RNG.normal(size=3)
            u = UnitVec3.from_array(w / np.linalg.norm(w))
            eps = 10 ** RNG.uniform(-3, -0.5)
            ex = feasible_theta_exact(s, u, eps)
            for iv in oracle_theta(s, u, eps, samples=3000):
                mid = 0.5 * (iv.lo + iv.hi)
                if iv.hi - iv.lo > 3e-3:
                    assert ex.contains(mid)

    def test_huge_eps_full_domain(self):
        s = random_correspondence(RNG)
        w = RNG.normal(size=3)
        u = UnitVec3.from_array(w / np.linalg.norm(w))
        ex = feasible_theta_exact(s, u, 10.0)
        assert len(ex) == 1
        assert ex.intervals[0].lo == 0.0 and ex.intervals[0].hi == math.pi


class TestRelaxedSets:
    def test_superset_of_exact_everywhere(self):
        for _ in range(150):
            s = random_correspondence(RNG)
            cube = random_cube(RNG)
            hb = h_bounds(cube, s)
            eps = 10 ** RNG.uniform(-3, -0.7)
            rel = feasible_theta_relaxed(s, hb, eps)
            for _ in range(10):
                aa = RNG.uniform(cube.alpha_lo, cube.alpha_hi)
                pp = cube.phi_lo + RNG.uniform(0.0, cube.phi_width)
                u = polar_to_unit(PolarCoord(aa, pp))
                for iv in feasible_theta_exact(s, u, eps):
                    assert rel.contains(iv.lo + 1e-9) or iv.hi - iv.lo < 1e-9
                    assert rel.contains(iv.hi - 1e-9) or iv.hi - iv.lo < 1e-9
                    assert rel.contains(0.5 * (iv.lo + iv.hi))

    def test_point_cube_collapses_to_exact(self):
        for _ in range(50):
            s = random_correspondence(RNG)
            aa = RNG.uniform(0, math.pi)
            pp = RNG.uniform(0, 2 * math.pi)
            from rotamax import SphericalCube

            cube = SphericalCube(aa, aa, pp, pp)
            hb = h_bounds(cube, s)
            eps = 0.05
            rel = feasible_theta_relaxed(s, hb, eps)
            ex = feasible_theta_exact(s, polar_to_unit(PolarCoord(aa, pp)), eps)
            assert abs(rel.total_length - ex.total_length) < 1e-6


class TestBatchedPaths:
    def test_exact_batch_matches_scalar(self):
        for _ in range(100):
            data = [random_correspondence(RNG) for _ in range(8)]
            w = RNG.normal(size=3)
            u = UnitVec3.from_array(w / np.linalg.norm(w))
            eps = 10 ** RNG.uniform(-3, -0.7)
            from rotamax.hbounds import PackedCorrespondences

            p = PackedCorrespondences(data)
            h1v, h2v = p.h_values(u.as_array())
            ivs, valid = exact_sets_batch(p.a, h1v, h2v, eps)
            for k, s in enumerate(data):
                scalar = feasible_theta_exact(s, u, eps)
                batch_pairs = [
                    (ivs[k, j, 0], ivs[k, j, 1])
                    for j in range(ivs.shape[1])
                    if valid[k, j]
                ]
                assert len(batch_pairs) == len(scalar.intervals)
                for (blo, bhi), iv in zip(batch_pairs, scalar.intervals):
                    assert math.isclose(blo, iv.lo, abs_tol=1e-12)
                    assert math.isclose(bhi, iv.hi, abs_tol=1e-12)

    def test_relaxed_batch_matches_scalar(self):
        for _ in range(60):
            data = [random_correspondence(RNG) for _ in range(6)]
            cube = random_cube(RNG)
            eps = 10 ** RNG.uniform(-3, -0.7)
            from rotamax.hbounds import PackedCorrespondences, h2_bounds_packed, h1_bounds_packed

            p = PackedCorrespondences(data)
            h1_lo, h1_hi = h1_bounds_packed(p, cube)
            h2_lo, h2_hi = h2_bounds_packed(p, cube)
            ivs, valid = relaxed_sets_batch(p.a, h1_lo, h1_hi, h2_lo, h2_hi, eps)
            for k, s in enumerate(data):
                scalar = feasible_theta_relaxed(s, h_bounds(cube, s), eps)
                batch_pairs = [
                    (ivs[k, j, 0], ivs[k, j, 1])
                    for j in range(ivs.shape[1])
                    if valid[k, j]
                ]
                assert len(batch_pairs) == len(scalar.intervals)
                for (blo, bhi), iv in zip(batch_pairs, scalar.intervals):
                    assert math.isclose(blo, iv.lo, abs_tol=1e-9)
                    assert math.isclose(bhi, iv.hi, abs_tol=1e-9)

    def test_stab_arrays_matches_stab_max(self):
        from rotamax import Interval, stab_max

        for _ in range(300):
            n = int(RNG.integers(1, 40))
            los = RNG.uniform(0, 3, n)
            his = los + RNG.uniform(0, 1, n)
            count, witness = stab_arrays(los, his)
            ref = stab_max([Interval(float(a), float(b)) for a, b in zip(los, his)])
            assert count == ref.count
            hit = int(np.sum((los <= witness) & (witness <= his)))
            assert hit == count
