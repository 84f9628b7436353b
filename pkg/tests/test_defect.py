import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import reachkit as rk
from reachkit.defect import cloud_diameter, pair_contributions
from reachkit.errors import ConfigError, InputError


def two_point_cloud(gap=2.0):
    return rk.PointCloud(np.array([[-gap / 2, 0.0], [gap / 2, 0.0]]))


def random_cloud(seed, n_max=40, dims=(2, 3)):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, n_max))
    dim = int(rng.choice(dims))
    return rk.PointCloud(rng.uniform(-1, 1, (n, dim)))


class TestProfileBasics:
    def test_two_point_step(self):
        grid = np.array([0.0, 0.25, 0.5, 0.999, 1.0, 1.25, 1.5])
        prof = rk.defect_profile(two_point_cloud(), rk.DefectConfig(grid=grid))
        assert np.allclose(prof.values[:4], 0.0)
        assert prof.values[4] == pytest.approx(1.0, abs=1e-12)
        assert prof.values[5] == pytest.approx(1.0, abs=1e-12)

    def test_zero_scale_is_zero(self):
        cloud = random_cloud(7)
        prof = rk.defect_profile(cloud, rk.DefectConfig(grid=np.array([0.0, 0.3, 0.9])))
        assert prof.values[0] == 0.0
        assert rk.defect_at(cloud, 0.0) == 0.0

    def test_default_grid_covers_half_diameter(self):
        cloud = two_point_cloud(4.0)
        prof = rk.defect_profile(cloud)
        assert prof.max_scale == pytest.approx(2.0)
        assert len(prof.scales) == 200

    def test_invalid_inputs(self):
        with pytest.raises(InputError):
            rk.DefectConfig(order=4)
        with pytest.raises(InputError):
            rk.DefectConfig(max_scale=-1.0)
        with pytest.raises(InputError):
            rk.DefectConfig(grid=np.array([0.2, 0.2]))
        with pytest.raises(InputError):
            rk.defect_at(random_cloud(1), -0.5)

    def test_profile_invariants_validated(self):
        with pytest.raises(InputError):
            rk.DefectProfile(scales=np.array([0.1, 0.2]), values=np.array([0.3, 0.35]))
        with pytest.raises(InputError):
            rk.DefectProfile(scales=np.array([0.1, 0.2]), values=np.array([0.05, 0.01]))

    def test_singleton_cloud(self):
        prof = rk.defect_profile(
            rk.PointCloud(np.array([[1.0, 2.0]])), rk.DefectConfig(max_scale=1.0)
        )
        assert np.all(prof.values == 0.0)


class TestAxioms:
    @given(st.integers(0, 10**6))
    @settings(max_examples=15)
    def test_axioms_random_clouds(self, seed):
        cloud = random_cloud(seed)
        rad = rk.min_enclosing_ball(cloud.points).radius
        grid = np.linspace(0.0, 1.3 * rad, 60)[1:]
        grid = np.unique(np.concatenate([[0.0], grid, [rad]]))
        prof = rk.defect_profile(cloud, rk.DefectConfig(grid=grid))
        t, h = prof.scales, prof.values
        assert h[0] == 0.0
        assert np.all(np.diff(h) >= 0)
        assert np.all(h <= t + 1e-12)
        # constant beyond the cloud's enclosing radius
        at_rad = h[np.searchsorted(t, rad)]
        assert np.all(np.abs(h[t >= rad] - at_rad) <= 1e-12)

    @given(st.integers(0, 10**6))
    @settings(max_examples=10)
    def test_engine_matches_reference(self, seed):
        cloud = random_cloud(seed, n_max=32)
        cfg = dict(max_scale=1.5, grid_size=37)
        fast = rk.defect_profile(cloud, rk.DefectConfig(engine="fast", **cfg))
        ref = rk.defect_profile(cloud, rk.DefectConfig(engine="reference", **cfg))
        assert np.abs(fast.values - ref.values).max() < 1e-12

    @given(st.integers(0, 10**6))
    @settings(max_examples=10)
    def test_scale_homogeneity(self, seed):
        lam = 3.0
        cloud = random_cloud(seed, n_max=30)
        grid = np.linspace(0.05, 1.5, 30)
        base = rk.defect_profile(cloud, rk.DefectConfig(grid=grid))
        scaled = rk.defect_profile(cloud.scaled(lam), rk.DefectConfig(grid=lam * grid))
        assert np.allclose(scaled.values, lam * base.values, rtol=1e-11, atol=1e-13)

    def test_stability_sandwich(self):
        rng = np.random.default_rng(12)
        pts = rng.uniform(0, 1, (80, 2))
        eps = 0.01
        shift = rng.normal(size=pts.shape)
        shift *= (rng.uniform(0, 0.009, 80) / np.linalg.norm(shift, axis=1))[:, None]
        grid = np.linspace(0.0, 0.9, 121)
        base = rk.defect_profile(rk.PointCloud(pts), rk.DefectConfig(grid=grid))
        jit = rk.defect_profile(rk.PointCloud(pts + shift), rk.DefectConfig(grid=grid))
        for i, t in enumerate(grid):
            if t < eps:
                continue
            lo_idx = np.searchsorted(grid, t - eps, side="right") - 1
            hi_idx = np.searchsorted(grid, t + eps)
            assert jit.values[lo_idx] - 2 * eps <= base.values[i] + 1e-12
            hi_val = jit.values[min(hi_idx, len(grid) - 1)]
            assert base.values[i] <= hi_val + 2 * eps + 1e-12

    @given(st.integers(0, 10**6))
    @settings(max_examples=10)
    def test_order3_dominates_order2(self, seed):
        rng = np.random.default_rng(seed)
        cloud = rk.PointCloud(rng.uniform(0, 1, (int(rng.integers(4, 10)), 2)))
        cfg2 = rk.DefectConfig(order=2, max_scale=0.8, grid_size=25)
        cfg3 = rk.DefectConfig(order=3, max_scale=0.8, grid_size=25)
        h2 = rk.defect_profile(cloud, cfg2).values
        h3 = rk.defect_profile(cloud, cfg3).values
        assert np.all(h3 >= h2 - 1e-12)

    def test_circle_quarter_bound_small(self):
        cloud = rk.sample(rk.Circle(1.0), 400, seed=2)
        eps = rk.estimate_epsilon(cloud)
        prof = rk.defect_profile(cloud, rk.DefectConfig(max_scale=0.9, grid_size=60))
        bound = 1 - np.sqrt(1 - prof.scales**2) + 3 * eps
        assert np.all(prof.values <= bound + 1e-12)


class TestDefectAt:
    def test_two_point_values(self):
        cloud = two_point_cloud()
        assert rk.defect_at(cloud, 0.5) == 0.0
        assert rk.defect_at(cloud, 1.5) == pytest.approx(1.0, abs=1e-12)

    def test_consistent_with_profile_grid(self):
        cloud = random_cloud(21)
        cfg = rk.DefectConfig(max_scale=1.0, grid_size=40)
        prof = rk.defect_profile(cloud, cfg)
        for idx in (3, 17, 39):
            t = float(prof.scales[idx])
            assert rk.defect_at(cloud, t, cfg) == prof.values[idx]

    def test_regular_12gon_matches_oracle(self):
        theta = np.arange(12) * 2 * math.pi / 12
        cloud = rk.PointCloud(np.column_stack([np.cos(theta), np.sin(theta)]))
        ours = rk.defect_at(cloud, 0.3, rk.DefectConfig(order=3, triple_grid=200))
        oracle = rk.defect_bruteforce(cloud, 0.3, max_subset=3, hull_samples=200)
        assert ours == pytest.approx(oracle, abs=1e-6)
        # adjacent side midpoints sit sin(pi/12) from the vertices
        assert ours == pytest.approx(math.sin(math.pi / 12), abs=1e-9)


class TestBruteforce:
    def test_singleton(self):
        assert rk.defect_bruteforce(rk.PointCloud(np.array([[0.0, 0.0]])), 1.0) == 0.0

    def test_two_point(self):
        assert rk.defect_bruteforce(two_point_cloud(), 1.0) == pytest.approx(1.0, abs=1e-9)
        assert rk.defect_bruteforce(two_point_cloud(), 0.5) == 0.0

    def test_unit_square_center(self):
        square = rk.PointCloud(np.array([[0, 0], [1, 0], [0, 1], [1, 1]], dtype=float))
        val = rk.defect_bruteforce(square, math.sqrt(2) / 2, max_subset=4, hull_samples=32)
        assert val == pytest.approx(math.sqrt(2) / 2, abs=1e-9)

    def test_too_many_points(self):
        rng = np.random.default_rng(0)
        with pytest.raises(InputError):
            rk.defect_bruteforce(rk.PointCloud(rng.uniform(0, 1, (30, 2))), 0.5)


class TestDiagonalTouch:
    def test_two_point_touch_near_one(self):
        prof = rk.defect_profile(two_point_cloud(), rk.DefectConfig(max_scale=1.0))
        touch = rk.first_diagonal_touch(prof, 0.01)
        assert touch == pytest.approx(1.0, abs=1e-9)

    def test_quadratic_profile_never_touches(self):
        # t^2/4 >= t - 0.03 only for t <= 0.03023 or t >= 3.9698, both outside
        # the search window (0.055, 1].
        t = np.linspace(0.0, 1.0, 400)
        prof = rk.DefectProfile(scales=t[1:], values=t[1:] ** 2 / 4)
        assert rk.first_diagonal_touch(prof, 0.01) is None

    def test_empty_window(self):
        t = np.linspace(0.0, 1.0, 50)
        prof = rk.DefectProfile(scales=t[1:], values=t[1:] ** 2 / 4)
        assert rk.first_diagonal_touch(prof, 0.5) is None

    def test_epsilon_validation(self):
        prof = rk.DefectProfile(scales=np.array([0.5]), values=np.array([0.1]))
        with pytest.raises(InputError):
            rk.first_diagonal_touch(prof, 0.0)


class TestSerialization:
    def test_roundtrip(self, tmp_path):
        prof = rk.defect_profile(random_cloud(3), rk.DefectConfig(max_scale=1.0, grid_size=37))
        path = tmp_path / "profile.csv"
        rk.profile_to_csv(prof, path)
        header = path.read_text().splitlines()[0]
        assert header == "t,h"
        back = rk.profile_from_csv(path)
        assert np.allclose(back.scales, prof.scales, rtol=1e-14, atol=0)
        assert np.allclose(back.values, prof.values, rtol=1e-14, atol=0)

    def test_malformed_row_reports_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,h\n0.1,0.05\nuh-oh\n")
        with pytest.raises(InputError, match="line 3"):
            rk.profile_from_csv(path)


class TestHelpers:
    def test_cloud_diameter(self):
        rng = np.random.default_rng(8)
        pts = rng.uniform(-1, 1, (150, 3))
        brute = max(
            np.linalg.norm(pts[i] - pts[j])
            for i in range(len(pts))
            for j in range(i + 1, len(pts))
        )
        assert cloud_diameter(rk.PointCloud(pts)) == pytest.approx(brute, rel=1e-12)

    def test_pair_contributions_bounded(self):
        cloud = random_cloud(5, n_max=15)
        for contrib in pair_contributions(cloud, max_scale=2.0):
            assert contrib.farthest <= contrib.half_length + 1e-12

    def test_read_at_beyond_grid(self):
        prof = rk.DefectProfile(scales=np.array([0.2, 0.4]), values=np.array([0.01, 0.02]))
        with pytest.raises(ConfigError):
            prof.read_at(0.5)
        assert prof.read_at(0.3) == (0.4, 0.02)
