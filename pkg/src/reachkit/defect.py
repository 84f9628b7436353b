"""Convexity defect profiles of finite point clouds.

The defect of a cloud X at scale t is the farthest any point of a convex hull
of a subset of X with enclosing radius <= t can be from X. The engine here
maximizes exactly over two-point subsets (segments, via lower envelopes) and
optionally folds in sampled three-point subsets; a brute-force oracle over all
small subsets serves as the reference for tiny instances.

Pair truncation is a certified lower bound of the full-subset defect; the
simplex order used is recorded on every profile and the gap is quantified
against the oracle in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from itertools import combinations

import numpy as np

from . import _engine
from .errors import ConfigError, InputError
from .geometry import PointCloud, circumradius_3, min_enclosing_ball, segment_farthest

DEFAULT_GRID_SIZE = 200
DEFAULT_TRIPLE_GRID = 15
REFERENCE_ENGINE_MAX_POINTS = 2000
BRUTEFORCE_MAX_POINTS = 25


@dataclass(frozen=True)
class DefectConfig:
    """Controls for a defect computation.

    order 2 sweeps pairs only; order 3 adds every triple whose enclosing ball
    fits the scale budget, with its triangle sampled on a barycentric grid of
    resolution `triple_grid`. Order 3 enumerates all n-choose-3 triples, so it
    is intended for small clouds. `max_scale` defaults to half the cloud
    diameter; `grid` overrides the uniform scale grid entirely (its last entry
    then acts as max_scale).
    """

    order: int = 2
    triple_grid: int = DEFAULT_TRIPLE_GRID
    max_scale: float | None = None
    grid_size: int = DEFAULT_GRID_SIZE
    grid: np.ndarray | None = None
    engine: str = "auto"  # auto | fast | reference

    def __post_init__(self):
        if self.order not in (2, 3):
            raise InputError(f"simplex order must be 2 or 3, got {self.order}")
        if self.triple_grid < 1:
            raise InputError("triple_grid must be a positive integer")
        if self.max_scale is not None and self.max_scale <= 0:
            raise InputError("max_scale must be positive")
        if self.grid_size < 1:
            raise InputError("grid_size must be a positive integer")
        if self.engine not in ("auto", "fast", "reference"):
            raise InputError(f"unknown engine {self.engine!r}")
        if self.grid is not None:
            g = np.asarray(self.grid, dtype=np.float64)
            if g.ndim != 1 or g.size == 0:
                raise InputError("explicit grid must be a nonempty 1-d array")
            if np.any(~np.isfinite(g)) or g[0] < 0 or np.any(np.diff(g) <= 0):
                raise InputError("explicit grid must be finite, nonnegative, strictly increasing")
            g.setflags(write=False)
            object.__setattr__(self, "grid", g)


@dataclass(frozen=True)
class DefectProfile:
    """Defect values over a strictly increasing scale grid."""

    scales: np.ndarray
    values: np.ndarray
    order: int = 2

    def __post_init__(self):
        t = np.ascontiguousarray(np.asarray(self.scales, dtype=np.float64))
        h = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        if t.ndim != 1 or t.shape != h.shape or t.size == 0:
            raise InputError("profile needs matching 1-d scales and values")
        if t[0] < 0 or np.any(np.diff(t) <= 0):
            raise InputError("profile scales must be nonnegative and strictly increasing")
        if np.any(h < 0) or np.any(np.diff(h) < 0):
            raise InputError("profile values must be nonnegative and non-decreasing")
        if np.any(h > t * (1.0 + 1e-12) + 1e-12):
            raise InputError("profile violates h(t) <= t")
        if t[0] == 0.0 and h[0] != 0.0:
            raise InputError("profile must have h(0) = 0")
        t.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "scales", t)
        object.__setattr__(self, "values", h)

    @property
    def max_scale(self) -> float:
        return float(self.scales[-1])

    def read_at(self, t: float):
        """Value at the closest grid scale >= t, returned as (scale, value)."""
        idx = int(np.searchsorted(self.scales, t))
        if idx >= self.scales.size:
            raise ConfigError(
                f"scale grid ends at {self.max_scale:.6g} < requested {t:.6g}; "
                "recompute the profile with a larger max_scale"
            )
        return float(self.scales[idx]), float(self.values[idx])


@dataclass(frozen=True)
class PairContribution:
    """One pair's entry in the sweep: its enclosing radius and exact farthest
    hull-point distance. farthest <= half_length whenever both endpoints are
    cloud members."""

    half_length: float
    farthest: float


def cloud_diameter(cloud: PointCloud) -> float:
    """Largest pairwise distance, computed in blocks."""
    pts = cloud.points
    n = pts.shape[0]
    best = 0.0
    step = max(1, int(2**22 // max(n, 1)))
    sq = (pts * pts).sum(axis=1)
    for lo in range(0, n, step):
        hi = min(n, lo + step)
        d2 = sq[lo:hi, None] + sq[None, :] - 2.0 * (pts[lo:hi] @ pts.T)
        m = float(d2.max())
        if m > best:
            best = m
    return math.sqrt(max(best, 0.0))


def _resolve_grid(cloud: PointCloud, config: DefectConfig):
    if config.grid is not None:
        scales = np.asarray(config.grid, dtype=np.float64)
        return scales, float(scales[-1])
    max_scale = config.max_scale
    if max_scale is None:
        max_scale = 0.5 * cloud_diameter(cloud)
        if max_scale <= 0.0:
            max_scale = 1.0
    scales = np.linspace(0.0, max_scale, config.grid_size + 1)[1:]
    return scales, float(max_scale)


def pair_contributions(cloud: PointCloud, max_scale: float) -> list[PairContribution]:
    """Reference enumeration of all pair contributions (small clouds only)."""
    pts = cloud.points
    n = pts.shape[0]
    if n > REFERENCE_ENGINE_MAX_POINTS:
        raise InputError(f"reference pair enumeration capped at {REFERENCE_ENGINE_MAX_POINTS} points")
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            half = 0.5 * float(np.linalg.norm(pts[j] - pts[i]))
            if half == 0.0 or half > max_scale:
                continue
            _, far = segment_farthest(pts[i], pts[j], cloud)
            out.append(PairContribution(half_length=half, farthest=far))
    return out


def _pair_values_reference(cloud: PointCloud, scales: np.ndarray, max_scale: float) -> np.ndarray:
    out = np.zeros(scales.size)
    for contrib in pair_contributions(cloud, max_scale):
        slot = int(np.searchsorted(scales, contrib.half_length))
        if slot < scales.size and contrib.farthest > out[slot]:
            out[slot] = contrib.farthest
    return np.maximum.accumulate(out)


def _barycentric_weights(resolution: int) -> np.ndarray:
    rows = []
    for i in range(resolution + 1):
        for j in range(resolution + 1 - i):
            rows.append((i, j, resolution - i - j))
    return np.asarray(rows, dtype=np.float64) / float(resolution)


def _triple_values(cloud: PointCloud, scales: np.ndarray, max_scale: float, resolution: int) -> np.ndarray:
    pts = cloud.points
    n = pts.shape[0]
    out = np.zeros(scales.size)
    if n < 3:
        return out
    weights = _barycentric_weights(resolution)
    use_tree = n > 64
    if use_tree:
        from scipy.spatial import cKDTree

        tree = cKDTree(pts)
    for a, b, c in combinations(range(n), 3):
        rad = circumradius_3(pts[a], pts[b], pts[c])
        if rad > max_scale:
            continue
        slot = int(np.searchsorted(scales, rad))
        if slot >= scales.size:
            continue
        samples = weights @ pts[(a, b, c), :]
        if use_tree:
            far = float(tree.query(samples)[0].max())
        else:
            diff = samples[:, None, :] - pts[None, :, :]
            far = float(np.sqrt((diff * diff).sum(axis=2)).min(axis=1).max())
        if far > out[slot]:
            out[slot] = far
    return np.maximum.accumulate(out)


def defect_profile(cloud: PointCloud, config: DefectConfig | None = None) -> DefectProfile:
    """Defect profile of the cloud over the configured scale grid."""
    if config is None:
        config = DefectConfig()
    scales, max_scale = _resolve_grid(cloud, config)
    use_fast = config.engine == "fast" or (
        config.engine == "auto" and cloud.n > 64
    )
    if cloud.n == 1:
        pair_vals = np.zeros(scales.size)
    elif use_fast:
        pair_vals = _engine.pair_profile_values(cloud.points, scales, max_scale)
    else:
        pair_vals = _pair_values_reference(cloud, scales, max_scale)
    values = pair_vals
    if config.order == 3:
        values = np.maximum(values, _triple_values(cloud, scales, max_scale, config.triple_grid))
    return DefectProfile(scales=scales, values=values, order=config.order)


def defect_at(cloud: PointCloud, t: float, config: DefectConfig | None = None) -> float:
    """Single-scale defect, consistent with defect_profile at grid scales."""
    if t < 0:
        raise InputError("scale must be nonnegative")
    if t == 0.0:
        return 0.0
    if config is None:
        config = DefectConfig()
    single = replace(config, grid=np.array([float(t)]), max_scale=None)
    return float(defect_profile(cloud, single).values[0])


def defect_bruteforce(cloud: PointCloud, t: float, max_subset: int = 3, hull_samples: int = 100) -> float:
    """Reference defect by enumerating every subset of size <= max_subset with
    enclosing radius <= t and densely sampling its hull.

    Guarded to tiny clouds; sampling resolution is hull_samples subdivisions
    per barycentric axis.
    """
    if cloud.n > BRUTEFORCE_MAX_POINTS:
        raise InputError(f"brute-force defect capped at {BRUTEFORCE_MAX_POINTS} points")
    if max_subset < 1 or hull_samples < 1:
        raise InputError("max_subset and hull_samples must be positive")
    if t < 0:
        raise InputError("scale must be nonnegative")
    pts = cloud.points
    n = pts.shape[0]
    best = 0.0
    for size in range(2, min(max_subset, n) + 1):
        if size == 2:
            svals = np.linspace(0.0, 1.0, hull_samples + 1)
            weights = np.stack([1.0 - svals, svals], axis=1)
        else:
            weights = _simplex_grid(size, hull_samples)
        for subset in combinations(range(n), size):
            ball = min_enclosing_ball(pts[list(subset)])
            if ball.radius > t * (1.0 + 1e-12):
                continue
            samples = weights @ pts[list(subset), :]
            diff = samples[:, None, :] - pts[None, :, :]
            far = float(np.sqrt((diff * diff).sum(axis=2)).min(axis=1).max())
            if far > best:
                best = far
    return best


def _simplex_grid(k: int, resolution: int) -> np.ndarray:
    """Barycentric grid on the (k-1)-simplex at the given subdivision count."""
    count = math.comb(resolution + k - 1, k - 1)
    if count > 2_000_000:
        raise InputError("hull sampling grid too large; lower hull_samples or max_subset")

    def compositions(total, parts):
        if parts == 1:
            yield (total,)
            return
        for first in range(total + 1):
            for rest in compositions(total - first, parts - 1):
                yield (first,) + rest

    rows = np.asarray(list(compositions(resolution, k)), dtype=np.float64)
    return rows / float(resolution)


def first_diagonal_touch(profile: DefectProfile, epsilon: float):
    """Smallest grid scale t with t > (22/4) epsilon and h(t) >= t - 3 epsilon.

    Returns None when no grid scale qualifies.
    """
    if epsilon <= 0:
        raise InputError("epsilon must be positive")
    t = profile.scales
    h = profile.values
    mask = (t > (22.0 / 4.0) * epsilon) & (h >= t - 3.0 * epsilon)
    hits = np.nonzero(mask)[0]
    if hits.size == 0:
        return None
    return float(t[hits[0]])


def profile_to_csv(profile: DefectProfile, path):
    """Write a `t,h` CSV with 15 significant digits per value."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,h\n")
        for t, h in zip(profile.scales, profile.values):
            fh.write(f"{t:.15g},{h:.15g}\n")


def profile_from_csv(path, order: int = 2) -> DefectProfile:
    scales, values = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if lineno == 1 and line.lower().replace(" ", "") == "t,h":
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise InputError(f"line {lineno}: expected 't,h', got {line!r}")
            try:
                scales.append(float(parts[0]))
                values.append(float(parts[1]))
            except ValueError as exc:
                raise InputError(f"line {lineno}: {exc}") from exc
    if not scales:
        raise InputError("profile file contains no rows")
    return DefectProfile(scales=np.asarray(scales), values=np.asarray(values), order=order)
