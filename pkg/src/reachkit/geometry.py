"""Low-level metric primitives: distances, Hausdorff distances, smallest
enclosing balls, a uniform-grid spatial index, and the exact farthest-point
query along a segment.

All operations are pure functions of immutable inputs; clouds and indexes can
be shared freely across parallel workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import InputError

EPS = 1e-12

# Dimension above which the enclosing-ball solver switches from the exact
# Welzl-style recursion to the iterative center-shift approximation.
WELZL_MAX_DIM = 10


def as_point(p) -> np.ndarray:
    """Coerce a coordinate sequence to a finite 1-d float64 array."""
    arr = np.asarray(p, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise InputError(f"a point must be a nonempty 1-d coordinate sequence, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("point has non-finite coordinates")
    return arr


@dataclass(frozen=True)
class PointCloud:
    """A finite set of D-dimensional points stored as an (n, D) float64 array."""

    points: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.points, dtype=np.float64))
        if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
            raise InputError(f"point cloud must be a nonempty (n, D) array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InputError("point cloud contains non-finite coordinates")
        arr.setflags(write=False)
        object.__setattr__(self, "points", arr)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def scaled(self, factor: float) -> "PointCloud":
        return PointCloud(self.points * float(factor))


@dataclass(frozen=True)
class Ball:
    """An enclosing ball; `approximate` marks the high-dimension fallback result."""

    center: np.ndarray
    radius: float
    approximate: bool = False


def dist(p, q) -> float:
    """Euclidean distance between two points of equal dimension."""
    a, b = as_point(p), as_point(q)
    if a.shape != b.shape:
        raise InputError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return float(np.linalg.norm(a - b))


def _check_same_dim(a: PointCloud, b: PointCloud):
    if a.dim != b.dim:
        raise InputError(f"dimension mismatch: {a.dim} vs {b.dim}")


def _min_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """For each row of `a`, the distance to the nearest row of `b`."""
    if a.shape[0] * b.shape[0] <= 1_000_000:
        diff = a[:, None, :] - b[None, :, :]
        return np.sqrt((diff * diff).sum(axis=2)).min(axis=1)
    from scipy.spatial import cKDTree

    return cKDTree(b).query(a, k=1)[0]


def hausdorff_asym(a: PointCloud, b: PointCloud) -> float:
    """One-sided Hausdorff distance: max over a of the distance to b."""
    _check_same_dim(a, b)
    return float(_min_dists(a.points, b.points).max())


def hausdorff(a: PointCloud, b: PointCloud) -> float:
    """Symmetric Hausdorff distance between two clouds."""
    return max(hausdorff_asym(a, b), hausdorff_asym(b, a))


# ---------------------------------------------------------------------------
# Smallest enclosing ball
# ---------------------------------------------------------------------------

def _circumball(support: list[np.ndarray]):
    """Smallest ball with all support points on its boundary.

    The center lies in the affine hull of the support; returns None when the
    support is affinely dependent (the caller then keeps its previous ball).
    """
    r0 = support[0]
    if len(support) == 1:
        return r0.copy(), 0.0
    q = np.array([s - r0 for s in support[1:]])
    gram = q @ q.T
    rhs = 0.5 * np.einsum("ij,ij->i", q, q)
    try:
        lam = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(lam)):
        return None
    center = r0 + lam @ q
    radius = float(np.linalg.norm(center - r0))
    return center, radius


def _in_ball(center, radius, p) -> bool:
    return float(np.linalg.norm(p - center)) <= radius * (1.0 + 1e-13) + 1e-14


def _welzl(points: np.ndarray) -> Ball:
    # Move-to-front incremental scheme; recursion depth is bounded by the
    # support size (at most D+2 frames), not by the number of points.
    def mb_with_boundary(limit: int, boundary: list[np.ndarray]):
        res = _circumball(boundary)
        center, radius = (boundary[0].copy(), 0.0) if res is None else res
        if len(boundary) == points.shape[1] + 1:
            return center, radius
        for i in range(limit):
            p = points[i]
            if not _in_ball(center, radius, p):
                res = mb_with_boundary(i, boundary + [p])
                if res is not None:
                    center, radius = res
        return center, radius

    center, radius = points[0].copy(), 0.0
    for i in range(1, points.shape[0]):
        if not _in_ball(center, radius, points[i]):
            center, radius = mb_with_boundary(i, [points[i]])
    return Ball(center=center, radius=radius, approximate=False)


def _center_shift_ball(points: np.ndarray, iterations: int = 200) -> Ball:
    # Badoiu-Clarkson style center shift; after k steps the radius is within
    # a factor (1 + 1/k) of optimal, comfortably inside the documented 1.5.
    center = points.mean(axis=0)
    for k in range(1, iterations + 1):
        d2 = ((points - center) ** 2).sum(axis=1)
        far = int(np.argmax(d2))
        center = center + (points[far] - center) / (k + 1.0)
    radius = float(np.sqrt(((points - center) ** 2).sum(axis=1).max()))
    return Ball(center=center, radius=radius, approximate=True)


def min_enclosing_ball(points, seed: int = 0) -> Ball:
    """Smallest enclosing ball of a point set.

    Exact for ambient dimension <= WELZL_MAX_DIM; above that a center-shift
    approximation is returned with `approximate=True`. Deterministic given the
    input order and `seed` (the seed drives the internal shuffle).
    """
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.size == 0 or arr.shape[0] == 0:
        raise InputError("min_enclosing_ball requires at least one point")
    if not np.all(np.isfinite(arr)):
        raise InputError("min_enclosing_ball: non-finite coordinates")
    if arr.shape[0] == 1:
        return Ball(center=arr[0].copy(), radius=0.0, approximate=False)
    if arr.shape[1] > WELZL_MAX_DIM:
        return _center_shift_ball(arr)
    order = np.random.default_rng(seed).permutation(arr.shape[0])
    return _welzl(np.ascontiguousarray(arr[order]))


def circumradius_3(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    """Radius of the smallest ball enclosing three points (exact, any dimension)."""
    d2ab = float(((a - b) ** 2).sum())
    d2bc = float(((b - c) ** 2).sum())
    d2ca = float(((c - a) ** 2).sum())
    lo, mid, hi = sorted((d2ab, d2bc, d2ca))
    if lo + mid <= hi * (1.0 + 1e-14):
        # Right or obtuse: the ball on the longest side as a diameter.
        return 0.5 * math.sqrt(hi)
    ab, bc, ca = math.sqrt(d2ab), math.sqrt(d2bc), math.sqrt(d2ca)
    cross2 = d2ab * d2ca - (float((b - a) @ (c - a))) ** 2
    area = 0.5 * math.sqrt(max(cross2, 0.0))
    if area <= 0.0:
        return 0.5 * math.sqrt(hi)
    return ab * bc * ca / (4.0 * area)


# ---------------------------------------------------------------------------
# Uniform-grid spatial index
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpatialIndex:
    """Uniform grid over a cloud: maps integer lattice cells to point indices."""

    cell_size: float
    buckets: dict = field(repr=False)
    origin: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, cloud: PointCloud, cell_size: float) -> "SpatialIndex":
        if cell_size <= 0:
            raise InputError("cell_size must be positive")
        origin = cloud.points.min(axis=0)
        cells = np.floor((cloud.points - origin) / cell_size).astype(np.int64)
        buckets: dict = {}
        for i, cell in enumerate(map(tuple, cells)):
            buckets.setdefault(cell, []).append(i)
        return cls(cell_size=cell_size, buckets=buckets, origin=origin)


def _cell_of(index: SpatialIndex, query: np.ndarray) -> tuple:
    return tuple(np.floor((query - index.origin) / index.cell_size).astype(np.int64))


def nearest_dist(index: SpatialIndex, cloud: PointCloud, query) -> float:
    """Distance from `query` to the cloud, via expanding-ring cell search."""
    q = as_point(query)
    if q.shape[0] != cloud.dim:
        raise InputError(f"dimension mismatch: {q.shape[0]} vs {cloud.dim}")
    pts = cloud.points
    home = _cell_of(index, q)
    dim = cloud.dim
    occupied = np.array(list(index.buckets.keys()), dtype=np.int64)
    max_ring = int(np.abs(occupied - np.array(home)).max()) + 1
    best = math.inf
    for ring in range(max_ring + 1):
        # Cells at Chebyshev distance `ring` are at Euclidean distance at
        # least (ring - 1) * cell_size from the query, so once the incumbent
        # beats that bound no farther ring can help.
        if best <= (ring - 1) * index.cell_size:
            break
        for offset in product(range(-ring, ring + 1), repeat=dim):
            if max(abs(o) for o in offset) != ring:
                continue
            ids = index.buckets.get(tuple(h + o for h, o in zip(home, offset)))
            if not ids:
                continue
            d = np.sqrt(((pts[ids] - q) ** 2).sum(axis=1)).min()
            if d < best:
                best = float(d)
    return best


def points_within(index: SpatialIndex, cloud: PointCloud, center, radius: float) -> np.ndarray:
    """Indices of cloud points inside the closed ball around `center`."""
    c = as_point(center)
    lo = np.floor((c - radius - index.origin) / index.cell_size).astype(np.int64)
    hi = np.floor((c + radius - index.origin) / index.cell_size).astype(np.int64)
    ids: list[int] = []
    for cell in product(*(range(int(l), int(h) + 1) for l, h in zip(lo, hi))):
        ids.extend(index.buckets.get(cell, ()))
    if not ids:
        return np.empty(0, dtype=np.int64)
    arr = np.array(ids, dtype=np.int64)
    d2 = ((cloud.points[arr] - c) ** 2).sum(axis=1)
    return arr[d2 <= radius * radius * (1.0 + 1e-12)]


# ---------------------------------------------------------------------------
# Exact farthest point of a segment from a cloud
# ---------------------------------------------------------------------------

def _envelope_max(u: np.ndarray, c: np.ndarray, lsq: float):
    """Max over s in [0, 1] of min_i lsq*(s - u[i])^2 + c[i].

    All parabolas share the leading coefficient `lsq`, so the lower envelope
    is a 1-d abstract Voronoi sweep over sites sorted by apex position; the
    max is attained at an envelope breakpoint or at s in {0, 1}.
    Returns (s_star, value) with value in squared units.
    """
    order = np.argsort(u, kind="stable")
    u = u[order]
    c = c[order]
    m = u.size
    site = np.empty(m, dtype=np.int64)
    z = np.empty(m + 1, dtype=np.float64)
    site[0] = 0
    z[0] = -np.inf
    k = 0
    for i in range(1, m):
        while True:
            j = site[k]
            du = u[i] - u[j]
            if du <= 0.0:
                if c[i] >= c[j]:
                    break
                k -= 1
                if k < 0:
                    k = 0
                    site[0] = i
                    z[0] = -np.inf
                    break
                continue
            s = 0.5 * (u[i] + u[j]) + (c[i] - c[j]) / (2.0 * lsq * du)
            if k > 0 and s <= z[k]:
                k -= 1
                continue
            k += 1
            site[k] = i
            z[k] = s
            break
    z_arr = z[: k + 1]
    # Envelope value at a parameter s, using the piece active there.
    def value_at(s):
        piece = int(np.searchsorted(z_arr, s, side="right")) - 1
        j = site[piece]
        return lsq * (s - u[j]) ** 2 + c[j]

    best_s, best_v = 0.0, value_at(0.0)
    v1 = value_at(1.0)
    if v1 > best_v:
        best_s, best_v = 1.0, v1
    for piece in range(1, k + 1):
        s = z_arr[piece]
        if 0.0 < s < 1.0:
            j = site[piece]
            v = lsq * (s - u[j]) ** 2 + c[j]
            if v > best_v:
                best_s, best_v = s, v
    return best_s, best_v


def segment_farthest(a, b, cloud: PointCloud):
    """Farthest point of the segment [a, b] from the cloud, computed exactly.

    Returns (s_star, d_star) where d_star = max over s in [0,1] of the
    distance from a + s*(b-a) to the cloud and s_star attains it.
    """
    pa, pb = as_point(a), as_point(b)
    if pa.shape[0] != pb.shape[0] or pa.shape[0] != cloud.dim:
        raise InputError("segment endpoints and cloud must share one dimension")
    ab = pb - pa
    lsq = float(ab @ ab)
    rel = cloud.points - pa
    if lsq == 0.0:
        return 0.0, float(np.sqrt((rel * rel).sum(axis=1).min()))
    u = (rel @ ab) / lsq
    c = np.maximum((rel * rel).sum(axis=1) - u * u * lsq, 0.0)
    s_star, v = _envelope_max(u, c, lsq)
    return float(s_star), float(math.sqrt(max(v, 0.0)))
