"""Synthetic manifold samplers with known local reach, weak feature size and
reach, used for empirical validation.

Variants: round circle/sphere, torus, a sphere with a compactly supported
polynomial-decay bump (curvature spiked at the apex), two parallel segments
forming a pure bottleneck, and a planar dumbbell built from circular arcs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from .errors import InputError
from .geometry import PointCloud

# ---------------------------------------------------------------------------
# Bump profile
# ---------------------------------------------------------------------------

def _psi(s):
    """Smooth even bump: exp(1 - 1/(1-s^2)) on (-1, 1), exactly 0 outside."""
    arr = np.atleast_1d(np.asarray(s, dtype=np.float64))
    out = np.zeros_like(arr)
    inside = np.abs(arr) < 1.0
    x = arr[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - x * x))
    if np.isscalar(s) or np.ndim(s) == 0:
        return float(out[0])
    return out


@lru_cache(maxsize=1)
def psi_second_derivative() -> float:
    """psi''(0) by a fourth-order central stencil (analytically -2)."""
    h = 0.01
    vals = [_psi(x) for x in (-2 * h, -h, 0.0, h, 2 * h)]
    return (-vals[0] + 16 * vals[1] - 30 * vals[2] + 16 * vals[3] - vals[4]) / (12 * h * h)


@lru_cache(maxsize=1)
def psi_max_slope() -> float:
    """sup |psi'|, needed for the diffeomorphism condition and rejection bound."""
    s = np.linspace(0.0, 1.0, 20001)
    v = _psi(s)
    return float(np.abs(np.diff(v) / np.diff(s)).max())


def bump_profile(s):
    """The bump value psi(s) together with the cached psi''(0)."""
    return _psi(s), psi_second_derivative()


# ---------------------------------------------------------------------------
# Manifold specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Circle:
    radius: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise InputError("circle radius must be positive")


@dataclass(frozen=True)
class Sphere:
    dim: int = 2  # intrinsic dimension; ambient dimension is dim + 1
    radius: float = 1.0

    def __post_init__(self):
        if self.dim < 1:
            raise InputError("sphere dimension must be >= 1")
        if self.radius <= 0:
            raise InputError("sphere radius must be positive")


@dataclass(frozen=True)
class Torus:
    minor: float = 0.5
    major: float = 2.0

    def __post_init__(self):
        if self.minor <= 0 or self.major <= self.minor:
            raise InputError("torus needs 0 < minor < major")


@dataclass(frozen=True)
class BumpSphere:
    """Sphere of the given radius centered at -radius * e_(d+1), so it is
    tangent to the coordinate hyperplane at the origin, with the last
    coordinate pushed up by gamma^order * psi(|z| / gamma) near the apex."""

    dim: int = 1
    radius: float = 1.0
    gamma: float = 0.2
    order: int = 3

    def __post_init__(self):
        if self.dim < 1 or self.radius <= 0 or self.gamma < 0 or self.order < 3:
            raise InputError("bump sphere needs dim >= 1, radius > 0, gamma >= 0, order >= 3")
        if self.gamma > 0 and self.gamma ** (self.order - 1) * psi_max_slope() >= 1.0:
            raise InputError("bump too steep: gamma^(order-1) * sup|psi'| must stay below 1")


@dataclass(frozen=True)
class TwoSegmentBottleneck:
    """Two parallel segments of the given length at vertical gap 2*half_gap."""

    length: float = 1.0
    half_gap: float = 0.3

    def __post_init__(self):
        if self.length <= 0 or self.half_gap <= 0:
            raise InputError("segment length and half_gap must be positive")


@dataclass(frozen=True)
class Dumbbell:
    """Closed planar curve: two circular lobes joined by tangent neck arcs
    whose closest approach is the bottleneck of half-gap `half_gap`."""

    lobe_radius: float = 1.0
    half_gap: float = 0.3
    neck_radius: float = 1.0

    def __post_init__(self):
        r, w, rho = self.lobe_radius, self.half_gap, self.neck_radius
        if r <= 0 or w <= 0 or rho <= 0:
            raise InputError("dumbbell lengths must be positive")
        if w >= min(r, rho):
            raise InputError("dumbbell needs half_gap < min(lobe_radius, neck_radius)")
        x = (r + rho) ** 2 - (w + rho) ** 2
        if x <= 0 or math.sqrt(x) - r <= w:
            raise InputError("dumbbell lobes too close: the neck would not be the bottleneck")


ManifoldSpec = Union[Circle, Sphere, Torus, BumpSphere, TwoSegmentBottleneck, Dumbbell]


@dataclass(frozen=True)
class GroundTruth:
    """Reference reach quantities; provenance marks each field as analytic,
    a certified analytic bound, or oracle-resolved."""

    r_local: float
    r_wfs: float
    r: float
    provenance: dict

    def __post_init__(self):
        if not math.isclose(self.r, min(self.r_local, self.r_wfs), rel_tol=1e-12):
            raise InputError("ground truth must satisfy r = min(r_local, r_wfs)")


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def perturb_bump(cloud: PointCloud, gamma: float, k: int, psi=None) -> PointCloud:
    """Push the last coordinate up by gamma^k * psi(|z| / gamma) pointwise.

    Points with |z| >= gamma are unchanged exactly (psi vanishes outside its
    support)."""
    if gamma <= 0:
        raise InputError("gamma must be positive")
    if cloud.dim < 2:
        raise InputError("bump perturbation needs ambient dimension >= 2")
    psi_fn = _psi if psi is None else psi
    pts = cloud.points.copy()
    radii = np.sqrt((pts * pts).sum(axis=1))
    pts[:, -1] += gamma**k * psi_fn(radii / gamma)
    return PointCloud(pts)


def _sample_circle(spec: Circle, n, rng):
    theta = rng.uniform(0.0, 2.0 * math.pi, n)
    return spec.radius * np.column_stack([np.cos(theta), np.sin(theta)])


def _sample_sphere_shell(dim, radius, n, rng):
    g = rng.standard_normal((n, dim + 1))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return radius * g


def _sample_torus(spec: Torus, n, rng):
    vs = np.empty(0)
    # Area element scales with major + minor*cos(v); thin the proposal to match.
    while vs.size < n:
        cand = rng.uniform(0.0, 2.0 * math.pi, 2 * n)
        acc = rng.uniform(0.0, 1.0, 2 * n)
        keep = acc <= (spec.major + spec.minor * np.cos(cand)) / (spec.major + spec.minor)
        vs = np.concatenate([vs, cand[keep]])
    v = vs[:n]
    u = rng.uniform(0.0, 2.0 * math.pi, n)
    ring = spec.major + spec.minor * np.cos(v)
    return np.column_stack([ring * np.cos(u), ring * np.sin(u), spec.minor * np.sin(v)])


def _sample_bump_sphere(spec: BumpSphere, n, rng):
    r, gamma, k = spec.radius, spec.gamma, spec.order
    bound = 1.0 + (gamma ** (k - 1)) * psi_max_slope() if gamma > 0 else 1.0
    collected = []
    seen = 0
    while seen < n:
        base = _sample_sphere_shell(spec.dim, r, n, rng)
        base[:, -1] -= r  # center the sphere at -r * e_(d+1); apex at the origin
        norms = np.sqrt((base * base).sum(axis=1))
        if gamma > 0:
            with np.errstate(invalid="ignore", divide="ignore"):
                slope = np.where(
                    (norms > 0) & (norms < gamma),
                    _deriv_psi(norms / gamma) * base[:, -1] / np.maximum(norms, 1e-300),
                    0.0,
                )
            weight = 1.0 + (gamma ** (k - 1)) * slope
        else:
            weight = np.ones(n)
        u = rng.uniform(0.0, 1.0, n)
        kept = base[u * bound <= weight]
        collected.append(kept)
        seen += kept.shape[0]
    base = np.concatenate(collected, axis=0)[:n]
    if gamma > 0:
        return perturb_bump(PointCloud(base), gamma, k).points.copy()
    return base


def _deriv_psi(s):
    arr = np.atleast_1d(np.asarray(s, dtype=np.float64))
    out = np.zeros_like(arr)
    inside = np.abs(arr) < 1.0
    x = arr[inside]
    out[inside] = _psi(x) * (-2.0 * x / (1.0 - x * x) ** 2)
    return out


def _sample_segments(spec: TwoSegmentBottleneck, n, rng):
    side = rng.integers(0, 2, n)
    x = rng.uniform(0.0, spec.length, n)
    y = np.where(side == 1, spec.half_gap, -spec.half_gap)
    return np.column_stack([x, y])


def _dumbbell_arcs(spec: Dumbbell):
    """Arc list (cx, cy, radius, start_angle, signed_sweep) tracing the curve
    counterclockwise; lobes curve one way, necks the other."""
    r, w, rho = spec.lobe_radius, spec.half_gap, spec.neck_radius
    x = math.sqrt((r + rho) ** 2 - (w + rho) ** 2)
    theta = math.atan2(w + rho, x)
    lobe_sweep = 2.0 * math.pi - 2.0 * theta
    neck_sweep = 2.0 * theta - math.pi  # negative: necks are traversed clockwise
    return [
        (-x, 0.0, r, theta, lobe_sweep),
        (0.0, -(w + rho), rho, math.pi - theta, neck_sweep),
        (x, 0.0, r, theta - math.pi, lobe_sweep),
        (0.0, w + rho, rho, -theta, neck_sweep),
    ]


def _sample_dumbbell(spec: Dumbbell, n, rng):
    arcs = _dumbbell_arcs(spec)
    lengths = np.array([radius * abs(sweep) for (_, _, radius, _, sweep) in arcs])
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    u = rng.uniform(0.0, cum[-1], n)
    which = np.clip(np.searchsorted(cum, u, side="right") - 1, 0, len(arcs) - 1)
    pts = np.empty((n, 2))
    for a, (cx, cy, radius, a0, sweep) in enumerate(arcs):
        mask = which == a
        local = (u[mask] - cum[a]) / radius
        ang = a0 + math.copysign(1.0, sweep) * local
        pts[mask, 0] = cx + radius * np.cos(ang)
        pts[mask, 1] = cy + radius * np.sin(ang)
    return pts


def sample(spec: ManifoldSpec, n: int, seed: int) -> PointCloud:
    """Draw n i.i.d. points, uniform for the manifold's length/area measure.

    Deterministic given (spec, n, seed)."""
    if n < 1:
        raise InputError("sample size must be >= 1")
    rng = np.random.default_rng(seed)
    if isinstance(spec, Circle):
        pts = _sample_circle(spec, n, rng)
    elif isinstance(spec, Sphere):
        pts = _sample_sphere_shell(spec.dim, spec.radius, n, rng)
    elif isinstance(spec, Torus):
        pts = _sample_torus(spec, n, rng)
    elif isinstance(spec, BumpSphere):
        pts = _sample_bump_sphere(spec, n, rng)
    elif isinstance(spec, TwoSegmentBottleneck):
        pts = _sample_segments(spec, n, rng)
    elif isinstance(spec, Dumbbell):
        pts = _sample_dumbbell(spec, n, rng)
    else:
        raise InputError(f"unknown manifold spec {spec!r}")
    return PointCloud(pts)


def dense_reference(spec: ManifoldSpec, resolution: int = 20000) -> PointCloud:
    """Deterministic covering sample, for oracle error measurements.

    Not distribution-uniform; its only contract is a small covering radius of
    the manifold, so asymmetric Hausdorff distances against it estimate the
    covering error of i.i.d. samples."""
    if isinstance(spec, Circle):
        theta = np.linspace(0.0, 2.0 * math.pi, resolution, endpoint=False)
        return PointCloud(spec.radius * np.column_stack([np.cos(theta), np.sin(theta)]))
    if isinstance(spec, Sphere) and spec.dim == 1:
        theta = np.linspace(0.0, 2.0 * math.pi, resolution, endpoint=False)
        return PointCloud(spec.radius * np.column_stack([np.cos(theta), np.sin(theta)]))
    if isinstance(spec, Sphere) and spec.dim == 2:
        i = np.arange(resolution, dtype=np.float64)
        golden = math.pi * (3.0 - math.sqrt(5.0))
        zc = 1.0 - 2.0 * (i + 0.5) / resolution
        rad = np.sqrt(np.maximum(1.0 - zc * zc, 0.0))
        ang = golden * i
        return PointCloud(
            spec.radius * np.column_stack([rad * np.cos(ang), rad * np.sin(ang), zc])
        )
    if isinstance(spec, Torus):
        m = max(8, int(math.sqrt(resolution)))
        u = np.linspace(0.0, 2.0 * math.pi, 3 * m, endpoint=False)
        v = np.linspace(0.0, 2.0 * math.pi, m, endpoint=False)
        uu, vv = np.meshgrid(u, v, indexing="ij")
        ring = spec.major + spec.minor * np.cos(vv)
        return PointCloud(
            np.column_stack(
                [
                    (ring * np.cos(uu)).ravel(),
                    (ring * np.sin(uu)).ravel(),
                    (spec.minor * np.sin(vv)).ravel(),
                ]
            )
        )
    if isinstance(spec, BumpSphere) and spec.dim == 1:
        theta = np.linspace(0.0, 2.0 * math.pi, resolution, endpoint=False)
        base = spec.radius * np.column_stack([np.sin(theta), np.cos(theta) - 1.0])
        if spec.gamma == 0:
            return PointCloud(base)
        return perturb_bump(PointCloud(base), spec.gamma, spec.order)
    if isinstance(spec, BumpSphere) and spec.dim == 2:
        base = dense_reference(Sphere(2, spec.radius), resolution).points.copy()
        base[:, -1] -= spec.radius
        if spec.gamma == 0:
            return PointCloud(base)
        return perturb_bump(PointCloud(base), spec.gamma, spec.order)
    if isinstance(spec, TwoSegmentBottleneck):
        half = max(2, resolution // 2)
        x = np.linspace(0.0, spec.length, half)
        top = np.column_stack([x, np.full(half, spec.half_gap)])
        bot = np.column_stack([x, np.full(half, -spec.half_gap)])
        return PointCloud(np.concatenate([top, bot]))
    if isinstance(spec, Dumbbell):
        arcs = _dumbbell_arcs(spec)
        lengths = [radius * abs(sweep) for (_, _, radius, _, sweep) in arcs]
        total = sum(lengths)
        chunks = []
        for (cx, cy, radius, a0, sweep), arclen in zip(arcs, lengths):
            m = max(2, int(round(resolution * arclen / total)))
            local = np.linspace(0.0, arclen, m, endpoint=False) / radius
            ang = a0 + math.copysign(1.0, sweep) * local
            chunks.append(np.column_stack([cx + radius * np.cos(ang), cy + radius * np.sin(ang)]))
        return PointCloud(np.concatenate(chunks))
    raise InputError(f"no dense reference for {spec!r}")


# ---------------------------------------------------------------------------
# Ground truths
# ---------------------------------------------------------------------------

def ground_truth(spec: ManifoldSpec) -> GroundTruth:
    """Reference (r_local, r_wfs, r) for a spec, with per-field provenance."""
    if isinstance(spec, Circle):
        r = spec.radius
        return GroundTruth(r, r, r, {"r_local": "analytic", "r_wfs": "analytic", "r": "analytic"})
    if isinstance(spec, Sphere):
        r = spec.radius
        return GroundTruth(r, r, r, {"r_local": "analytic", "r_wfs": "analytic", "r": "analytic"})
    if isinstance(spec, Torus):
        # Principal curvatures peak at 1/minor (tube) and 1/(major - minor)
        # (inner equator); distance-function critical values sit at the core
        # circle (minor) and the hole center (major - minor).
        r_local = min(spec.minor, spec.major - spec.minor)
        r_wfs = min(spec.minor, spec.major - spec.minor)
        return GroundTruth(
            r_local,
            r_wfs,
            min(r_local, r_wfs),
            {"r_local": "analytic", "r_wfs": "analytic", "r": "analytic"},
        )
    if isinstance(spec, BumpSphere):
        r, gamma, k = spec.radius, spec.gamma, spec.order
        c0 = -psi_second_derivative()
        # Apex curvature 1/r + c0 * r * gamma^(k-2) bounds the local reach
        # from above; the bottleneck stays at the sphere diameter, so the
        # weak feature size keeps the lower bound r.
        r_local = 1.0 / (1.0 / r + c0 * r * gamma ** (k - 2)) if gamma > 0 else r
        return GroundTruth(
            r_local,
            r,
            min(r_local, r),
            {"r_local": "analytic-upper-bound", "r_wfs": "analytic-lower-bound", "r": "bound"},
        )
    if isinstance(spec, TwoSegmentBottleneck):
        return GroundTruth(
            math.inf,
            spec.half_gap,
            spec.half_gap,
            {"r_local": "analytic", "r_wfs": "analytic", "r": "analytic"},
        )
    if isinstance(spec, Dumbbell):
        r_local = min(spec.lobe_radius, spec.neck_radius)
        return GroundTruth(
            r_local,
            spec.half_gap,
            min(r_local, spec.half_gap),
            {"r_local": "analytic", "r_wfs": "analytic", "r": "analytic"},
        )
    raise InputError(f"unknown manifold spec {spec!r}")


# ---------------------------------------------------------------------------
# Cloud CSV
# ---------------------------------------------------------------------------

def save_cloud_csv(path, cloud: PointCloud, metadata: dict | None = None):
    """One point per row, comma-separated; '#' lines carry metadata."""
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in (metadata or {}).items():
            fh.write(f"# {key}: {value}\n")
        for row in cloud.points:
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


def load_cloud_csv(path) -> PointCloud:
    rows = []
    dim = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            try:
                row = [float(p) for p in parts]
            except ValueError as exc:
                raise InputError(f"line {lineno}: {exc}") from exc
            if dim is None:
                dim = len(row)
            elif len(row) != dim:
                raise InputError(f"line {lineno}: expected {dim} columns, got {len(row)}")
            rows.append(row)
    if not rows:
        raise InputError("cloud file contains no data rows")
    return PointCloud(np.asarray(rows, dtype=np.float64))
