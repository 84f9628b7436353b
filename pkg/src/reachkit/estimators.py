"""Reach estimation on top of a defect profile.

The local estimate inverts the small-scale quadratic growth of the defect,
reading h at a single scale delta derived from the Hausdorff error budget
epsilon (delta = epsilon^(1/3) for regularity order 3, epsilon^(1/4) above).
The global estimate is the first scale where the profile touches the shifted
diagonal t - 3 epsilon beyond the cutoff (22/4) epsilon. Both are capped at
r_max and the reach estimate is their minimum.
"""

from __future__ import annotations

import dataclasses
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .defect import DefectConfig, DefectProfile, cloud_diameter, defect_profile, first_diagonal_touch
from .errors import ConfigError, InputError
from .geometry import PointCloud


@dataclass(frozen=True)
class ModelParams:
    """Regularity-class parameters configuring the estimators.

    epsilon is the Hausdorff error of the cloud as a proxy for the underlying
    set; when omitted it is estimated from the cloud itself. delta overrides
    the derived curvature-read scale (it is a length and must be scaled along
    with the data; the default derivation from epsilon is not homogeneous).
    f_max is accepted for completeness but takes no part in any computation.
    """

    d: int
    k: int
    r_max: float
    r_min: float | None = None
    epsilon: float | None = None
    f_min: float | None = None
    f_max: float | None = None
    delta: float | None = None

    def __post_init__(self):
        if self.d < 1:
            raise InputError("intrinsic dimension d must be >= 1")
        if self.k < 3:
            raise InputError("regularity order k must be >= 3")
        if not (self.r_max > 0):
            raise InputError("r_max must be positive")
        if self.r_min is not None:
            if self.r_min <= 0:
                raise InputError("r_min must be positive")
            if self.r_min > self.r_max:
                raise InputError("r_min must not exceed r_max")
        for name in ("epsilon", "f_min", "f_max", "delta"):
            val = getattr(self, name)
            if val is not None and not (val > 0):
                raise InputError(f"{name} must be positive when given")


@dataclass(frozen=True)
class ReachEstimate:
    """The three estimates plus diagnostics of which branch fired."""

    r_hat: float
    r_local: float
    r_wfs: float
    epsilon_used: float
    delta_used: float
    branch: str  # local | global | capped
    n_points: int
    dim: int
    order: int

    def to_dict(self) -> dict:
        return {
            "r_hat": self.r_hat,
            "r_local": self.r_local,
            "r_wfs": self.r_wfs,
            "epsilon_used": self.epsilon_used,
            "delta_used": self.delta_used,
            "branch": self.branch,
            "n_points": self.n_points,
            "dim": self.dim,
            "order": self.order,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "ReachEstimate":
        return cls(**{f.name: data[f.name] for f in dataclasses.fields(cls)})


def estimate_epsilon(cloud: PointCloud) -> float:
    """Twice the empirical covering-radius proxy.

    The proxy is the max over points of the distance to the nearest distinct
    neighbor; the doubling is a safety factor for the unseen side of the
    Hausdorff error between the cloud and the set it samples.
    """
    if cloud.n < 2:
        raise InputError("epsilon estimation needs at least 2 points")
    from scipy.spatial import cKDTree

    dists, _ = cKDTree(cloud.points).query(cloud.points, k=2)
    proxy = float(dists[:, 1].max())
    if proxy <= 0.0:
        raise InputError("cloud has no metric extent; epsilon proxy is zero")
    return 2.0 * proxy


def _delta_from_epsilon(epsilon: float, k: int) -> float:
    return epsilon ** (1.0 / 3.0) if k == 3 else epsilon ** 0.25


def _require_epsilon(params: ModelParams) -> float:
    if params.epsilon is None:
        raise ConfigError("epsilon is required here: pass it in ModelParams or estimate_epsilon(cloud)")
    return params.epsilon


def local_reach(profile: DefectProfile, params: ModelParams):
    """Curvature-driven reach estimate read off the profile near the origin.

    Returns (r_local, delta_used); delta_used is the grid scale actually read
    (the closest one >= the requested delta, snapping outward so that the
    discretization errs conservatively).
    """
    epsilon = _require_epsilon(params)
    requested = params.delta if params.delta is not None else _delta_from_epsilon(epsilon, params.k)
    delta, h = profile.read_at(requested)
    if h == 0.0:
        return params.r_max, delta
    return min(delta * delta / (2.0 * h), params.r_max), delta


def wfs(profile: DefectProfile, params: ModelParams) -> float:
    """Weak-feature-size estimate via the diagonal-touch detector, capped at r_max."""
    epsilon = _require_epsilon(params)
    if params.r_min is not None and epsilon >= (2.0 / 9.0) * params.r_min:
        warnings.warn(
            f"epsilon={epsilon:.4g} is not below (2/9) r_min={params.r_min:.4g}; "
            "the diagonal-touch detector may be unreliable",
            stacklevel=2,
        )
    touch = first_diagonal_touch(profile, epsilon)
    if touch is None:
        return params.r_max
    return min(touch, params.r_max)


def reach(cloud: PointCloud, params: ModelParams, config: DefectConfig | None = None) -> ReachEstimate:
    """End-to-end reach estimate: profile, local and wfs reads, combined min.

    Without an explicit config the profile covers half the cloud diameter and
    is extended if needed so the curvature read scale stays on the grid.
    """
    if cloud.n < 2:
        raise InputError("reach estimation needs at least 2 points")
    epsilon = params.epsilon if params.epsilon is not None else estimate_epsilon(cloud)
    effective = dataclasses.replace(params, epsilon=epsilon)
    requested_delta = (
        effective.delta if effective.delta is not None else _delta_from_epsilon(epsilon, effective.k)
    )
    if config is None:
        max_scale = max(0.5 * cloud_diameter(cloud), requested_delta)
        config = DefectConfig(max_scale=max_scale)
    profile = defect_profile(cloud, config)
    r_local, delta_used = local_reach(profile, effective)
    r_wfs = wfs(profile, effective)
    r_hat = min(r_local, r_wfs)
    if r_local >= params.r_max and r_wfs >= params.r_max:
        branch = "capped"
    elif r_local <= r_wfs:
        branch = "local"
    else:
        branch = "global"
    return ReachEstimate(
        r_hat=r_hat,
        r_local=r_local,
        r_wfs=r_wfs,
        epsilon_used=epsilon,
        delta_used=delta_used,
        branch=branch,
        n_points=cloud.n,
        dim=cloud.dim,
        order=profile.order,
    )


def sphere_volume(d: int) -> float:
    """d-dimensional volume of the unit d-sphere embedded in R^(d+1)."""
    return 2.0 * math.pi ** ((d + 1) / 2.0) / math.gamma((d + 1) / 2.0)


def rmax_from_density(f_min: float, d: int) -> float:
    """Cap implied by a density lower bound: (f_min * omega_d)^(-1/d).

    This is a partial bound: it covers the curvature part of the cap; the
    bottleneck part involves a dimensional constant with no usable closed
    form, so callers should treat the result as a helper, not a certificate.
    """
    if not (f_min > 0):
        raise InputError("f_min must be positive")
    if d < 1:
        raise InputError("d must be >= 1")
    return (f_min * sphere_volume(d)) ** (-1.0 / d)
