"""Two-plane light-field parameterization and sample-budget accounting.

A line is recorded by its intersection coordinates (u, v) and (s, t)
with two parallel planes. Restricting the (s, t) samples to the union
of viewer pupil disks keeps every line that can carry visual
information and discards the rest; the budget functions quantify the
storage this saves against the full 4D grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Ray, Vec3


@dataclass
class PlanePatch:
    """Finite rectangular patch: origin corner plus orthonormal in-plane axes."""

    origin: Vec3
    u_axis: Vec3
    v_axis: Vec3
    width: float
    height: float

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=np.float64)
        self.u_axis = np.asarray(self.u_axis, dtype=np.float64)
        self.v_axis = np.asarray(self.v_axis, dtype=np.float64)
        for name in ("u_axis", "v_axis"):
            ax = getattr(self, name)
            if abs(np.linalg.norm(ax) - 1.0) > 1e-9:
                raise ValueError(f"{name} must be unit length")
        if abs(float(np.dot(self.u_axis, self.v_axis))) > 1e-9:
            raise ValueError("plane axes must be orthogonal")
        if not (self.width > 0.0 and self.height > 0.0):
            raise ValueError("plane extent must be positive")

    @property
    def normal(self) -> Vec3:
        return np.cross(self.u_axis, self.v_axis)


@dataclass
class TwoPlaneParam:
    uv_plane: PlanePatch
    st_plane: PlanePatch

    def __post_init__(self):
        n1 = self.uv_plane.normal
        n2 = self.st_plane.normal
        if np.linalg.norm(np.cross(n1, n2)) > 1e-9:
            raise ValueError("uv and st planes must be parallel")
        gap = float(np.dot(self.st_plane.origin - self.uv_plane.origin, n1))
        if abs(gap) < 1e-12:
            raise ValueError("uv and st planes must not be coincident")


@dataclass
class PupilSet:
    """Pupil disks on the st plane (center, radius)."""

    disks: list[tuple[Vec3, float]]

    def __post_init__(self):
        self.disks = [
            (np.asarray(c, dtype=np.float64), float(r)) for c, r in self.disks
        ]
        for _, r in self.disks:
            if r < 0.0:
                raise ValueError("pupil radius must be non-negative")

    def validate_on_plane(self, st: PlanePatch) -> None:
        n = st.normal
        for c, _ in self.disks:
            if abs(float(np.dot(c - st.origin, n))) > 1e-9:
                raise ValueError("pupil center does not lie on the st plane")


@dataclass
class BudgetConfig:
    n_u: int
    n_v: int
    n_s: int
    n_t: int
    bytes_per_sample: int

    def __post_init__(self):
        for name in ("n_u", "n_v", "n_s", "n_t", "bytes_per_sample"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")


@dataclass
class ReductionReport:
    full_samples: int
    pupil_samples: int
    full_bytes: int
    pupil_bytes: int
    ratio: float


def _plane_hit(ray: Ray, patch: PlanePatch):
    n = patch.normal
    denom = float(np.dot(ray.dir, n))
    if abs(denom) < 1e-12:
        return None
    t = float(np.dot(patch.origin - ray.origin, n)) / denom
    p = ray.origin + t * ray.dir
    d = p - patch.origin
    return float(np.dot(d, patch.u_axis)), float(np.dot(d, patch.v_axis))


def line_params(ray: Ray, param: TwoPlaneParam):
    """(u, v, s, t) plane-local intersection coordinates of the ray's line,
    or None for lines parallel to the planes (these are discarded)."""
    uv = _plane_hit(ray, param.uv_plane)
    if uv is None:
        return None
    st = _plane_hit(ray, param.st_plane)
    if st is None:
        return None
    return uv[0], uv[1], st[0], st[1]


def full_sample_count(cfg: BudgetConfig) -> int:
    """Samples of the unconstrained 4D grid."""
    return cfg.n_u * cfg.n_v * cfg.n_s * cfg.n_t


def _st_cells_in_pupils(cfg: BudgetConfig, param: TwoPlaneParam, pupils: PupilSet):
    st = param.st_plane
    pupils.validate_on_plane(st)
    s_centers = (np.arange(cfg.n_s) + 0.5) * (st.width / cfg.n_s)
    t_centers = (np.arange(cfg.n_t) + 0.5) * (st.height / cfg.n_t)
    ss, tt = np.meshgrid(s_centers, t_centers, indexing="ij")
    covered = np.zeros(ss.shape, dtype=bool)
    for center, radius in pupils.disks:
        d = center - st.origin
        cs = float(np.dot(d, st.u_axis))
        ct = float(np.dot(d, st.v_axis))
        covered |= (ss - cs) ** 2 + (tt - ct) ** 2 <= radius * radius
    return int(np.count_nonzero(covered))


def pupil_sample_count(
    cfg: BudgetConfig, param: TwoPlaneParam, pupils: PupilSet
) -> int:
    """Samples kept when the st grid is restricted to the pupil union.

    A cell counts when its center lies inside at least one disk;
    overlapping disks are not double counted.
    """
    return cfg.n_u * cfg.n_v * _st_cells_in_pupils(cfg, param, pupils)


def reduction_report(
    cfg: BudgetConfig, param: TwoPlaneParam, pupils: PupilSet
) -> ReductionReport:
    """Byte budgets of the full versus pupil-constrained representation."""
    full = full_sample_count(cfg)
    kept = pupil_sample_count(cfg, param, pupils)
    return ReductionReport(
        full_samples=full,
        pupil_samples=kept,
        full_bytes=full * cfg.bytes_per_sample,
        pupil_bytes=kept * cfg.bytes_per_sample,
        ratio=kept / full,
    )
