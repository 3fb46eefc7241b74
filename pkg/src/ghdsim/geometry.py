"""3D vector/ray primitives and the channel fold used by the mirror-array lens.

All positions are metres, world frame. Directions are unit vectors. The
channel fold (`fold_channel`) resolves a ray bouncing between the two
parallel mirror walls of one strip-mirror channel analytically, without
stepping bounce by bounce.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

Vec3 = np.ndarray  # shape (3,), float64

_UNIT_TOL = 1e-9


def vec3(x: float, y: float, z: float) -> Vec3:
    return np.array([x, y, z], dtype=np.float64)


def norm(v: Vec3) -> float:
    return float(np.linalg.norm(v))


def normalize(v) -> Vec3:
    """Unit vector along v; a vector already unit to 1e-12 is returned
    verbatim so that normalization is idempotent bit for bit."""
    v = np.asarray(v, dtype=np.float64)
    n = np.linalg.norm(v)
    if not np.isfinite(n) or n == 0.0:
        raise ValueError("cannot normalize zero or non-finite vector")
    if abs(n - 1.0) <= 1e-12:
        return v
    return v / n


def _require_unit(v: Vec3, name: str) -> None:
    if abs(np.linalg.norm(v) - 1.0) > _UNIT_TOL:
        raise ValueError(f"{name} must be a unit vector")


@dataclass
class Ray:
    """A ray with origin and unit direction.

    The direction is normalized on construction, so the unit invariant
    holds to machine precision for any nonzero finite input.
    """

    origin: Vec3
    dir: Vec3

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=np.float64)
        if self.origin.shape != (3,) or not np.all(np.isfinite(self.origin)):
            raise ValueError("ray origin must be a finite 3-vector")
        self.dir = normalize(self.dir)

    def at(self, t: float) -> Vec3:
        return self.origin + t * self.dir


@dataclass(frozen=True)
class ChannelFoldResult:
    """Outcome of propagating a ray across one strip-mirror layer.

    exit_offset lies in [0, pitch] (it can land exactly on a wall),
    flipped is true iff the transverse direction component leaves the
    layer reversed, which happens exactly when reflection_count is odd.
    """

    exit_offset: float
    reflection_count: int
    flipped: bool


def reflect(dir: Vec3, normal: Vec3) -> Vec3:
    """Mirror-reflect a unit direction about a unit surface normal."""
    dir = np.asarray(dir, dtype=np.float64)
    normal = np.asarray(normal, dtype=np.float64)
    _require_unit(dir, "dir")
    _require_unit(normal, "normal")
    return dir - 2.0 * float(np.dot(dir, normal)) * normal


def intersect_plane(ray: Ray, plane_point: Vec3, plane_normal: Vec3):
    """Intersect a ray with an infinite plane.

    Returns (t, point) for the smallest t > 1e-12, or None when the ray is
    parallel to the plane or the intersection lies behind the origin.
    """
    plane_point = np.asarray(plane_point, dtype=np.float64)
    plane_normal = np.asarray(plane_normal, dtype=np.float64)
    _require_unit(plane_normal, "plane_normal")
    denom = float(np.dot(ray.dir, plane_normal))
    if abs(denom) < 1e-12:
        return None
    t = float(np.dot(plane_point - ray.origin, plane_normal)) / denom
    if t <= 1e-12:
        return None
    return t, ray.at(t)


def fold_channel(
    entry_offset: float, slope: float, depth: float, pitch: float
) -> ChannelFoldResult:
    """Propagate a ray across a mirror layer of parallel walls, analytically.

    The walls sit at integer multiples of `pitch`; the ray enters its
    channel at transverse offset `entry_offset` in [0, pitch) and advances
    `slope` transverse units per longitudinal unit over a layer of
    longitudinal extent `depth`. Unfolding the bounces gives a straight
    line ending at w = entry_offset + slope*depth; the reflection count is
    |floor(w / pitch)| and the exit offset is the triangle-wave fold of w
    back into [0, pitch]. A ray landing exactly on a wall counts as having
    crossed it.
    """
    if not (pitch > 0.0) or not (depth > 0.0):
        raise ValueError("pitch and depth must be positive")
    if not math.isfinite(slope):
        raise ValueError("slope must be finite")
    if not (0.0 <= entry_offset < pitch):
        raise ValueError("entry_offset must lie in [0, pitch)")

    w = entry_offset + slope * depth
    n = abs(math.floor(w / pitch))
    m = w - 2.0 * pitch * math.floor(w / (2.0 * pitch))
    exit_offset = m if m <= pitch else 2.0 * pitch - m
    return ChannelFoldResult(exit_offset, int(n), n % 2 == 1)
