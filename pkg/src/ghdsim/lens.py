"""The crossed strip-mirror lens: ideal conjugate model and micro model.

The device is two stacked layers of parallel strip mirrors, the first
layer's mirrors perpendicular to x, the second perpendicular to y. A ray
reflected an odd number of times in both layers leaves with both
transverse direction components negated, so every bundle of such rays
from a point converges again at the point's mirror image across the
device plane. Rays with other reflection parities leave as transmitted
or ghost light.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .geometry import Ray, Vec3, fold_channel, normalize, vec3


@dataclass
class LensSpec:
    """Geometry of the strip-mirror lens.

    pitch_x is the wall spacing of the first layer (mirrors normal to x,
    slab [plane_z - depth1, plane_z]); pitch_y that of the second layer
    (mirrors normal to y, slab [plane_z, plane_z + depth2]). The aperture
    is a centered rectangle in the device plane, device normal = +z.
    """

    pitch_x: float = 0.0005
    pitch_y: float = 0.0005
    depth1: float = 0.002
    depth2: float = 0.002
    aperture_halfwidth: float = 0.1
    aperture_halfheight: float = 0.075
    plane_z: float = 0.0

    def scaled(self, factor: float) -> "LensSpec":
        """Lens with pitches and depths scaled by `factor` (aperture kept)."""
        return LensSpec(
            self.pitch_x * factor,
            self.pitch_y * factor,
            self.depth1 * factor,
            self.depth2 * factor,
            self.aperture_halfwidth,
            self.aperture_halfheight,
            self.plane_z,
        )


def validate_lens(lens: LensSpec) -> list[str]:
    """Invariant violations as human-readable strings (empty list if valid)."""
    issues = []
    for name in ("pitch_x", "pitch_y", "depth1", "depth2",
                 "aperture_halfwidth", "aperture_halfheight"):
        value = getattr(lens, name)
        if not (math.isfinite(value) and value > 0.0):
            issues.append(f"lens {name} must be positive, got {value}")
    if not math.isfinite(lens.plane_z):
        issues.append("lens plane_z must be finite")
    if not issues:
        if lens.pitch_x > 2.0 * lens.aperture_halfwidth / 10.0:
            issues.append("lens pitch_x must be at most aperture width / 10")
        if lens.pitch_y > 2.0 * lens.aperture_halfheight / 10.0:
            issues.append("lens pitch_y must be at most aperture height / 10")
    return issues


class RayClass(Enum):
    """Exit classification by per-layer reflection parity."""

    IMAGING = "imaging"        # odd in both layers: conjugate imaging light
    TRANSMITTED = "transmitted"  # even in both: passes with direction kept
    GHOST_X = "ghost_x"        # odd only in the x-mirror layer
    GHOST_Y = "ghost_y"        # odd only in the y-mirror layer


@dataclass
class ClassifiedRay:
    ray: Ray
    ray_class: RayClass
    reflections: tuple[int, int]  # (x layer, y layer)


@dataclass
class VisualWindow:
    """Disk an eye must intersect to see the display: the conjugate image
    of the projector aperture."""

    center: Vec3
    radius: float
    normal: Vec3


def ideal_conjugate(point, lens: LensSpec) -> Vec3:
    """Mirror image of a point across the device plane z = plane_z."""
    point = np.asarray(point, dtype=np.float64)
    return np.array(
        [point[0], point[1], 2.0 * lens.plane_z - point[2]], dtype=np.float64
    )


def trace_ideal(ray: Ray, lens: LensSpec) -> Ray | None:
    """Trace through the idealized zero-thickness lens.

    The exit ray starts at the aperture hit point with transverse
    direction components negated; returns None when the ray misses the
    aperture or never reaches the plane.
    """
    dx, dy, dz = (float(c) for c in ray.dir)
    if abs(dz) < 1e-15:
        return None
    t = (lens.plane_z - float(ray.origin[2])) / dz
    if t <= 1e-12:
        return None
    hx = float(ray.origin[0]) + t * dx
    hy = float(ray.origin[1]) + t * dy
    if abs(hx) > lens.aperture_halfwidth or abs(hy) > lens.aperture_halfheight:
        return None
    return Ray(vec3(hx, hy, lens.plane_z), vec3(-dx, -dy, dz))


def _fold_coord(coord: float, slope: float, depth: float, pitch: float):
    """Fold a world transverse coordinate through one layer.

    Returns (exit_world_coord, reflection_count)."""
    k = math.floor(coord / pitch)
    entry = coord - k * pitch
    if entry >= pitch:  # float guard when coord/pitch is a near-integer
        entry -= pitch
        k += 1
    if entry < 0.0:
        entry = 0.0
    res = fold_channel(entry, slope, depth, pitch)
    return k * pitch + res.exit_offset, res.reflection_count


def trace_micro(ray: Ray, lens: LensSpec) -> ClassifiedRay | None:
    """Trace through the two physical strip-mirror layers.

    Handles travel in either z direction (the layer order follows the
    direction of motion). Returns None when the ray misses the aperture,
    otherwise the classified exit ray at the far face of the device.
    """
    dx, dy, dz = (float(c) for c in ray.dir)
    if abs(dz) < 1e-15:
        return None
    going_up = dz > 0.0
    z_entry = lens.plane_z - lens.depth1 if going_up else lens.plane_z + lens.depth2
    t = (z_entry - float(ray.origin[2])) / dz
    if t <= 1e-12:
        return None
    ex = float(ray.origin[0]) + t * dx
    ey = float(ray.origin[1]) + t * dy
    if abs(ex) > lens.aperture_halfwidth or abs(ey) > lens.aperture_halfheight:
        return None

    inv = 1.0 / abs(dz)
    sx = dx * inv
    sy = dy * inv
    if going_up:
        x_mid, n1 = _fold_coord(ex, sx, lens.depth1, lens.pitch_x)
        y_mid = ey + sy * lens.depth1
        sx_out = -sx if n1 % 2 == 1 else sx
        y_exit, n2 = _fold_coord(y_mid, sy, lens.depth2, lens.pitch_y)
        x_exit = x_mid + sx_out * lens.depth2
        z_exit = lens.plane_z + lens.depth2
    else:
        y_mid, n2 = _fold_coord(ey, sy, lens.depth2, lens.pitch_y)
        x_mid = ex + sx * lens.depth2
        sy_out = -sy if n2 % 2 == 1 else sy
        x_exit, n1 = _fold_coord(x_mid, sx, lens.depth1, lens.pitch_x)
        y_exit = y_mid + sy_out * lens.depth1
        z_exit = lens.plane_z - lens.depth1

    out_dx = -dx if n1 % 2 == 1 else dx
    out_dy = -dy if n2 % 2 == 1 else dy
    if n1 % 2 == 1 and n2 % 2 == 1:
        cls = RayClass.IMAGING
    elif n1 % 2 == 0 and n2 % 2 == 0:
        cls = RayClass.TRANSMITTED
    elif n1 % 2 == 1:
        cls = RayClass.GHOST_X
    else:
        cls = RayClass.GHOST_Y
    exit_ray = Ray(vec3(x_exit, y_exit, z_exit), vec3(out_dx, out_dy, dz))
    return ClassifiedRay(exit_ray, cls, (n1, n2))


def visual_window(
    projector_aperture_center,
    projector_aperture_radius: float,
    lens: LensSpec,
) -> VisualWindow:
    """Conjugate image of the projector aperture: where an eye must sit."""
    if not projector_aperture_radius > 0.0:
        raise ValueError("projector aperture radius must be positive")
    center = ideal_conjugate(projector_aperture_center, lens)
    return VisualWindow(center, projector_aperture_radius, vec3(0.0, 0.0, 1.0))


def imaging_fraction(
    lens: LensSpec, incidence_dir, n_samples: int, seed: int = 0
) -> float:
    """Monte Carlo fraction of entry offsets that exit as imaging light.

    Entry offsets are sampled uniformly over one channel period in each
    layer; by periodicity this equals the fraction over the full aperture
    for the given incidence direction. Deterministic for a fixed seed.
    """
    if n_samples < 1000:
        raise ValueError("n_samples must be at least 1000")
    d = normalize(incidence_dir)
    if abs(d[2]) < 1e-12:
        raise ValueError("incidence direction must have a nonzero z component")
    inv = 1.0 / abs(d[2])
    sx = d[0] * inv
    sy = d[1] * inv

    rng = np.random.default_rng(seed)
    ex = rng.uniform(0.0, lens.pitch_x, n_samples)
    ey = rng.uniform(0.0, lens.pitch_y, n_samples)
    n1 = np.abs(np.floor((ex + sx * lens.depth1) / lens.pitch_x))
    n2 = np.abs(np.floor((ey + sy * lens.depth2) / lens.pitch_y))
    imaging = (n1 % 2 == 1) & (n2 % 2 == 1)
    return float(np.mean(imaging))
