"""Thin-lens eye/camera model: window test, defocus blur, projection."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Vec3, normalize
from .lens import VisualWindow


@dataclass
class ThinLensCamera:
    """Eye or camera with a finite pupil and a focusable thin lens.

    focus_distance is the object-side distance from the pupil at which
    points render sharp; horizontal_fov spans the sensor width.
    """

    pupil_center: Vec3
    pupil_diameter: float
    focal_length: float
    focus_distance: float
    sensor_width_px: int
    sensor_height_px: int
    horizontal_fov: float
    look_dir: Vec3
    up: Vec3

    def __post_init__(self):
        self.pupil_center = np.asarray(self.pupil_center, dtype=np.float64)
        self.look_dir = np.asarray(self.look_dir, dtype=np.float64)
        self.up = np.asarray(self.up, dtype=np.float64)

    def basis(self) -> tuple[Vec3, Vec3, Vec3]:
        """Orthonormal (right, up, forward) camera axes."""
        fwd = normalize(self.look_dir)
        right = normalize(np.cross(fwd, self.up))
        up = np.cross(right, fwd)
        return right, up, fwd


def validate_camera(cam: ThinLensCamera) -> list[str]:
    issues = []
    if not np.all(np.isfinite(cam.pupil_center)):
        issues.append("camera pupil_center must be finite")
    if not (math.isfinite(cam.focal_length) and cam.focal_length > 0.0):
        issues.append("camera focal_length must be positive")
    elif not (
        math.isfinite(cam.focus_distance)
        and cam.focus_distance > cam.focal_length
    ):
        issues.append("camera focus_distance must exceed focal_length")
    if not (math.isfinite(cam.pupil_diameter) and cam.pupil_diameter > 0.0):
        issues.append("camera pupil_diameter must be positive")
    if not (0.0 < cam.horizontal_fov < math.pi):
        issues.append("camera horizontal_fov must lie in (0, pi)")
    if cam.sensor_width_px < 1 or cam.sensor_height_px < 1:
        issues.append("camera sensor dimensions must be at least 1 px")
    try:
        fwd = normalize(cam.look_dir)
        up = np.asarray(cam.up, dtype=np.float64)
        if np.linalg.norm(np.cross(fwd, up)) < 1e-9:
            issues.append("camera up must not be parallel to look_dir")
    except ValueError:
        issues.append("camera look_dir must be a nonzero vector")
    return issues


def in_window(camera: ThinLensCamera, window: VisualWindow) -> bool:
    """Whether the pupil disk overlaps the visual window.

    Both disks are projected onto the window plane; the pupil then sees
    at least part of the projector's light.
    """
    n = normalize(window.normal)
    offset = camera.pupil_center - window.center
    in_plane = offset - float(np.dot(offset, n)) * n
    reach = window.radius + camera.pupil_diameter / 2.0
    return float(np.linalg.norm(in_plane)) <= reach


def blur_diameter(object_distance: float, camera: ThinLensCamera) -> float:
    """Defocus blur circle diameter on the sensor for a point at the
    given object-side distance.

    Images the focus plane at v_f = f*z_f/(z_f - f) and the object at
    v = f*z/(z - f); the aperture cone converging at v spreads over
    pupil_diameter * |v_f - v| / v at the sensor.
    """
    f = camera.focal_length
    if object_distance <= f:
        raise ValueError("object distance must exceed the focal length")
    v_f = f * camera.focus_distance / (camera.focus_distance - f)
    v = f * object_distance / (object_distance - f)
    return camera.pupil_diameter * abs(v_f - v) / v


def project_point(camera: ThinLensCamera, point) -> tuple[float, float] | None:
    """Pinhole projection through the pupil center to float pixel coords.

    Returns (col, row), or None for points not in front of the camera.
    Matches the renderer's pixel-center ray mapping, so a point projected
    at (col, row) renders at that pixel when in focus.
    """
    right, up, fwd = camera.basis()
    d = np.asarray(point, dtype=np.float64) - camera.pupil_center
    z = float(np.dot(d, fwd))
    if z <= 1e-12:
        return None
    tanf = math.tan(camera.horizontal_fov / 2.0)
    aspect = camera.sensor_height_px / camera.sensor_width_px
    u = float(np.dot(d, right)) / (z * tanf)
    v = float(np.dot(d, up)) / (z * tanf * aspect)
    col = (u + 1.0) / 2.0 * camera.sensor_width_px - 0.5
    row = (1.0 - v) / 2.0 * camera.sensor_height_px - 0.5
    return col, row
