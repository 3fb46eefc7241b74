"""Scene content, the volumetric projector, and eye-tracking steering.

A scene holds the content as it should appear to the viewer: point
sources and textured opaque cards placed at display positions on either
side of the lens plane. The projector behind the lens must form each
object's mirror twin (its source) for the lens to reconstruct it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Vec3, vec3
from .lens import LensSpec, ideal_conjugate, validate_lens


@dataclass
class ScenePoint:
    display_pos: Vec3
    color: Vec3  # rgb in [0, 1]

    def __post_init__(self):
        self.display_pos = np.asarray(self.display_pos, dtype=np.float64)
        self.color = np.asarray(self.color, dtype=np.float64)


@dataclass
class Card:
    """Flat textured rectangle; per-texel alpha is binary (opaque or hole)."""

    center: Vec3
    halfwidth: float
    halfheight: float
    normal: Vec3
    texture: np.ndarray  # (H, W, 4) rgba, floats in [0, 1], alpha in {0, 1}
    texture_path: str | None = None

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=np.float64)
        self.normal = np.asarray(self.normal, dtype=np.float64)
        self.texture = np.asarray(self.texture, dtype=np.float64)

    def basis(self) -> tuple[Vec3, Vec3]:
        """In-plane (u, v) axes; u maps to texture columns, v to rows."""
        return card_basis(self.normal)


def card_basis(normal) -> tuple[Vec3, Vec3]:
    n = np.asarray(normal, dtype=np.float64)
    up = vec3(0.0, 1.0, 0.0)
    if abs(float(np.dot(n, up))) > 0.9:
        up = vec3(0.0, 0.0, 1.0)
    u = np.cross(up, n)
    u = u / np.linalg.norm(u)
    v = np.cross(n, u)
    return u, v


def solid_texture(color) -> np.ndarray:
    """1x1 fully opaque texture of one color."""
    r, g, b = (float(c) for c in color)
    return np.array([[[r, g, b, 1.0]]], dtype=np.float64)


@dataclass
class Projector:
    """Aperture disk of the volumetric projector, behind the lens (-z side).

    Every light line of the display passes through this disk; what the
    projector paints along each line is whatever reconstructs the scene,
    so only the aperture geometry matters here.
    """

    aperture_center: Vec3
    aperture_radius: float

    def __post_init__(self):
        self.aperture_center = np.asarray(self.aperture_center, dtype=np.float64)


@dataclass
class Scene:
    lens: LensSpec
    projector: Projector
    points: list[ScenePoint] = field(default_factory=list)
    cards: list[Card] = field(default_factory=list)
    background: Vec3 = field(default_factory=lambda: vec3(0.0, 0.0, 0.0))

    def __post_init__(self):
        self.background = np.asarray(self.background, dtype=np.float64)


def source_position(display_pos, lens: LensSpec) -> Vec3:
    """Where the projector must form a point so it reconstructs at
    display_pos: the mirror twin across the lens plane."""
    return ideal_conjugate(display_pos, lens)


def steer_projector(eye_pos, projector: Projector, lens: LensSpec) -> Projector:
    """Translate the projector so the visual window lands on the eye."""
    eye_pos = np.asarray(eye_pos, dtype=np.float64)
    if eye_pos[2] <= lens.plane_z:
        raise ValueError("eye must be on the +z side of the lens plane")
    return Projector(ideal_conjugate(eye_pos, lens), projector.aperture_radius)


def _finite(arr) -> bool:
    return bool(np.all(np.isfinite(arr)))


def validate_scene(scene: Scene) -> list[str]:
    """All invariant violations as diagnostics; empty list means valid."""
    issues = list(validate_lens(scene.lens))

    pj = scene.projector
    if not _finite(pj.aperture_center):
        issues.append("projector center must be finite")
    elif pj.aperture_center[2] >= scene.lens.plane_z:
        issues.append("projector must be behind lens (center z < lens plane_z)")
    if not (math.isfinite(pj.aperture_radius) and pj.aperture_radius > 0.0):
        issues.append("projector radius must be positive")

    for i, p in enumerate(scene.points):
        label = f"point #{i + 1}"
        if not _finite(p.display_pos):
            issues.append(f"{label}: position must be finite")
        if p.color.shape != (3,) or not _finite(p.color) or np.any(
            (p.color < 0.0) | (p.color > 1.0)
        ):
            issues.append(f"{label}: color components must lie in [0, 1]")

    for i, c in enumerate(scene.cards):
        label = f"card #{i + 1}"
        if not _finite(c.center):
            issues.append(f"{label}: center must be finite")
        if not (math.isfinite(c.halfwidth) and c.halfwidth > 0.0):
            issues.append(f"{label}: halfwidth must be positive")
        if not (math.isfinite(c.halfheight) and c.halfheight > 0.0):
            issues.append(f"{label}: halfheight must be positive")
        n = np.linalg.norm(c.normal) if _finite(c.normal) else 0.0
        if abs(n - 1.0) > 1e-9:
            issues.append(f"{label}: normal must be a unit vector")
        if (
            c.texture.ndim != 3
            or c.texture.shape[2] != 4
            or c.texture.shape[0] < 1
            or c.texture.shape[1] < 1
        ):
            issues.append(f"{label}: texture must be a (H, W, 4) grid, H, W >= 1")
        elif not _finite(c.texture):
            issues.append(f"{label}: texture values must be finite")

    if scene.background.shape != (3,) or not _finite(scene.background) or np.any(
        (scene.background < 0.0) | (scene.background > 1.0)
    ):
        issues.append("background rgb must lie in [0, 1]")
    return issues
