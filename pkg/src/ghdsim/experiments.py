"""Reproducible experiment presets: two-view parallax, focus sweep,
pitch sweep. The CLI wraps these; tests call them directly."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .camera import ThinLensCamera, project_point
from .lens import imaging_fraction, visual_window
from .render import Image, LensMode, RenderOptions, render, sharpness
from .scene import Scene
from .scenefile import SceneDocument


@dataclass
class CardShift:
    distance_m: float  # from the first eye
    analytic_px: float
    measured_px: float  # nan when the card is not identifiable by color


@dataclass
class Fig4Result:
    eye_a: np.ndarray
    eye_b: np.ndarray
    image_a: Image
    image_b: Image
    shifts: list[CardShift]
    exposed_pixels: int  # far-card pixels revealed from behind the near card


def _camera_at(camera: ThinLensCamera, eye: np.ndarray) -> ThinLensCamera:
    return replace(camera, pupil_center=np.asarray(eye, dtype=np.float64))


def _color_mask(image: Image, color: np.ndarray, tol: float = 0.05) -> np.ndarray:
    return np.all(np.abs(image.pixels - color[None, None, :]) < tol, axis=2)


def _centroid_col(mask: np.ndarray) -> float:
    cols = np.nonzero(mask)[1]
    return float(cols.mean()) if cols.size else float("nan")


def run_fig4(
    doc: SceneDocument,
    baseline: float = 0.03,
    opts: RenderOptions | None = None,
) -> Fig4Result:
    """Render the scene from two eyes inside the visual window.

    The eyes sit at the window center offset by +-baseline/2 along x.
    Per-card image displacement is measured by color centroid and
    predicted by projecting the card center through each pinhole.
    """
    scene, camera = doc.scene, doc.camera
    opts = opts or RenderOptions()
    window = visual_window(
        scene.projector.aperture_center, scene.projector.aperture_radius, scene.lens
    )
    shift = np.array([baseline / 2.0, 0.0, 0.0])
    eye_a = window.center - shift
    eye_b = window.center + shift
    cam_a = _camera_at(camera, eye_a)
    cam_b = _camera_at(camera, eye_b)
    img_a = render(scene, cam_a, opts)
    img_b = render(scene, cam_b, opts)

    shifts = []
    for card in scene.cards:
        pa = project_point(cam_a, card.center)
        pb = project_point(cam_b, card.center)
        analytic = abs(pb[0] - pa[0]) if pa and pb else float("nan")
        color = card.texture[:, :, :3].reshape(-1, 3).mean(axis=0)
        ca = _centroid_col(_color_mask(img_a, color))
        cb = _centroid_col(_color_mask(img_b, color))
        measured = abs(cb - ca)
        shifts.append(
            CardShift(
                distance_m=float(np.linalg.norm(card.center - eye_a)),
                analytic_px=analytic,
                measured_px=measured,
            )
        )

    exposed = 0
    if len(scene.cards) >= 2:
        order = np.argsort([s.distance_m for s in shifts])
        near = scene.cards[order[0]]
        far = scene.cards[order[-1]]
        near_color = near.texture[:, :, :3].reshape(-1, 3).mean(axis=0)
        far_color = far.texture[:, :, :3].reshape(-1, 3).mean(axis=0)
        exposed = int(
            np.count_nonzero(
                _color_mask(img_a, near_color) & _color_mask(img_b, far_color)
            )
        )
    return Fig4Result(eye_a, eye_b, img_a, img_b, shifts, exposed)


@dataclass
class FocusSweepResult:
    focus_distances: np.ndarray
    sharpness_values: np.ndarray
    frames: list[Image]
    region: tuple[int, int, int, int]

    def argmax_focus(self) -> float:
        return float(self.focus_distances[int(np.argmax(self.sharpness_values))])


def card_region(camera: ThinLensCamera, scene: Scene, card_index: int = 0):
    """Projected bounding box of a card, clipped to the sensor."""
    card = scene.cards[card_index]
    u, v = card.basis()
    cols = []
    rows = []
    for su in (-1.0, 1.0):
        for sv in (-1.0, 1.0):
            corner = card.center + su * card.halfwidth * u + sv * card.halfheight * v
            proj = project_point(camera, corner)
            if proj is None:
                raise ValueError("card corner is behind the camera")
            cols.append(proj[0])
            rows.append(proj[1])
    x0 = max(0, int(np.floor(min(cols))))
    y0 = max(0, int(np.floor(min(rows))))
    x1 = min(camera.sensor_width_px, int(np.ceil(max(cols))) + 1)
    y1 = min(camera.sensor_height_px, int(np.ceil(max(rows))) + 1)
    if x1 - x0 < 2 or y1 - y0 < 2:
        raise ValueError("card projects to a degenerate region")
    return (x0, y0, x1 - x0, y1 - y0)


def run_focus_sweep(
    doc: SceneDocument,
    focus_min: float = 0.5,
    focus_max: float = 8.0,
    focus_step: float = 0.25,
    opts: RenderOptions | None = None,
    card_index: int = 0,
    region: tuple[int, int, int, int] | None = None,
    keep_frames: bool = True,
) -> FocusSweepResult:
    """Render the scene over a focus-distance sweep and score sharpness
    of one card's projected region per frame."""
    scene, camera = doc.scene, doc.camera
    opts = opts or RenderOptions()
    n = int(round((focus_max - focus_min) / focus_step)) + 1
    distances = focus_min + focus_step * np.arange(n)
    if region is None:
        region = card_region(camera, scene, card_index)
    values = np.zeros(n)
    frames: list[Image] = []
    for i, zf in enumerate(distances):
        cam = replace(camera, focus_distance=float(zf))
        img = render(scene, cam, opts)
        values[i] = sharpness(img, region)
        if keep_frames:
            frames.append(img)
    return FocusSweepResult(distances, values, frames, region)


@dataclass
class PitchSweepRow:
    scale: float
    pitch_x: float
    pitch_y: float
    depth1: float
    depth2: float
    imaging_fraction: float
    mean_abs_diff: float


def run_pitch_sweep(
    doc: SceneDocument,
    scales: tuple[float, ...] = (1.0, 0.5, 0.25),
    direction=(0.08, 0.06, -1.0),
    n_samples: int = 100_000,
    opts: RenderOptions | None = None,
) -> list[PitchSweepRow]:
    """Shrink the strip pitch (layer depths kept) and track the imaging
    fraction and the micro-vs-ideal image difference."""
    scene, camera = doc.scene, doc.camera
    opts = opts or RenderOptions()
    ideal = render(scene, camera, replace(opts, mode=LensMode.IDEAL))
    rows = []
    for s in scales:
        lens_s = replace(scene.lens, pitch_x=scene.lens.pitch_x * s,
                         pitch_y=scene.lens.pitch_y * s)
        scene_s = replace(scene, lens=lens_s)
        micro = render(scene_s, camera, replace(opts, mode=LensMode.MICRO))
        diff = float(np.mean(np.abs(ideal.pixels - micro.pixels)))
        frac = imaging_fraction(lens_s, direction, n_samples, seed=opts.seed)
        rows.append(
            PitchSweepRow(
                scale=s,
                pitch_x=lens_s.pitch_x,
                pitch_y=lens_s.pitch_y,
                depth1=lens_s.depth1,
                depth2=lens_s.depth2,
                imaging_fraction=frac,
                mean_abs_diff=diff,
            )
        )
    return rows
