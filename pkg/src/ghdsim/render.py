"""Back-traced ray-cast renderer.

For every pixel sample, an eye ray is formed from a pupil-disk point and
a jittered sensor direction, traced to the lens, propagated to the
projector side (ideal conjugation or the physical strip-mirror layers),
and gated on whether it meets the projector aperture: only lines that
carry display light contribute, everything else sees the background.
Content is then resolved by nearest-opaque-hit along the ray's
visibility line, which yields occlusion, parallax and accommodation
behaviour without any per-effect code.

In micro mode, samples whose exit class is dropped (ghost/transmitted
light with include_ghosts off) are excluded from the pixel average
rather than darkening it, so the micro image converges to the ideal one
as the mirror structure shrinks; a pixel with no kept sample shows the
background, which is what makes the sub-pitch gridding visible when the
camera focuses on the lens plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels_np
from .backend import active_backend
from .camera import ThinLensCamera, validate_camera
from .scene import Scene, validate_scene


class LensMode(Enum):
    IDEAL = "ideal"
    MICRO = "micro"


@dataclass
class RenderOptions:
    mode: LensMode = LensMode.IDEAL
    include_ghosts: bool = False
    rays_per_pixel: int = 16
    seed: int = 0
    point_radius: float = 0.002  # render radius of point sources, metres


@dataclass
class Image:
    width: int
    height: int
    pixels: np.ndarray  # (height, width, 3), channels in [0, 1]

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.float64)
        if self.pixels.shape != (self.height, self.width, 3):
            raise ValueError("pixel grid does not match width/height")


def _strata(spp: int) -> tuple[int, int]:
    gw = int(math.sqrt(spp))
    while spp % gw:
        gw -= 1
    return gw, spp // gw


def _concentric_disk(a: np.ndarray, b: np.ndarray):
    """Shirley's uniform square-to-disk map (unit disk)."""
    ax = 2.0 * a - 1.0
    by = 2.0 * b - 1.0
    first = np.abs(ax) > np.abs(by)
    r = np.where(first, ax, by)
    theta = np.where(
        first,
        (np.pi / 4.0) * np.divide(by, np.where(ax == 0.0, 1.0, ax)),
        np.pi / 2.0 - (np.pi / 4.0) * np.divide(ax, np.where(by == 0.0, 1.0, by)),
    )
    degenerate = (ax == 0.0) & (by == 0.0)
    px = np.where(degenerate, 0.0, r * np.cos(theta))
    py = np.where(degenerate, 0.0, r * np.sin(theta))
    return px, py


def _pack_cards(scene: Scene):
    n = len(scene.cards)
    c_center = np.zeros((n, 3))
    c_uax = np.zeros((n, 3))
    c_vax = np.zeros((n, 3))
    c_norm = np.zeros((n, 3))
    c_hw = np.zeros(n)
    c_hh = np.zeros(n)
    tex_off = np.zeros(n, dtype=np.int64)
    tex_w = np.zeros(n, dtype=np.int64)
    tex_h = np.zeros(n, dtype=np.int64)
    chunks = []
    offset = 0
    for i, card in enumerate(scene.cards):
        c_center[i] = card.center
        u, v = card.basis()
        c_uax[i] = u
        c_vax[i] = v
        c_norm[i] = card.normal / np.linalg.norm(card.normal)
        c_hw[i] = card.halfwidth
        c_hh[i] = card.halfheight
        th, tw = card.texture.shape[:2]
        tex_off[i] = offset
        tex_w[i] = tw
        tex_h[i] = th
        chunks.append(card.texture.reshape(-1, 4))
        offset += tw * th
    if chunks:
        tex_rgba = np.ascontiguousarray(np.concatenate(chunks, axis=0))
    else:
        tex_rgba = np.zeros((1, 4))
    return (c_center, c_uax, c_vax, c_norm, c_hw, c_hh,
            tex_off, tex_w, tex_h, tex_rgba)


def _camera_params(camera: ThinLensCamera) -> np.ndarray:
    right, up, fwd = camera.basis()
    c = camera.pupil_center
    zf = camera.focus_distance
    base = c + zf * fwd
    tanf = math.tan(camera.horizontal_fov / 2.0)
    aspect = camera.sensor_height_px / camera.sensor_width_px
    return np.array(
        [c[0], c[1], c[2], right[0], right[1], right[2],
         up[0], up[1], up[2], base[0], base[1], base[2],
         zf * tanf, zf * tanf * aspect]
    )


def _kernel():
    if active_backend() == "numba":
        from . import _kernels_nb
        return _kernels_nb.render_pass
    return _kernels_np.render_pass


def render(scene: Scene, camera: ThinLensCamera, opts: RenderOptions | None = None) -> Image:
    """Render the displayed scene as seen by the camera.

    Deterministic for fixed inputs and seed, on either backend.
    """
    opts = opts or RenderOptions()
    issues = validate_scene(scene) + validate_camera(camera)
    if opts.rays_per_pixel < 1:
        issues.append("rays_per_pixel must be at least 1")
    if not opts.point_radius > 0.0:
        issues.append("point_radius must be positive")
    if issues:
        raise ValueError("cannot render: " + "; ".join(issues))

    w = camera.sensor_width_px
    h = camera.sensor_height_px
    spp = opts.rays_per_pixel
    lens = scene.lens
    cam = _camera_params(camera)
    lens_p = np.array(
        [lens.plane_z, lens.depth1, lens.depth2, lens.pitch_x, lens.pitch_y,
         lens.aperture_halfwidth, lens.aperture_halfheight]
    )
    pj = scene.projector
    proj_p = np.array(
        [pj.aperture_center[0], pj.aperture_center[1], pj.aperture_center[2],
         pj.aperture_radius * pj.aperture_radius]
    )
    flags = np.array(
        [1 if opts.mode is LensMode.MICRO else 0,
         1 if opts.include_ghosts else 0],
        dtype=np.int64,
    )
    packed = _pack_cards(scene)
    if scene.points:
        p_pos = np.array([p.display_pos for p in scene.points])
        p_col = np.array([p.color for p in scene.points])
    else:
        p_pos = np.zeros((0, 3))
        p_col = np.zeros((0, 3))
    bg = np.asarray(scene.background, dtype=np.float64)

    accum = np.zeros((h, w, 3))
    count = np.zeros((h, w), dtype=np.int32)
    gw, gh = _strata(spp)
    pupil_r = camera.pupil_diameter / 2.0
    rng = np.random.default_rng(opts.seed)
    kernel = _kernel()
    for s in range(spp):
        ux = rng.random((h, w))
        uy = rng.random((h, w))
        pa = rng.random((h, w))
        pb = rng.random((h, w))
        if spp == 1:
            jx = np.full((h, w), 0.5)
            jy = np.full((h, w), 0.5)
            a, b = pa, pb
        else:
            sx = s % gw
            sy = s // gw
            jx = (sx + ux) / gw
            jy = (sy + uy) / gh
            a = (sx + pa) / gw
            b = (sy + pb) / gh
        px, py = _concentric_disk(a, b)
        px = px * pupil_r
        py = py * pupil_r
        kernel(
            accum, count, jx, jy, px, py, cam, lens_p, proj_p, flags,
            *packed, p_pos, p_col, opts.point_radius, bg,
        )

    # accum holds summed deltas from the background (see kernels)
    pixels = np.where(
        count[:, :, None] > 0,
        bg[None, None, :] + accum / np.maximum(count, 1)[:, :, None],
        bg[None, None, :],
    )
    return Image(w, h, pixels)


def sharpness(image: Image, region: tuple[int, int, int, int]) -> float:
    """Mean absolute luminance gradient over a pixel rectangle.

    `region` is (x, y, width, height); horizontal and vertical forward
    differences inside the region are pooled. Higher is sharper.
    """
    x, y, rw, rh = region
    if rw < 1 or rh < 1:
        raise ValueError("region must span at least one pixel")
    if x < 0 or y < 0 or x + rw > image.width or y + rh > image.height:
        raise ValueError("region exceeds image bounds")
    crop = image.pixels[y : y + rh, x : x + rw]
    lum = 0.2126 * crop[:, :, 0] + 0.7152 * crop[:, :, 1] + 0.0722 * crop[:, :, 2]
    gh_ = np.abs(np.diff(lum, axis=1))
    gv = np.abs(np.diff(lum, axis=0))
    total = gh_.size + gv.size
    if total == 0:
        return 0.0
    return float((gh_.sum() + gv.sum()) / total)
