import math
from dataclasses import replace

import numpy as np
import pytest

from ghdsim.backend import set_backend
from ghdsim.camera import ThinLensCamera
from ghdsim.geometry import vec3
from ghdsim.lens import LensSpec, visual_window
from ghdsim.render import Image, LensMode, RenderOptions, render, sharpness
from ghdsim.scene import Card, Projector, Scene, ScenePoint, solid_texture


@pytest.fixture(autouse=True)
def reset_backend():
    yield
    set_backend(None)


def make_camera(w=64, h=48, **kwargs):
    defaults = dict(
        pupil_center=vec3(0, 0, 1.0),
        pupil_diameter=0.004,
        focal_length=0.017,
        focus_distance=1.5,
        sensor_width_px=w,
        sensor_height_px=h,
        horizontal_fov=0.3,
        look_dir=vec3(0, 0, -1),
        up=vec3(0, 1, 0),
    )
    defaults.update(kwargs)
    return ThinLensCamera(**defaults)


def layered_scene():
    return Scene(
        lens=LensSpec(),
        projector=Projector(vec3(0, 0, -1.0), 0.025),
        cards=[
            Card(vec3(-0.01, 0.005, 0.2), 0.015, 0.012, vec3(0, 0, 1),
                 solid_texture((0.9, 0.1, 0.1))),
            Card(vec3(0.01, -0.01, -0.3), 0.04, 0.03, vec3(0, 0, 1),
                 solid_texture((0.1, 0.9, 0.1))),
            Card(vec3(0, 0, -1.0), 0.08, 0.06, vec3(0, 0, 1),
                 solid_texture((0.1, 0.1, 0.9))),
        ],
        points=[ScenePoint(vec3(0.0, 0.025, -0.1), vec3(1.0, 1.0, 0.2))],
        background=vec3(0.02, 0.02, 0.05),
    )


def concentric(a, b):
    ax, by = 2.0 * a - 1.0, 2.0 * b - 1.0
    if ax == 0.0 and by == 0.0:
        return 0.0, 0.0
    if abs(ax) > abs(by):
        r, theta = ax, (math.pi / 4.0) * (by / ax)
    else:
        r, theta = by, math.pi / 2.0 - (math.pi / 4.0) * (ax / by)
    return r * math.cos(theta), r * math.sin(theta)


def oracle_render(scene, cam, seed, micro=False):
    """Slow everything-in-python renderer for spp=1: same documented
    sampling scheme, all-intersections sort per pixel. In micro mode the
    device trace goes through the scalar trace_micro path, making this an
    independent check of the compiled kernels."""
    w, h = cam.sensor_width_px, cam.sensor_height_px
    rng = np.random.default_rng(seed)
    rng.random((h, w))  # ux, unused at spp=1
    rng.random((h, w))  # uy
    pa = rng.random((h, w))
    pb = rng.random((h, w))
    right, up, fwd = cam.basis()
    zf = cam.focus_distance
    base = cam.pupil_center + zf * fwd
    tanf = math.tan(cam.horizontal_fov / 2.0)
    aspect = h / w
    lens = scene.lens
    pj = scene.projector
    out = np.zeros((h, w, 3))
    for i in range(h):
        for j in range(w):
            px, py = concentric(pa[i, j], pb[i, j])
            px *= cam.pupil_diameter / 2.0
            py *= cam.pupil_diameter / 2.0
            o = cam.pupil_center + px * right + py * up
            u = 2.0 * (j + 0.5) / w - 1.0
            v = 1.0 - 2.0 * (i + 0.5) / h
            f = base + zf * tanf * u * right + zf * tanf * aspect * v * up
            d = f - o
            # normalize exactly as the kernels do (multiply by 1/norm)
            d = d * (1.0 / math.sqrt(d[0] ** 2 + d[1] ** 2 + d[2] ** 2))
            if micro:
                out[i, j] = oracle_ray_micro(scene, lens, pj, o, d)
            else:
                out[i, j] = oracle_ray(scene, lens, pj, o, d)
    return out


def oracle_content(scene, o, d, v0, hdir):
    """Nearest opaque hit along the visibility line, ordered by distance
    from the eye; returns the pixel color (background-delta averaged)."""
    bg = scene.background
    hits = []
    for card in scene.cards:
        denom = hdir[2] * card.normal[2]  # test cards are axis-aligned
        if abs(denom) <= 1e-12:
            continue
        tt = (card.center[2] - v0[2]) / hdir[2]
        p = v0 + tt * hdir
        lu, lv = p[0] - card.center[0], p[1] - card.center[1]
        if abs(lu) > card.halfwidth or abs(lv) > card.halfheight:
            continue
        t_eye = float(np.dot(p - o, d))
        if t_eye <= 1e-9:
            continue
        th, tw = card.texture.shape[:2]
        ti = min(tw - 1, max(0, int((lu + card.halfwidth)
                                    / (2 * card.halfwidth) * tw)))
        tj = min(th - 1, max(0, int((card.halfheight - lv)
                                    / (2 * card.halfheight) * th)))
        texel = card.texture[tj, ti]
        if texel[3] >= 0.5:
            hits.append((t_eye, texel[:3]))
    for p in scene.points:
        oc = v0 - p.display_pos
        b = float(np.dot(oc, hdir))
        c = float(np.dot(oc, oc)) - 0.002 ** 2
        disc = b * b - c
        if disc < 0:
            continue
        for root in (-b - math.sqrt(disc), -b + math.sqrt(disc)):
            x = v0 + root * hdir
            t_eye = float(np.dot(x - o, d))
            if t_eye > 1e-9:
                hits.append((t_eye, p.color))
    hits.sort(key=lambda x: x[0])
    if not hits:
        return bg
    return bg + (hits[0][1] - bg)


def oracle_ray_micro(scene, lens, pj, o, d):
    from ghdsim.geometry import Ray
    from ghdsim.lens import RayClass, trace_micro

    bg = scene.background
    if d[2] >= 0:
        return bg
    res = trace_micro(Ray(o, d), lens)
    if res is None:
        return bg
    if res.ray_class is not RayClass.IMAGING:
        return bg  # dropped sample; at spp=1 the pixel falls back to bg
    c, g = res.ray.origin, res.ray.dir
    s = (pj.aperture_center[2] - c[2]) / g[2]
    q = c + s * g
    if (q[0] - pj.aperture_center[0]) ** 2 + (q[1] - pj.aperture_center[1]) ** 2 \
            > pj.aperture_radius ** 2:
        return bg
    v0 = np.array([c[0], c[1], 2.0 * lens.plane_z - c[2]])
    hdir = np.array([g[0], g[1], -g[2]])
    return oracle_content(scene, o, d, v0, hdir)


def oracle_ray(scene, lens, pj, o, d):
    bg = scene.background
    if d[2] >= 0:
        return bg
    t_hit = (lens.plane_z - o[2]) / d[2]
    if t_hit <= 0:
        return bg
    hit = o + t_hit * d
    if abs(hit[0]) > lens.aperture_halfwidth or abs(hit[1]) > lens.aperture_halfheight:
        return bg
    g = np.array([-d[0], -d[1], d[2]])
    s = (pj.aperture_center[2] - lens.plane_z) / g[2]
    q = hit + s * g
    if (q[0] - pj.aperture_center[0]) ** 2 + (q[1] - pj.aperture_center[1]) ** 2 \
            > pj.aperture_radius ** 2:
        return bg
    hits = []
    for card in scene.cards:
        tt = (card.center[2] - o[2]) / d[2]
        if tt <= 1e-9:
            continue
        p = o + tt * d
        lu, lv = p[0] - card.center[0], p[1] - card.center[1]
        if abs(lu) <= card.halfwidth and abs(lv) <= card.halfheight:
            th, tw = card.texture.shape[:2]
            ti = min(tw - 1, max(0, int((lu + card.halfwidth)
                                        / (2 * card.halfwidth) * tw)))
            tj = min(th - 1, max(0, int((card.halfheight - lv)
                                        / (2 * card.halfheight) * th)))
            texel = card.texture[tj, ti]
            if texel[3] >= 0.5:
                hits.append((tt, texel[:3]))
    for p in scene.points:
        oc = o - p.display_pos
        b = float(np.dot(oc, d))
        c = float(np.dot(oc, oc)) - 0.002 ** 2
        disc = b * b - c
        if disc < 0:
            continue
        for root in (-b - math.sqrt(disc), -b + math.sqrt(disc)):
            if root > 1e-9:
                hits.append((root, p.color))
    hits.sort(key=lambda x: x[0])
    if not hits:
        return bg
    # the renderer averages deltas from the background
    return bg + (hits[0][1] - bg)


class TestGating:
    def test_outside_window_is_exactly_background(self):
        scene = layered_scene()
        w = visual_window(scene.projector.aperture_center,
                          scene.projector.aperture_radius, scene.lens)
        off = w.radius + 0.002 + 0.001
        cam = make_camera(pupil_center=w.center + vec3(off, 0, 0))
        img = render(scene, cam, RenderOptions(rays_per_pixel=2, seed=0))
        assert np.all(img.pixels == scene.background)

    def test_inside_window_shows_scene(self):
        scene = layered_scene()
        img = render(scene, make_camera(), RenderOptions(rays_per_pixel=2, seed=0))
        differs = np.any(img.pixels != scene.background, axis=2)
        assert differs.mean() > 0.01

    def test_partial_window_overlap_dims_not_blanks(self):
        scene = layered_scene()
        w = visual_window(scene.projector.aperture_center,
                          scene.projector.aperture_radius, scene.lens)
        cam = make_camera(pupil_center=w.center + vec3(w.radius, 0, 0),
                          pupil_diameter=0.01)
        img = render(scene, cam, RenderOptions(rays_per_pixel=8, seed=0))
        differs = np.any(img.pixels != scene.background, axis=2)
        assert 0 < differs.mean() < 1


class TestOcclusion:
    def test_matches_all_intersections_oracle(self):
        scene = layered_scene()
        cam = make_camera()
        opts = RenderOptions(rays_per_pixel=1, seed=11)
        img = render(scene, cam, opts)
        expected = oracle_render(scene, cam, seed=11)
        assert np.array_equal(img.pixels, expected)

    def test_micro_mode_matches_scalar_trace_oracle(self):
        # the compiled kernels' channel folds against the scalar
        # trace_micro path, pixel for pixel; oblique steered geometry so
        # a large share of rays take the imaging path
        lens = LensSpec(pitch_x=0.006, pitch_y=0.006, depth1=0.024,
                        depth2=0.024)
        scene = Scene(
            lens=lens,
            projector=Projector(vec3(0.3, 0.2, -1.0), 0.025),
            cards=[Card(vec3(-0.6, -0.4, -2.0), 0.4, 0.35, vec3(0, 0, 1),
                        solid_texture((0.9, 0.8, 0.2)))],
            points=[ScenePoint(vec3(-0.15, -0.1, -0.5), vec3(1, 1, 1))],
            background=vec3(0.01, 0.01, 0.02),
        )
        cam = make_camera(pupil_center=vec3(0.3, 0.2, 1.0),
                          look_dir=vec3(-0.3, -0.2, -1.0),
                          horizontal_fov=0.2, focus_distance=2.0)
        opts = RenderOptions(mode=LensMode.MICRO, rays_per_pixel=1, seed=4)
        img = render(scene, cam, opts)
        expected = oracle_render(scene, cam, seed=4, micro=True)
        assert np.array_equal(img.pixels, expected)
        # the comparison must exercise real content, not just background
        assert np.mean(np.any(img.pixels != scene.background, axis=2)) > 0.3

    def test_tilted_card_renders_at_projected_position(self):
        # non-axis-aligned normal: the chief ray through the projected
        # center pixel must land on the card
        normal = np.array([0.3, 0.2, 1.0])
        normal /= np.linalg.norm(normal)
        card = Card(vec3(0.0, 0.0, 0.2), 0.02, 0.016, normal,
                    solid_texture((0.2, 0.9, 0.4)))
        scene = Scene(lens=LensSpec(),
                      projector=Projector(vec3(0, 0, -1.0), 0.025),
                      cards=[card])
        cam = make_camera(pupil_diameter=1e-4)
        img = render(scene, cam, RenderOptions(rays_per_pixel=1, seed=0))
        from ghdsim.camera import project_point
        col, row = project_point(cam, card.center)
        pixel = img.pixels[int(round(row)), int(round(col))]
        assert np.allclose(pixel, [0.2, 0.9, 0.4], atol=1e-9)

    def test_point_occluded_by_nearer_card(self):
        # the card sits between the eye and the point along the axis
        scene = Scene(
            lens=LensSpec(),
            projector=Projector(vec3(0, 0, -1.0), 0.025),
            cards=[Card(vec3(0, 0, 0.2), 0.02, 0.02, vec3(0, 0, 1),
                        solid_texture((0.8, 0.1, 0.1)))],
            points=[ScenePoint(vec3(0, 0, -0.1), vec3(0.1, 0.1, 1.0))],
        )
        cam = make_camera(pupil_diameter=1e-4)
        opts = RenderOptions(rays_per_pixel=1, seed=0, point_radius=0.008)
        img = render(scene, cam, opts)
        center = img.pixels[24, 32]
        assert np.allclose(center, [0.8, 0.1, 0.1], atol=1e-9)
        # removing the card exposes the point
        bare = replace(scene, cards=[])
        img2 = render(bare, cam, opts)
        assert np.allclose(img2.pixels[24, 32], [0.1, 0.1, 1.0], atol=1e-9)

    def test_transparent_texels_pass_through(self):
        scene = layered_scene()
        # punch a hole in the near green card: the far blue card shows
        tex = np.ones((1, 1, 4))
        tex[0, 0] = [0.1, 0.9, 0.1, 0.0]
        holed = replace(scene.cards[1], texture=tex)
        scene_holed = replace(scene, cards=[holed, scene.cards[2]])
        cam = make_camera()
        img = render(scene_holed, cam, RenderOptions(rays_per_pixel=1, seed=2))
        center = img.pixels[24, 32]
        assert np.allclose(center, [0.1, 0.1, 0.9])


class TestDeterminism:
    def test_same_seed_bit_identical(self):
        scene = layered_scene()
        cam = make_camera()
        opts = RenderOptions(rays_per_pixel=4, seed=5)
        a = render(scene, cam, opts)
        b = render(scene, cam, opts)
        assert np.array_equal(a.pixels, b.pixels)

    def test_different_seed_differs(self):
        scene = layered_scene()
        cam = make_camera()
        a = render(scene, cam, RenderOptions(rays_per_pixel=4, seed=5))
        b = render(scene, cam, RenderOptions(rays_per_pixel=4, seed=6))
        assert not np.array_equal(a.pixels, b.pixels)

    @pytest.mark.parametrize("mode", [LensMode.IDEAL, LensMode.MICRO])
    def test_backends_produce_identical_images(self, mode):
        scene = layered_scene()
        cam = make_camera()
        opts = RenderOptions(mode=mode, rays_per_pixel=4, seed=9)
        set_backend("numpy")
        a = render(scene, cam, opts)
        set_backend("numba")
        b = render(scene, cam, opts)
        assert np.array_equal(a.pixels, b.pixels)


class TestMicroMode:
    def test_micro_approaches_ideal_as_pitch_shrinks(self):
        scene = layered_scene()
        cam = make_camera(w=96, h=72, horizontal_fov=0.1)
        ideal = render(scene, cam, RenderOptions(rays_per_pixel=8, seed=1))
        diffs = []
        for s in (1.0, 0.5, 0.25):
            lens_s = replace(scene.lens, pitch_x=scene.lens.pitch_x * s,
                             pitch_y=scene.lens.pitch_y * s)
            micro = render(replace(scene, lens=lens_s), cam,
                           RenderOptions(mode=LensMode.MICRO, rays_per_pixel=8,
                                         seed=1))
            diffs.append(float(np.mean(np.abs(ideal.pixels - micro.pixels))))
        assert diffs[0] > diffs[1] > diffs[2]

    def test_ghost_flag_changes_image(self):
        scene = layered_scene()
        cam = make_camera()
        base = RenderOptions(mode=LensMode.MICRO, rays_per_pixel=4, seed=0)
        without = render(scene, cam, base)
        with_ghosts = render(scene, cam, replace(base, include_ghosts=True))
        assert not np.array_equal(without.pixels, with_ghosts.pixels)

    def test_gridding_appears_when_focused_on_lens_plane(self):
        # oblique viewing through a steered window: slopes ~0.3 leave a
        # fraction of each channel non-imaging, so the mirror lattice shows
        # as stripes when the camera focuses on the device plane and washes
        # out when it focuses on the card behind
        eye = vec3(0.3, 0.2, 1.0)
        lens = LensSpec(pitch_x=0.006, pitch_y=0.006, depth1=0.024,
                        depth2=0.024)
        scene = Scene(
            lens=lens,
            projector=Projector(vec3(0.3, 0.2, -1.0), 0.025),
            cards=[Card(vec3(-0.6, -0.4, -2.0), 0.4, 0.35, vec3(0, 0, 1),
                        solid_texture((0.9, 0.8, 0.2)))],
            background=vec3(0, 0, 0),
        )
        look = vec3(-0.3, -0.2, -1.0)
        opts = RenderOptions(mode=LensMode.MICRO, rays_per_pixel=8, seed=0)
        dist_lens = float(np.linalg.norm(look))
        near = render(scene, make_camera(w=96, h=72, pupil_center=eye,
                                         look_dir=look, horizontal_fov=0.1,
                                         focus_distance=dist_lens), opts)
        far = render(scene, make_camera(w=96, h=72, pupil_center=eye,
                                        look_dir=look, horizontal_fov=0.1,
                                        focus_distance=3.0), opts)
        region = (24, 20, 48, 32)
        assert sharpness(near, region) > 2.0 * sharpness(far, region)


class TestEdgeGeometry:
    def test_axial_translation_invariance(self):
        # shifting the whole bench along z (nonzero plane_z) must not
        # change the image beyond float noise
        scene = layered_scene()
        cam = make_camera()
        opts = RenderOptions(rays_per_pixel=2, seed=1)
        base = render(scene, cam, opts)
        dz = 0.15
        shifted = Scene(
            lens=replace(scene.lens, plane_z=scene.lens.plane_z + dz),
            projector=Projector(
                scene.projector.aperture_center + vec3(0, 0, dz),
                scene.projector.aperture_radius),
            cards=[replace(c, center=c.center + vec3(0, 0, dz))
                   for c in scene.cards],
            points=[ScenePoint(p.display_pos + vec3(0, 0, dz), p.color)
                    for p in scene.points],
            background=scene.background,
        )
        cam2 = make_camera(pupil_center=vec3(0, 0, 1.0 + dz))
        moved = render(shifted, cam2, opts)
        assert np.max(np.abs(moved.pixels - base.pixels)) < 1e-9

    def test_empty_scene_renders_background(self):
        scene = Scene(lens=LensSpec(),
                      projector=Projector(vec3(0, 0, -1.0), 0.025),
                      background=vec3(0.3, 0.1, 0.2))
        img = render(scene, make_camera(), RenderOptions(rays_per_pixel=2, seed=0))
        assert np.all(img.pixels == scene.background)

    @pytest.mark.parametrize("spp", [1, 3, 5, 6])
    def test_non_square_sample_counts(self, spp):
        scene = layered_scene()
        opts = RenderOptions(rays_per_pixel=spp, seed=2)
        a = render(scene, make_camera(), opts)
        b = render(scene, make_camera(), opts)
        assert np.array_equal(a.pixels, b.pixels)


class TestValidation:
    def test_invalid_scene_raises_before_rendering(self):
        scene = layered_scene()
        bad = replace(scene, projector=Projector(vec3(0, 0, 0.5), 0.02))
        with pytest.raises(ValueError, match="projector"):
            render(bad, make_camera(), RenderOptions())

    def test_invalid_camera_raises(self):
        with pytest.raises(ValueError, match="focus_distance"):
            render(layered_scene(), make_camera(focus_distance=0.001),
                   RenderOptions())

    def test_bad_options_raise(self):
        with pytest.raises(ValueError, match="rays_per_pixel"):
            render(layered_scene(), make_camera(),
                   RenderOptions(rays_per_pixel=0))

    def test_image_shape_checked(self):
        with pytest.raises(ValueError):
            Image(4, 4, np.zeros((3, 4, 3)))


class TestSharpness:
    def test_uniform_image_is_zero(self):
        img = Image(8, 6, np.full((6, 8, 3), 0.3))
        assert sharpness(img, (0, 0, 8, 6)) == 0.0

    def test_single_white_pixel_analytic(self):
        px = np.zeros((5, 5, 3))
        px[2, 2] = 1.0
        img = Image(5, 5, px)
        n = 5 * 4 + 4 * 5
        assert sharpness(img, (0, 0, 5, 5)) == pytest.approx(4.0 / n)

    def test_box_blur_never_sharper(self, rng):
        px = rng.random((20, 30, 3))
        img = Image(30, 20, px)
        padded = np.pad(px, ((1, 1), (1, 1), (0, 0)), mode="edge")
        blurred = sum(
            padded[1 + dy : 21 + dy, 1 + dx : 31 + dx]
            for dy in (-1, 0, 1) for dx in (-1, 0, 1)
        ) / 9.0
        assert sharpness(Image(30, 20, blurred), (0, 0, 30, 20)) \
            <= sharpness(img, (0, 0, 30, 20))

    def test_region_bounds_checked(self):
        img = Image(8, 6, np.zeros((6, 8, 3)))
        with pytest.raises(ValueError):
            sharpness(img, (0, 0, 0, 6))
        with pytest.raises(ValueError):
            sharpness(img, (4, 0, 8, 6))
        with pytest.raises(ValueError):
            sharpness(img, (-1, 0, 4, 4))
