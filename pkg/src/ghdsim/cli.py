"""Command-line interface.

Exit codes: 0 success, 1 scene/usage diagnostics, 2 I/O failure.
All diagnostics go to stderr; reports and results go to stdout or files.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import ppm
from .geometry import Ray, vec3
from .lens import trace_ideal, trace_micro, visual_window
from .lightfield import (
    BudgetConfig, PlanePatch, PupilSet, TwoPlaneParam, reduction_report,
)
from .render import LensMode, RenderOptions, render
from .scenefile import load_scene
from .experiments import run_fig4, run_focus_sweep, run_pitch_sweep

EXIT_OK = 0
EXIT_DIAGNOSTICS = 1
EXIT_IO = 2


def _fmt(x: float) -> str:
    return repr(float(x))


def _load(path: str):
    try:
        doc, diags = load_scene(path)
    except OSError as exc:
        print(f"error: cannot read scene file: {exc}", file=sys.stderr)
        return None, EXIT_IO
    if doc is None:
        for d in diags:
            print(f"{path}: {d}", file=sys.stderr)
        return None, EXIT_DIAGNOSTICS
    return doc, EXIT_OK


def _options(args) -> RenderOptions:
    return RenderOptions(
        mode=LensMode.MICRO if getattr(args, "mode", "ideal") == "micro" else LensMode.IDEAL,
        include_ghosts=bool(getattr(args, "ghosts", False)),
        rays_per_pixel=getattr(args, "spp", 16),
        seed=getattr(args, "seed", 0),
    )


def _write_image(path: Path, image) -> int:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        ppm.write_ppm(path, image.pixels)
    except OSError as exc:
        print(f"error: cannot write {path}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _write_text(path: Path, text: str) -> int:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        print(f"error: cannot write {path}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _parse_triplet(text: str, what: str):
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"{what} needs 3 comma-separated numbers")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _cmd_render(args) -> int:
    doc, code = _load(args.scene)
    if doc is None:
        return code
    image = render(doc.scene, doc.camera, _options(args))
    code = _write_image(Path(args.out), image)
    if code == EXIT_OK:
        print(f"wrote {args.out}")
    return code


def _cmd_window(args) -> int:
    doc, code = _load(args.scene)
    if doc is None:
        return code
    w = visual_window(
        doc.scene.projector.aperture_center,
        doc.scene.projector.aperture_radius,
        doc.scene.lens,
    )
    print(f"center = {_fmt(w.center[0])}, {_fmt(w.center[1])}, {_fmt(w.center[2])}")
    print(f"radius = {_fmt(w.radius)}")
    print(f"normal = {_fmt(w.normal[0])}, {_fmt(w.normal[1])}, {_fmt(w.normal[2])}")
    return EXIT_OK


def _cmd_trace(args) -> int:
    doc, code = _load(args.scene)
    if doc is None:
        return code
    try:
        ray = Ray(vec3(*args.origin), vec3(*args.dir))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIAGNOSTICS
    result = trace_micro(ray, doc.scene.lens)
    if result is None:
        print("miss: ray does not pass through the lens aperture")
        return EXIT_OK
    n1, n2 = result.reflections
    o, d = result.ray.origin, result.ray.dir
    print(f"class = {result.ray_class.value}")
    print(f"reflections = {n1}, {n2}")
    print(f"exit_origin = {_fmt(o[0])}, {_fmt(o[1])}, {_fmt(o[2])}")
    print(f"exit_dir = {_fmt(d[0])}, {_fmt(d[1])}, {_fmt(d[2])}")
    ideal = trace_ideal(ray, doc.scene.lens)
    if ideal is not None:
        print(
            f"ideal_exit_dir = {_fmt(ideal.dir[0])}, {_fmt(ideal.dir[1])}, "
            f"{_fmt(ideal.dir[2])}"
        )
    return EXIT_OK


def _budget_csv(report) -> str:
    return (
        "full_samples,pupil_samples,full_bytes,pupil_bytes,ratio\n"
        f"{report.full_samples},{report.pupil_samples},"
        f"{report.full_bytes},{report.pupil_bytes},{_fmt(report.ratio)}\n"
    )


def _cmd_budget(args) -> int:
    z = args.separation
    uv = PlanePatch(
        vec3(-args.uv_width / 2.0, -args.uv_height / 2.0, z),
        vec3(1, 0, 0), vec3(0, 1, 0), args.uv_width, args.uv_height,
    )
    st = PlanePatch(
        vec3(-args.st_width / 2.0, -args.st_height / 2.0, 0.0),
        vec3(1, 0, 0), vec3(0, 1, 0), args.st_width, args.st_height,
    )
    param = TwoPlaneParam(uv, st)
    # pupil coordinates are given in st plane-local (s, t); convert to world
    disks = []
    for cs, ct, r in args.pupil:
        center = st.origin + cs * st.u_axis + ct * st.v_axis
        disks.append((center, r))
    try:
        pupils = PupilSet(disks)
        report = reduction_report(
            BudgetConfig(args.nu, args.nv, args.ns, args.nt, args.bytes_per_sample),
            param, pupils,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIAGNOSTICS
    rows = [
        ("full_samples", str(report.full_samples)),
        ("pupil_samples", str(report.pupil_samples)),
        ("full_bytes", str(report.full_bytes)),
        ("pupil_bytes", str(report.pupil_bytes)),
        ("ratio", _fmt(report.ratio)),
    ]
    width = max(len(k) for k, _ in rows)
    for k, v in rows:
        print(f"{k.ljust(width)}  {v}")
    if args.csv:
        return _write_text(Path(args.csv), _budget_csv(report))
    return EXIT_OK


def _cmd_fig4(args) -> int:
    doc, code = _load(args.scene)
    if doc is None:
        return code
    result = run_fig4(doc, baseline=args.baseline, opts=_options(args))
    out = Path(args.out_dir)
    for name, image in (("fig4_view_a.ppm", result.image_a),
                        ("fig4_view_b.ppm", result.image_b)):
        code = _write_image(out / name, image)
        if code != EXIT_OK:
            return code
    lines = ["card,distance_m,analytic_shift_px,measured_shift_px"]
    for i, s in enumerate(result.shifts):
        lines.append(
            f"{i},{_fmt(s.distance_m)},{_fmt(s.analytic_px)},{_fmt(s.measured_px)}"
        )
    code = _write_text(out / "fig4_parallax.csv", "\n".join(lines) + "\n")
    if code != EXIT_OK:
        return code
    print(f"eye A = {_fmt(result.eye_a[0])}, {_fmt(result.eye_a[1])}, {_fmt(result.eye_a[2])}")
    print(f"eye B = {_fmt(result.eye_b[0])}, {_fmt(result.eye_b[1])}, {_fmt(result.eye_b[2])}")
    print(f"exposed far-card pixels between views: {result.exposed_pixels}")
    print(f"wrote {out / 'fig4_view_a.ppm'}, {out / 'fig4_view_b.ppm'}, "
          f"{out / 'fig4_parallax.csv'}")
    return EXIT_OK


def _cmd_fig6(args) -> int:
    doc, code = _load(args.scene)
    if doc is None:
        return code
    if not doc.scene.cards:
        print("error: fig6 needs at least one card in the scene", file=sys.stderr)
        return EXIT_DIAGNOSTICS
    result = run_focus_sweep(
        doc, focus_min=args.focus_min, focus_max=args.focus_max,
        focus_step=args.focus_step, opts=_options(args),
    )
    out = Path(args.out_dir)
    for i, frame in enumerate(result.frames):
        code = _write_image(out / f"fig6_frame_{i:03d}.ppm", frame)
        if code != EXIT_OK:
            return code
    lines = ["focus_distance_m,sharpness"]
    for zf, s in zip(result.focus_distances, result.sharpness_values):
        lines.append(f"{_fmt(zf)},{_fmt(s)}")
    code = _write_text(out / "fig6_sharpness.csv", "\n".join(lines) + "\n")
    if code != EXIT_OK:
        return code
    print(f"sharpest focus distance: {_fmt(result.argmax_focus())} m")
    print(f"wrote {len(result.frames)} frames and {out / 'fig6_sharpness.csv'}")
    return EXIT_OK


def _cmd_sweep_pitch(args) -> int:
    doc, code = _load(args.scene)
    if doc is None:
        return code
    scales = tuple(float(s) for s in args.scales.split(","))
    rows = run_pitch_sweep(
        doc, scales=scales, direction=args.direction,
        n_samples=args.samples, opts=_options(args),
    )
    lines = ["scale,pitch_x,pitch_y,depth1,depth2,imaging_fraction,mean_abs_diff"]
    for r in rows:
        lines.append(
            f"{_fmt(r.scale)},{_fmt(r.pitch_x)},{_fmt(r.pitch_y)},"
            f"{_fmt(r.depth1)},{_fmt(r.depth2)},"
            f"{_fmt(r.imaging_fraction)},{_fmt(r.mean_abs_diff)}"
        )
    text = "\n".join(lines) + "\n"
    print(text, end="")
    if args.out:
        return _write_text(Path(args.out), text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ghdsim",
        description="Geometric-optics simulator of a strip-mirror holographic display",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_render_opts(p, spp_default=16):
        p.add_argument("--mode", choices=("ideal", "micro"), default="ideal")
        p.add_argument("--ghosts", action="store_true",
                       help="keep ghost/transmitted light in micro mode")
        p.add_argument("--spp", type=int, default=spp_default,
                       help="rays per pixel")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("render", help="render the scene to a PPM image")
    p.add_argument("scene")
    p.add_argument("--out", default="render.ppm")
    add_render_opts(p)
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("window", help="print the visual window")
    p.add_argument("scene")
    p.set_defaults(func=_cmd_window)

    p = sub.add_parser("trace", help="trace one ray through the mirror lens")
    p.add_argument("scene")
    p.add_argument("--from", dest="origin", required=True,
                   type=lambda s: _parse_triplet(s, "--from"))
    p.add_argument("--dir", dest="dir", required=True,
                   type=lambda s: _parse_triplet(s, "--dir"))
    p.set_defaults(func=_cmd_trace)

    p = sub.add_parser("budget", help="light-field sample budget report")
    p.add_argument("--nu", type=int, required=True)
    p.add_argument("--nv", type=int, required=True)
    p.add_argument("--ns", type=int, required=True)
    p.add_argument("--nt", type=int, required=True)
    p.add_argument("--pupil", action="append", required=True,
                   type=lambda s: _parse_triplet(s, "--pupil"),
                   metavar="S,T,R", help="pupil disk in st plane-local coords")
    p.add_argument("--bytes-per-sample", type=int, default=3)
    p.add_argument("--st-width", type=float, default=0.3)
    p.add_argument("--st-height", type=float, default=0.2)
    p.add_argument("--uv-width", type=float, default=0.3)
    p.add_argument("--uv-height", type=float, default=0.2)
    p.add_argument("--separation", type=float, default=1.0)
    p.add_argument("--csv", default=None, help="also write the report as CSV")
    p.set_defaults(func=_cmd_budget)

    p = sub.add_parser("fig4", help="two-viewpoint occlusion/parallax preset")
    p.add_argument("scene")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--baseline", type=float, default=0.03,
                   help="eye separation in metres")
    add_render_opts(p)
    p.set_defaults(func=_cmd_fig4)

    p = sub.add_parser("fig6", help="focus sweep preset with sharpness CSV")
    p.add_argument("scene")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--focus-min", type=float, default=0.5)
    p.add_argument("--focus-max", type=float, default=8.0)
    p.add_argument("--focus-step", type=float, default=0.25)
    add_render_opts(p)
    p.set_defaults(func=_cmd_fig6)

    p = sub.add_parser("sweep-pitch",
                       help="imaging fraction and ideal/micro difference vs pitch")
    p.add_argument("scene")
    p.add_argument("--scales", default="1,0.5,0.25")
    p.add_argument("--direction", default=(0.08, 0.06, -1.0),
                   type=lambda s: _parse_triplet(s, "--direction"))
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--out", default=None)
    add_render_opts(p, spp_default=4)
    p.set_defaults(func=_cmd_sweep_pitch)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
