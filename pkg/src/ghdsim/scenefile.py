"""Scene description file parsing and serialization.

The format is flat sections of key = value lines:

    lens {
      pitch_x = 0.0005
      pitch_y = 0.0005
      depth1 = 0.002
      depth2 = 0.002
      aperture_w = 0.2      # full width, metres
      aperture_h = 0.15
      plane_z = 0.0
    }
    projector { center = 0, 0, -1.0   radius-style keys one per line }
    camera { ... all thin-lens camera fields ... }
    point { pos = x, y, z   color = r, g, b }      # repeatable
    card { center/halfwidth/halfheight/normal + texture or color }
    background { rgb = r, g, b }

'#' starts a comment. Vectors are comma separated. Parsing is total:
any input, including arbitrary bytes, yields either a validated scene
or a list of line-numbered diagnostics, never an exception.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import ppm
from .camera import ThinLensCamera, validate_camera
from .lens import LensSpec
from .scene import Card, Projector, Scene, ScenePoint, solid_texture, validate_scene


@dataclass
class Diagnostic:
    line: int | None
    message: str

    def __str__(self) -> str:
        if self.line is None:
            return f"scene: {self.message}"
        return f"line {self.line}: {self.message}"


@dataclass
class SceneDocument:
    """A parsed scene file: the display content plus the viewing camera."""

    scene: Scene
    camera: ThinLensCamera


_SECTION_KEYS = {
    "lens": {"pitch_x", "pitch_y", "depth1", "depth2",
             "aperture_w", "aperture_h", "plane_z"},
    "projector": {"center", "radius"},
    "camera": {"pupil_center", "pupil_diameter", "focal_length",
               "focus_distance", "sensor_width_px", "sensor_height_px",
               "horizontal_fov", "look_dir", "up"},
    "point": {"pos", "color"},
    "card": {"center", "halfwidth", "halfheight", "normal", "texture", "color"},
    "background": {"rgb"},
}
_UNIQUE_SECTIONS = {"lens", "projector", "camera", "background"}


def _tokenize(text: str):
    """Yield (line_no, section_name | None, key, value) entries plus errors."""
    entries = []
    errors = []
    current: str | None = None
    opened_at = 0
    for line_no, raw in enumerate(text.splitlines(), start=1):
        hash_pos = raw.find("#")
        if hash_pos >= 0:
            raw = raw[:hash_pos]
        line = raw.strip()
        if not line:
            continue
        if current is None:
            if line.endswith("{"):
                name = line[:-1].strip()
                if name not in _SECTION_KEYS:
                    errors.append(Diagnostic(line_no, f"unknown section '{name}'"))
                    current = "?"  # consume the body anyway
                else:
                    current = name
                opened_at = line_no
                entries.append((line_no, current, None, None))
            else:
                errors.append(
                    Diagnostic(line_no, f"expected a section header, got '{line}'")
                )
        else:
            if line == "}":
                current = None
            elif "=" in line:
                key, _, value = line.partition("=")
                entries.append((line_no, current, key.strip(), value.strip()))
            else:
                errors.append(
                    Diagnostic(line_no, f"expected 'key = value' or '}}', got '{line}'")
                )
    if current is not None:
        errors.append(Diagnostic(opened_at, "section is never closed with '}'"))
    return entries, errors


class _Section:
    def __init__(self, name: str, line: int):
        self.name = name
        self.line = line
        self.fields: dict[str, tuple[int, str]] = {}


def _collect_sections(entries, errors):
    sections: list[_Section] = []
    for line_no, section, key, value in entries:
        if key is None:
            sections.append(_Section(section, line_no))
            continue
        sec = sections[-1]
        if sec.name == "?":
            continue
        if key not in _SECTION_KEYS[sec.name]:
            errors.append(
                Diagnostic(line_no, f"unknown key '{key}' in section '{sec.name}'")
            )
            continue
        if key in sec.fields:
            errors.append(
                Diagnostic(line_no, f"duplicate key '{key}' in section '{sec.name}'")
            )
            continue
        sec.fields[key] = (line_no, value)
    return [s for s in sections if s.name != "?"]


class _FieldReader:
    """Typed access to one section's fields, recording diagnostics."""

    def __init__(self, section: _Section, errors: list[Diagnostic]):
        self.sec = section
        self.errors = errors

    def has(self, key: str) -> bool:
        return key in self.sec.fields

    def _raw(self, key: str):
        if key not in self.sec.fields:
            self.errors.append(
                Diagnostic(
                    self.sec.line,
                    f"section '{self.sec.name}' is missing required key '{key}'",
                )
            )
            return None
        return self.sec.fields[key]

    def line_of(self, key: str) -> int:
        return self.sec.fields[key][0] if key in self.sec.fields else self.sec.line

    def scalar(self, key: str, positive=False, check=None):
        raw = self._raw(key)
        if raw is None:
            return None
        line, value = raw
        try:
            x = float(value)
        except ValueError:
            self.errors.append(Diagnostic(line, f"{key} must be a number, got '{value}'"))
            return None
        if not np.isfinite(x):
            self.errors.append(Diagnostic(line, f"{key} must be finite"))
            return None
        if positive and not x > 0.0:
            self.errors.append(Diagnostic(line, f"{key} must be positive"))
            return None
        if check is not None:
            problem = check(x)
            if problem:
                self.errors.append(Diagnostic(line, f"{key} {problem}"))
                return None
        return x

    def integer(self, key: str, minimum=1):
        raw = self._raw(key)
        if raw is None:
            return None
        line, value = raw
        try:
            x = int(value)
        except ValueError:
            self.errors.append(
                Diagnostic(line, f"{key} must be an integer, got '{value}'")
            )
            return None
        if x < minimum:
            self.errors.append(Diagnostic(line, f"{key} must be at least {minimum}"))
            return None
        return x

    def vector(self, key: str, dim=3, in_unit_range=False):
        raw = self._raw(key)
        if raw is None:
            return None
        line, value = raw
        parts = [p.strip() for p in value.split(",")]
        if len(parts) != dim:
            self.errors.append(
                Diagnostic(line, f"{key} must have {dim} comma-separated components")
            )
            return None
        try:
            vec = np.array([float(p) for p in parts])
        except ValueError:
            self.errors.append(Diagnostic(line, f"{key} components must be numbers"))
            return None
        if not np.all(np.isfinite(vec)):
            self.errors.append(Diagnostic(line, f"{key} components must be finite"))
            return None
        if in_unit_range and np.any((vec < 0.0) | (vec > 1.0)):
            self.errors.append(Diagnostic(line, f"{key} components must lie in [0, 1]"))
            return None
        return vec

    def string(self, key: str):
        raw = self._raw(key)
        if raw is None:
            return None
        line, value = raw
        if not value:
            self.errors.append(Diagnostic(line, f"{key} must not be empty"))
            return None
        return value


def parse_scene(text: str | bytes, base_dir: str | os.PathLike = "."):
    """Parse scene text into (SceneDocument, []) or (None, diagnostics).

    Texture paths are resolved relative to `base_dir`. Byte input is
    decoded as UTF-8 with replacement, so arbitrary data never raises.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="replace")
    errors: list[Diagnostic] = []
    entries, errors_ = _tokenize(text)
    errors.extend(errors_)
    sections = _collect_sections(entries, errors)

    seen: dict[str, int] = {}
    for sec in sections:
        if sec.name in _UNIQUE_SECTIONS:
            if sec.name in seen:
                errors.append(
                    Diagnostic(sec.line, f"duplicate section '{sec.name}'")
                )
            seen[sec.name] = sec.line
    for required in ("lens", "projector", "camera"):
        if not any(s.name == required for s in sections):
            errors.append(Diagnostic(None, f"missing required section '{required}'"))

    lens = None
    projector = None
    camera = None
    background = np.zeros(3)
    points: list[ScenePoint] = []
    cards: list[Card] = []

    for sec in sections:
        r = _FieldReader(sec, errors)
        if sec.name == "lens":
            vals = {
                "pitch_x": r.scalar("pitch_x", positive=True),
                "pitch_y": r.scalar("pitch_y", positive=True),
                "depth1": r.scalar("depth1", positive=True),
                "depth2": r.scalar("depth2", positive=True),
                "aperture_w": r.scalar("aperture_w", positive=True),
                "aperture_h": r.scalar("aperture_h", positive=True),
                "plane_z": r.scalar("plane_z"),
            }
            if all(v is not None for v in vals.values()):
                lens = LensSpec(
                    vals["pitch_x"], vals["pitch_y"], vals["depth1"],
                    vals["depth2"], vals["aperture_w"] / 2.0,
                    vals["aperture_h"] / 2.0, vals["plane_z"],
                )
        elif sec.name == "projector":
            center = r.vector("center")
            radius = r.scalar("radius", positive=True)
            if center is not None and radius is not None:
                projector = Projector(center, radius)
        elif sec.name == "camera":
            vals = (
                r.vector("pupil_center"),
                r.scalar("pupil_diameter", positive=True),
                r.scalar("focal_length", positive=True),
                r.scalar("focus_distance", positive=True),
                r.integer("sensor_width_px"),
                r.integer("sensor_height_px"),
                r.scalar("horizontal_fov", positive=True),
                r.vector("look_dir"),
                r.vector("up"),
            )
            if all(v is not None for v in vals):
                camera = ThinLensCamera(*vals)
        elif sec.name == "point":
            pos = r.vector("pos")
            color = r.vector("color", in_unit_range=True)
            if pos is not None and color is not None:
                points.append(ScenePoint(pos, color))
        elif sec.name == "card":
            center = r.vector("center")
            hw = r.scalar("halfwidth", positive=True)
            hh = r.scalar("halfheight", positive=True)
            normal = r.vector("normal")
            if normal is not None:
                nn = np.linalg.norm(normal)
                if nn < 1e-12:
                    errors.append(
                        Diagnostic(r.line_of("normal"), "normal must be nonzero")
                    )
                    normal = None
                else:
                    normal = normal / nn
            texture = None
            texture_path = None
            if r.has("texture") and r.has("color"):
                errors.append(
                    Diagnostic(sec.line, "card must have either texture or color, not both")
                )
            elif r.has("texture"):
                texture_path = r.string("texture")
                if texture_path is not None:
                    full = Path(base_dir) / texture_path
                    try:
                        rgb = ppm.read_ppm(full)
                    except (OSError, ValueError) as exc:
                        errors.append(
                            Diagnostic(
                                r.line_of("texture"),
                                f"cannot load texture '{texture_path}': {exc}",
                            )
                        )
                    else:
                        texture = np.concatenate(
                            [rgb, np.ones(rgb.shape[:2] + (1,))], axis=2
                        )
            elif r.has("color"):
                color = r.vector("color", in_unit_range=True)
                if color is not None:
                    texture = solid_texture(color)
            else:
                errors.append(
                    Diagnostic(sec.line, "card needs a texture path or a solid color")
                )
            if (
                center is not None and hw is not None and hh is not None
                and normal is not None and texture is not None
            ):
                cards.append(Card(center, hw, hh, normal, texture, texture_path))
        elif sec.name == "background":
            rgb = r.vector("rgb", in_unit_range=True)
            if rgb is not None:
                background = rgb

    if errors or lens is None or projector is None or camera is None:
        return None, errors

    scene = Scene(lens, projector, points=points, cards=cards, background=background)
    semantic = [Diagnostic(None, msg) for msg in validate_scene(scene)]
    semantic += [Diagnostic(None, msg) for msg in validate_camera(camera)]
    if semantic:
        return None, semantic
    return SceneDocument(scene, camera), []


def load_scene(path: str | os.PathLike):
    """Read and parse a scene file; IO errors raise OSError."""
    p = Path(path)
    data = p.read_bytes()
    return parse_scene(data, base_dir=p.parent)


def _fmt(x: float) -> str:
    return repr(float(x))


def _vec(v) -> str:
    return ", ".join(_fmt(c) for c in v)


def serialize_scene(scene: Scene, camera: ThinLensCamera) -> str:
    """Scene back to file text; parse_scene inverts it field by field."""
    lens = scene.lens
    out = [
        "lens {",
        f"  pitch_x = {_fmt(lens.pitch_x)}",
        f"  pitch_y = {_fmt(lens.pitch_y)}",
        f"  depth1 = {_fmt(lens.depth1)}",
        f"  depth2 = {_fmt(lens.depth2)}",
        f"  aperture_w = {_fmt(2.0 * lens.aperture_halfwidth)}",
        f"  aperture_h = {_fmt(2.0 * lens.aperture_halfheight)}",
        f"  plane_z = {_fmt(lens.plane_z)}",
        "}",
        "projector {",
        f"  center = {_vec(scene.projector.aperture_center)}",
        f"  radius = {_fmt(scene.projector.aperture_radius)}",
        "}",
        "camera {",
        f"  pupil_center = {_vec(camera.pupil_center)}",
        f"  pupil_diameter = {_fmt(camera.pupil_diameter)}",
        f"  focal_length = {_fmt(camera.focal_length)}",
        f"  focus_distance = {_fmt(camera.focus_distance)}",
        f"  sensor_width_px = {camera.sensor_width_px}",
        f"  sensor_height_px = {camera.sensor_height_px}",
        f"  horizontal_fov = {_fmt(camera.horizontal_fov)}",
        f"  look_dir = {_vec(camera.look_dir)}",
        f"  up = {_vec(camera.up)}",
        "}",
    ]
    for p in scene.points:
        out += [
            "point {",
            f"  pos = {_vec(p.display_pos)}",
            f"  color = {_vec(p.color)}",
            "}",
        ]
    for c in scene.cards:
        out += [
            "card {",
            f"  center = {_vec(c.center)}",
            f"  halfwidth = {_fmt(c.halfwidth)}",
            f"  halfheight = {_fmt(c.halfheight)}",
            f"  normal = {_vec(c.normal)}",
        ]
        if c.texture_path is not None:
            out.append(f"  texture = {c.texture_path}")
        elif c.texture.shape[:2] == (1, 1):
            out.append(f"  color = {_vec(c.texture[0, 0, :3])}")
        else:
            raise ValueError("cannot serialize a multi-texel texture with no path")
        out.append("}")
    out += [
        "background {",
        f"  rgb = {_vec(scene.background)}",
        "}",
        "",
    ]
    return "\n".join(out)
