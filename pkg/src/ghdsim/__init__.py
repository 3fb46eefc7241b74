"""Geometric-optics simulator of a crossed strip-mirror holographic display.

The display relays a projector-formed virtual scene through a lens built
from two crossed arrays of strip mirrors, reconstructing every scene
point at its mirror position with real depth. This package verifies the
conjugate imaging, renders the display with occlusion/parallax/defocus
cues, and accounts for the data savings of restricting the light field
to viewer pupils.
"""

from .backend import active_backend, set_backend
from .camera import ThinLensCamera, blur_diameter, in_window, project_point
from .geometry import (
    ChannelFoldResult, Ray, Vec3, fold_channel, intersect_plane, normalize,
    reflect, vec3,
)
from .lens import (
    ClassifiedRay, LensSpec, RayClass, VisualWindow, ideal_conjugate,
    imaging_fraction, trace_ideal, trace_micro, visual_window,
)
from .lightfield import (
    BudgetConfig, PlanePatch, PupilSet, ReductionReport, TwoPlaneParam,
    full_sample_count, line_params, pupil_sample_count, reduction_report,
)
from .ppm import decode_ppm, encode_ppm, read_ppm, write_ppm
from .render import Image, LensMode, RenderOptions, render, sharpness
from .scene import (
    Card, Projector, Scene, ScenePoint, card_basis, solid_texture,
    source_position, steer_projector, validate_scene,
)
from .scenefile import (
    Diagnostic, SceneDocument, load_scene, parse_scene, serialize_scene,
)

__version__ = "0.1.0"


def asset_path(name: str):
    """Path to a bundled asset (demo scene files and textures)."""
    from importlib.resources import files

    return files("ghdsim") / "assets" / name
