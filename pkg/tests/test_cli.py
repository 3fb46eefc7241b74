import hashlib

import pytest

import ghdsim
from ghdsim.cli import main
from ghdsim.ppm import read_ppm

TINY_SCENE = """
lens {
  pitch_x = 0.0005
  pitch_y = 0.0005
  depth1 = 0.002
  depth2 = 0.002
  aperture_w = 0.2
  aperture_h = 0.15
  plane_z = 0.0
}
projector {
  center = 0, 0, -1.0
  radius = 0.025
}
camera {
  pupil_center = 0, 0, 1.0
  pupil_diameter = 0.004
  focal_length = 0.017
  focus_distance = 1.5
  sensor_width_px = 64
  sensor_height_px = 48
  horizontal_fov = 0.3
  look_dir = 0, 0, -1
  up = 0, 1, 0
}
card {
  center = -0.01, 0.005, 0.2
  halfwidth = 0.015
  halfheight = 0.012
  normal = 0, 0, 1
  color = 0.9, 0.1, 0.1
}
card {
  center = 0.01, -0.01, -0.5
  halfwidth = 0.05
  halfheight = 0.04
  normal = 0, 0, 1
  color = 0.1, 0.1, 0.9
}
background {
  rgb = 0, 0, 0
}
"""


@pytest.fixture
def tiny_scene(tmp_path):
    path = tmp_path / "tiny.scene"
    path.write_text(TINY_SCENE)
    return path


def sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


class TestExitCodes:
    def test_missing_file_is_io_error(self, tmp_path, capsys):
        assert main(["render", str(tmp_path / "absent.scene")]) == 2
        assert "cannot read scene file" in capsys.readouterr().err

    def test_bad_scene_is_diagnostics(self, tmp_path, capsys):
        path = tmp_path / "bad.scene"
        path.write_text(TINY_SCENE.replace("pitch_x = 0.0005", "pitch_x = -2"))
        assert main(["render", str(path)]) == 1
        assert "pitch_x" in capsys.readouterr().err

    def test_success_is_zero(self, tiny_scene, tmp_path):
        out = tmp_path / "img.ppm"
        assert main(["render", str(tiny_scene), "--out", str(out),
                     "--spp", "2"]) == 0
        assert out.exists()

    def test_unwritable_output_is_io_error(self, tiny_scene, capsys):
        code = main(["render", str(tiny_scene), "--spp", "1",
                     "--out", "/proc/nope/img.ppm"])
        assert code == 2


class TestRender:
    def test_same_seed_byte_identical(self, tiny_scene, tmp_path):
        a = tmp_path / "a.ppm"
        b = tmp_path / "b.ppm"
        for out in (a, b):
            assert main(["render", str(tiny_scene), "--out", str(out),
                         "--spp", "4", "--seed", "3"]) == 0
        assert sha(a) == sha(b)

    def test_micro_mode_runs(self, tiny_scene, tmp_path):
        out = tmp_path / "m.ppm"
        assert main(["render", str(tiny_scene), "--mode", "micro", "--ghosts",
                     "--out", str(out), "--spp", "2"]) == 0
        img = read_ppm(out)
        assert img.shape == (48, 64, 3)


class TestWindow:
    def test_prints_conjugate_disk(self, tiny_scene, capsys):
        assert main(["window", str(tiny_scene)]) == 0
        out = capsys.readouterr().out
        assert "center = 0.0, 0.0, 1.0" in out
        assert "radius = 0.025" in out


class TestTrace:
    def test_prints_classified_exit(self, tiny_scene, capsys):
        assert main(["trace", str(tiny_scene), "--from", "0,0,-1",
                     "--dir", "0.05,0.03,1"]) == 0
        out = capsys.readouterr().out
        assert "class = " in out
        assert "reflections = " in out
        assert "exit_dir = " in out

    def test_miss_reported(self, tiny_scene, capsys):
        assert main(["trace", str(tiny_scene), "--from", "0.5,0,-1",
                     "--dir", "0,0,1"]) == 0
        assert "miss" in capsys.readouterr().out


class TestBudget:
    def test_full_plane_pupil_ratio_one(self, capsys):
        assert main(["budget", "--nu", "10", "--nv", "10", "--ns", "20",
                     "--nt", "20", "--pupil", "0.15,0.1,5.0"]) == 0
        out = capsys.readouterr().out
        assert "ratio" in out
        assert "1.0" in out

    def test_csv_report(self, tmp_path, capsys):
        csv = tmp_path / "budget.csv"
        assert main(["budget", "--nu", "4", "--nv", "4", "--ns", "30",
                     "--nt", "20", "--pupil", "0.15,0.1,0.01",
                     "--csv", str(csv)]) == 0
        lines = csv.read_text().splitlines()
        assert lines[0] == "full_samples,pupil_samples,full_bytes,pupil_bytes,ratio"
        fields = lines[1].split(",")
        assert int(fields[0]) == 4 * 4 * 30 * 20
        assert float(fields[4]) == int(fields[1]) / int(fields[0])


class TestPresets:
    def test_fig4_outputs(self, tiny_scene, tmp_path, capsys):
        out = tmp_path / "fig4"
        assert main(["fig4", str(tiny_scene), "--out-dir", str(out),
                     "--spp", "2", "--baseline", "0.02"]) == 0
        assert (out / "fig4_view_a.ppm").exists()
        assert (out / "fig4_view_b.ppm").exists()
        csv = (out / "fig4_parallax.csv").read_text().splitlines()
        assert csv[0] == "card,distance_m,analytic_shift_px,measured_shift_px"
        assert len(csv) == 3
        assert "exposed far-card pixels" in capsys.readouterr().out

    def test_fig6_outputs(self, tiny_scene, tmp_path, capsys):
        out = tmp_path / "fig6"
        assert main(["fig6", str(tiny_scene), "--out-dir", str(out),
                     "--spp", "2", "--focus-min", "1.0", "--focus-max", "2.0",
                     "--focus-step", "0.5"]) == 0
        frames = sorted(out.glob("fig6_frame_*.ppm"))
        assert len(frames) == 3
        csv = (out / "fig6_sharpness.csv").read_text().splitlines()
        assert csv[0] == "focus_distance_m,sharpness"
        assert len(csv) == 4
        assert "sharpest focus distance" in capsys.readouterr().out

    def test_sweep_pitch_csv(self, tiny_scene, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        assert main(["sweep-pitch", str(tiny_scene), "--scales", "1,0.5",
                     "--samples", "2000", "--spp", "1", "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("scale,pitch_x,pitch_y")
        assert len(lines) == 3
        printed = capsys.readouterr().out
        assert printed.startswith("scale,")

    def test_reports_are_seed_stable(self, tiny_scene, tmp_path):
        outs = []
        for name in ("r1", "r2"):
            out = tmp_path / name
            assert main(["fig6", str(tiny_scene), "--out-dir", str(out),
                         "--spp", "2", "--focus-min", "1.0",
                         "--focus-max", "1.5", "--focus-step", "0.5",
                         "--seed", "7"]) == 0
            outs.append((out / "fig6_sharpness.csv").read_text())
        assert outs[0] == outs[1]


def test_bundled_demo_scene_renders_via_cli(tmp_path):
    out = tmp_path / "demo.ppm"
    assert main(["render", str(ghdsim.asset_path("demo.scene")),
                 "--out", str(out), "--spp", "1"]) == 0
    img = read_ppm(out)
    assert img.shape == (480, 640, 3)
    assert img.max() > 0.1
