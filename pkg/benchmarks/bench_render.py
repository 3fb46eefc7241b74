"""Compare the numba and pure-numpy render kernels on the demo scene.

Run: python benchmarks/bench_render.py [--size 320x240] [--spp 8]
"""

import argparse
import time
from dataclasses import replace

import numpy as np

import ghdsim
from ghdsim import LensMode, RenderOptions, render, set_backend


def time_render(scene, camera, opts, backend, repeats=3):
    set_backend(backend)
    render(scene, camera, opts)  # warm up (numba compiles on first call)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        image = render(scene, camera, opts)
        best = min(best, time.perf_counter() - t0)
    return best, image


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--size", default="320x240")
    parser.add_argument("--spp", type=int, default=8)
    args = parser.parse_args()
    w, h = (int(v) for v in args.size.split("x"))

    doc, diags = ghdsim.load_scene(ghdsim.asset_path("demo.scene"))
    assert doc is not None, diags
    camera = replace(doc.camera, sensor_width_px=w, sensor_height_px=h)
    rays = w * h * args.spp

    print(f"{w}x{h}, {args.spp} rays/px ({rays / 1e6:.1f}M rays per image)")
    for mode in (LensMode.IDEAL, LensMode.MICRO):
        opts = RenderOptions(mode=mode, rays_per_pixel=args.spp, seed=0)
        t_np, img_np = time_render(doc.scene, camera, opts, "numpy")
        t_nb, img_nb = time_render(doc.scene, camera, opts, "numba")
        identical = np.array_equal(img_np.pixels, img_nb.pixels)
        print(f"  {mode.value:>5}: numpy {t_np:6.3f}s ({rays / t_np / 1e6:6.1f} Mray/s)"
              f"   numba {t_nb:6.3f}s ({rays / t_nb / 1e6:6.1f} Mray/s)"
              f"   speedup {t_np / t_nb:4.1f}x   identical={identical}")
    set_backend(None)


if __name__ == "__main__":
    main()
