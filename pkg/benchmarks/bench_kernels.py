"""Times each hot kernel with the numba JIT on vs. the interpreted fallback.

The script re-runs itself in two subprocesses (RAYCUT_DISABLE_NUMBA=0/1) so
each mode gets a clean import, then prints a side-by-side table. Each kernel
is called once for warmup (JIT compile / cache load) and timed on the second
call.

Usage: python benchmarks/bench_kernels.py
"""

import json
import os
import subprocess
import sys
import time


def build_inputs():
    import numpy as np
    from raycut.cost import make_cost_params, node_cost
    from raycut.geometry import cast_rays, circle_template, icosphere_template
    from raycut.graph import build_ray_graph, sample_nodes
    from raycut.icosphere import icosphere
    from raycut.io import PhantomSpec, make_phantom
    from raycut.mincut import _residual_arrays, from_ray_graph

    rng = np.random.default_rng(0)
    inputs = {}

    img = rng.uniform(0, 255, (512, 512))
    inputs["bilinear_batch"] = (img, rng.uniform(0, 511, 100_000),
                                rng.uniform(0, 511, 100_000))
    vol = rng.uniform(0, 255, (128, 128, 128))
    inputs["trilinear_batch"] = (vol, rng.uniform(0, 127, 100_000),
                                 rng.uniform(0, 127, 100_000),
                                 rng.uniform(0, 127, 100_000))

    poly = circle_template(64).vertices
    ang = 2 * np.pi * np.arange(3600) / 3600
    dirs2 = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    inputs["ray_polygon_distances"] = (np.ascontiguousarray(poly), dirs2)

    tpl3 = icosphere_template(2)
    dirs3, _ = icosphere(3)
    inputs["ray_mesh_distances"] = (np.ascontiguousarray(tpl3.vertices),
                                    np.ascontiguousarray(tpl3.faces), dirs3)

    contour = 60.0 * dirs2[::10] + 256.0
    inputs["fill_polygon_mask"] = (np.ascontiguousarray(contour), 512, 512, 1.0, 1.0)

    verts, faces = icosphere(2)
    inputs["voxelize_mesh_parity"] = (verts * 24.0 + 32.0, faces,
                                      64, 64, 64, 1.0, 1.0, 1.0)

    # a realistic noisy ray graph for the two flow solvers
    spec = PhantomSpec(kind="disk", size=(240, 240), spacing=(1 / 120, 1 / 120),
                       center=(120, 120), radius=90, fg=100, bg=0, noise=2.0)
    field, _ = make_phantom(spec)
    seed_world = field.voxel_to_world(spec.center)
    fan = cast_rays(circle_template(), seed_world, R=120)
    params = make_cost_params(field, seed_world, 4 * min(field.spacing))
    pos = sample_nodes(fan, 80, 2.0)
    costs = node_cost(field, params, pos.reshape(-1, 2)).reshape(fan.R, 80)
    g = build_ray_graph(fan, 80, 2.0, 2, costs)
    eto, ecap, adj_ptr, adj_idx, _ = _residual_arrays(from_ray_graph(g))
    n = g.num_nodes
    inputs["bk_maxflow"] = (n, g.source, g.sink, eto, ecap, adj_ptr, adj_idx, 1e-11)
    inputs["dinic_maxflow"] = inputs["bk_maxflow"]
    return inputs


def run_mode():
    from raycut import _kernels
    inputs = build_inputs()
    timings = {}
    for name, args in inputs.items():
        kernel = getattr(_kernels, name)

        def call():
            fresh = tuple(a.copy() if hasattr(a, "copy") else a for a in args)
            t0 = time.perf_counter()
            kernel(*fresh)
            return time.perf_counter() - t0

        call()                      # warmup: JIT compile or first-touch
        timings[name] = min(call() for _ in range(3))
    print(json.dumps(timings))


def main():
    here = os.path.abspath(__file__)
    results = {}
    for label, disable in (("numba", "0"), ("fallback", "1")):
        env = dict(os.environ, RAYCUT_DISABLE_NUMBA=disable)
        out = subprocess.run([sys.executable, here, "--mode"], env=env,
                             capture_output=True, text=True, check=True)
        results[label] = json.loads(out.stdout.strip().splitlines()[-1])
    print(f"{'kernel':24} {'numba':>10} {'fallback':>10} {'speedup':>9}")
    for name in results["numba"]:
        a = results["numba"][name]
        b = results["fallback"][name]
        print(f"{name:24} {a * 1e3:9.2f}ms {b * 1e3:9.2f}ms {b / a:8.1f}x")


if __name__ == "__main__":
    if "--mode" in sys.argv:
        run_mode()
    else:
        main()
