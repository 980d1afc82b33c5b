"""Batch command line: segment, evaluate, phantom, train-shape.

Exit codes: 0 success, 2 validation error, 3 runtime error. Coordinates on
the command line are voxel-index units. Every run appends one JSON line
(flags, version, timings, cut value) to the run log for reproducibility;
nothing is printed to stderr on success.
"""

import argparse
import json
import sys
import time

import numpy as np

from . import __version__, io as imio, metrics, shapemodel
from ._accel import USING_NUMBA
from .errors import (AverageNotSet, BadMagic, DegenerateShape,
                     DegenerateTemplate, DimensionMismatch, EmptySet,
                     HeaderMalformed, InvalidSeed, NonWatertightMesh,
                     RaycutError, ShapeMismatch, SizeMismatch, TooFewPoints,
                     TruncatedData, WindowDegenerate)
from .geometry import (BUILTIN_TEMPLATES, builtin_template, cast_rays,
                       load_tpl, save_tpl)
from .pipeline import SegmentConfig, iterate_seed, segment, write_contour

VALIDATION_ERRORS = (InvalidSeed, BadMagic, TruncatedData, HeaderMalformed,
                     SizeMismatch, ShapeMismatch, TooFewPoints,
                     DegenerateTemplate, NonWatertightMesh, WindowDegenerate,
                     DegenerateShape, DimensionMismatch, EmptySet,
                     AverageNotSet, ValueError, FileNotFoundError, KeyError)


def _csv_floats(text):
    return tuple(float(x) for x in text.split(","))


def _load_field(path, spacing=None):
    if path.lower().endswith(".pgm"):
        return imio.read_image_2d(path, spacing or (1.0, 1.0))
    field = imio.read_volume(path)
    if spacing:
        field.spacing = tuple(spacing)
    return field


def _load_template(spec):
    if spec in BUILTIN_TEMPLATES:
        return builtin_template(spec)
    return load_tpl(spec)


def _write_mask(mask, spacing, path):
    if mask.ndim == 2:
        imio.write_mask_2d(mask, path)
    else:
        imio.write_mask_3d(mask, spacing, path)


def _log_record(args, record):
    record.setdefault("cmd", args.cmd)
    record.setdefault("argv", sys.argv[1:])
    record.setdefault("version", __version__)
    record.setdefault("numba", USING_NUMBA)
    record.setdefault("timestamp", time.time())
    with open(args.log, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")


def cmd_segment(args):
    field = _load_field(args.input, args.spacing)
    template = _load_template(args.template)
    config = SegmentConfig(rays=args.rays, nodes=args.nodes, delta_r=args.delta,
                           scale_max=args.scale, avg_window_d=args.avg_window,
                           ico_level=args.ico_level)
    t0 = time.perf_counter()
    if args.iterate:
        result = iterate_seed(field, template, args.seed, config,
                              max_iters=args.iterate, eps=args.eps)
    else:
        result = segment(field, template, args.seed, config)
    runtime_ms = 1000.0 * (time.perf_counter() - t0)

    _write_mask(result.mask, field.spacing, args.out_mask)
    outputs = {"mask": args.out_mask}
    if args.out_contour:
        write_contour(args.out_contour, result.boundary_points)
        outputs["contour"] = args.out_contour
    if args.out_mesh and field.dim == 3:
        save_tpl(args.out_mesh, result.contour_vertices, result.contour_faces)
        outputs["mesh"] = args.out_mesh
    if args.dump_graph:
        fan = cast_rays(template, result.seed_world, R=config.rays,
                        ico_level=config.ico_level)
        from . import cost as cost_mod, graph as graph_mod
        P = config.nodes_for(field.dim)
        params = cost_mod.make_cost_params(field, result.seed_world,
                                           config.window_for(field))
        pos = graph_mod.sample_nodes(fan, P, config.scale_max)
        costs = cost_mod.node_cost(field, params,
                                   pos.reshape(-1, field.dim)).reshape(fan.R, P)
        g = graph_mod.build_ray_graph(fan, P, config.scale_max, config.delta_r, costs)
        with open(args.dump_graph, "w", encoding="utf-8") as fh:
            fh.write(g.to_dimacs())
        outputs["graph"] = args.dump_graph

    b = result.boundary_index
    print(f"cut_value={result.cut_value:.6g} boundary_min={int(b.min())} "
          f"boundary_max={int(b.max())} voxels={result.stats['voxel_count']} "
          f"volume={result.stats['volume']:.6g} seed_quality={result.seed_quality} "
          f"runtime_ms={runtime_ms:.1f}")
    for warning in result.warnings:
        print(f"warning: {warning}")
    _log_record(args, {
        "params": {"rays": args.rays, "nodes": args.nodes, "delta": args.delta,
                   "scale": args.scale, "avg_window": args.avg_window,
                   "seed": list(args.seed), "iterate": args.iterate,
                   "eps": args.eps, "input": args.input,
                   "template": args.template},
        "cut_value": result.cut_value, "max_flow": result.max_flow,
        "boundary_min": int(b.min()), "boundary_max": int(b.max()),
        "voxel_count": result.stats["voxel_count"],
        "seed_quality": result.seed_quality,
        "iterations": len(result.iteration_seeds),
        "converged": result.converged,
        "runtime_ms": runtime_ms, "outputs": outputs,
    })
    return 0


def _read_mask_pair(auto_path, ref_path):
    auto, sp_a = imio.read_mask(auto_path)
    ref, sp_r = imio.read_mask(ref_path)
    if tuple(np.round(sp_a, 9)) != tuple(np.round(sp_r, 9)):
        raise ShapeMismatch(f"spacing differs: {sp_a} vs {sp_r}")
    return auto, ref, sp_a


def cmd_evaluate(args):
    t0 = time.perf_counter()
    reports = []
    if args.batch:
        with open(args.batch, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#") or line.startswith("auto,"):
                    continue
                parts = [p.strip() for p in line.split(",")]
                auto, ref, spacing = _read_mask_pair(parts[0], parts[1])
                case = parts[2] if len(parts) > 2 else parts[0]
                reports.append(metrics.evaluate_pair(auto, ref, spacing, case))
        if not reports:
            raise EmptySet("batch file listed no cases")
    else:
        auto, ref, spacing = _read_mask_pair(args.auto, args.ref)
        reports.append(metrics.evaluate_pair(auto, ref, spacing, args.auto))
    summary = metrics.summarize(reports)
    if args.batch:
        print(metrics.to_table(reports, summary), end="")
    else:
        r = reports[0]
        print(f"DSC={r.dsc_percent:.2f}% vol_auto={r.vol_auto:.6g} "
              f"vol_ref={r.vol_ref:.6g} voxels_auto={r.voxels_auto} "
              f"voxels_ref={r.voxels_ref}")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(metrics.to_csv(reports, summary))
    _log_record(args, {
        "cases": len(reports),
        "dsc_mean": summary["dsc_percent"]["mean"],
        "runtime_ms": 1000.0 * (time.perf_counter() - t0),
    })
    return 0


def cmd_phantom(args):
    t0 = time.perf_counter()
    if args.spec:
        with open(args.spec, "r", encoding="utf-8") as fh:
            spec = imio.parse_phantom_spec(fh.read())
    else:
        if not args.kind or not args.size:
            raise ValueError("need --spec or at least --kind and --size")
        spec = imio.PhantomSpec(
            kind=args.kind, size=args.size, spacing=args.spacing,
            center=args.center, radius=args.radius,
            semi_axes=args.semi_axes or (), points=args.points,
            inner=args.inner, rotation=args.rotation, fg=args.fg, bg=args.bg,
            noise=args.noise, noise_seed=args.noise_seed,
            occlusion=args.occlusion, occlusion_depth=args.occlusion_depth,
            depth=args.depth)
    field, truth = imio.make_phantom(spec)
    if field.dim == 2:
        maxval = 255 if spec.depth == "u8" else 65535
        imio.write_image_2d(field.values, args.out_field, maxval=maxval)
    else:
        imio.write_volume(field, args.out_field,
                          dtype="u8" if spec.depth == "u8" else "u16le")
    _write_mask(truth, field.spacing, args.out_mask)
    print(f"kind={spec.kind} size={spec.size} truth_voxels={int(truth.sum())} "
          f"field={args.out_field} mask={args.out_mask}")
    _log_record(args, {"kind": spec.kind, "size": list(spec.size),
                       "truth_voxels": int(truth.sum()),
                       "runtime_ms": 1000.0 * (time.perf_counter() - t0)})
    return 0


def cmd_train_shape(args):
    t0 = time.perf_counter()
    shapes = [load_tpl(p).vertices for p in args.shapes]
    # load_tpl normalizes; PCA realigns anyway, so that is harmless
    aligned = shapemodel.align_shapes(shapes)
    model = shapemodel.fit_pca(aligned)
    shapemodel.save_model(model, args.out_model)
    outputs = {"model": args.out_model}

    from .geometry import normalize_template
    mean_tpl = normalize_template(model.mean_landmarks(),
                                  None if model.dim == 2 else _mean_faces(args))
    if args.out_mean:
        save_tpl(args.out_mean, mean_tpl.vertices, mean_tpl.faces)
        outputs["mean"] = args.out_mean
    fan = cast_rays(mean_tpl, np.zeros(model.dim), R=args.rays,
                    ico_level=args.ico_level)
    P = args.nodes or (200 if model.dim == 2 else 150)
    delta = shapemodel.estimate_delta(model, fan, P, args.scale,
                                      mode_sigma=args.mode_sigma)
    print(f"modes={model.n_modes} landmarks={model.n_landmarks} "
          f"suggested_delta={delta}")
    _log_record(args, {"shapes": len(args.shapes), "modes": model.n_modes,
                       "suggested_delta": delta, "outputs": outputs,
                       "runtime_ms": 1000.0 * (time.perf_counter() - t0)})
    return 0


def _mean_faces(args):
    # 3D training shapes share topology; reuse the first file's faces
    return load_tpl(args.shapes[0]).faces


def build_parser():
    top = argparse.ArgumentParser(prog="raycut", description=__doc__)
    top.add_argument("--log", default="raycut_runs.jsonl",
                     help="JSON-lines run log (appended)")
    sub = top.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("segment", help="segment one image/volume")
    p.add_argument("--input", required=True, help=".pgm image or volume header")
    p.add_argument("--template", required=True,
                   help=f"TPL file or builtin: {', '.join(sorted(BUILTIN_TEMPLATES))}")
    p.add_argument("--seed", required=True, type=_csv_floats,
                   help="seed voxel coords x,y[,z]")
    p.add_argument("--rays", type=int, default=360)
    p.add_argument("--nodes", type=int, default=None)
    p.add_argument("--delta", type=int, default=2)
    p.add_argument("--scale", type=float, default=2.0)
    p.add_argument("--avg-window", type=float, default=None)
    p.add_argument("--ico-level", type=int, default=3)
    p.add_argument("--spacing", type=_csv_floats, default=None)
    p.add_argument("--out-mask", required=True)
    p.add_argument("--out-contour", default=None)
    p.add_argument("--out-mesh", default=None)
    p.add_argument("--iterate", type=int, default=0, help="max re-seeding passes")
    p.add_argument("--eps", type=float, default=None,
                   help="world-units convergence radius for --iterate")
    p.add_argument("--dump-graph", default=None, help="write DIMACS debug dump")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("evaluate", help="compare masks (DSC, volumes)")
    p.add_argument("--auto")
    p.add_argument("--ref")
    p.add_argument("--batch", help="CSV of auto,ref[,case] lines")
    p.add_argument("--csv", help="write report CSV here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("phantom", help="generate a synthetic field + truth mask")
    p.add_argument("--spec", help="key-value phantom spec file")
    p.add_argument("--kind", choices=imio.PHANTOM_KINDS)
    p.add_argument("--size", type=_csv_floats)
    p.add_argument("--spacing", type=_csv_floats, default=None)
    p.add_argument("--center", type=_csv_floats, default=None)
    p.add_argument("--radius", type=float, default=0.0)
    p.add_argument("--semi-axes", type=_csv_floats, default=None)
    p.add_argument("--points", type=int, default=5)
    p.add_argument("--inner", type=float, default=0.5)
    p.add_argument("--rotation", type=float, default=0.0)
    p.add_argument("--fg", type=float, default=100.0)
    p.add_argument("--bg", type=float, default=0.0)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--noise-seed", type=int, default=0)
    p.add_argument("--occlusion", type=float, default=0.0)
    p.add_argument("--occlusion-depth", type=float, default=0.2)
    p.add_argument("--depth", choices=("u8", "u16"), default="u8")
    p.add_argument("--out-field", required=True)
    p.add_argument("--out-mask", required=True)
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("train-shape", help="PCA shape model from TPL files")
    p.add_argument("--shapes", nargs="+", required=True)
    p.add_argument("--out-model", required=True)
    p.add_argument("--out-mean", default=None, help="write the mean shape as TPL")
    p.add_argument("--rays", type=int, default=360)
    p.add_argument("--nodes", type=int, default=None)
    p.add_argument("--scale", type=float, default=2.0)
    p.add_argument("--ico-level", type=int, default=3)
    p.add_argument("--mode-sigma", type=float, default=2.0)
    p.set_defaults(func=cmd_train_shape)
    return top


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except VALIDATION_ERRORS as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except RaycutError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
