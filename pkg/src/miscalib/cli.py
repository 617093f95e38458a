"""Command-line front end.

Subcommands: rectify, appd, generate, sweep, reproj, validate.  Every run
prints its resolved configuration (including the seed) so results can be
reproduced exactly; the seed falls back to the MISCALIB_SEED environment
variable when --seed is not given.  Error classes map to distinct exit
codes.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .camera import ImageSize, scale_intrinsics
from .dataset import generate_dataset, parse_calib, read_manifest, validate_manifest
from .errors import (
    EmptyInputDir,
    MiscalibError,
    NonConvergence,
    NoValidRegion,
    ParseError,
    SizeMismatch,
    TooFewValidPoints,
)
from .image_io import image_size, read_image, write_image, write_map
from .metric import appd_from_params
from .rectify import rectify_pipeline
from .sampling import PerturbRanges, SamplerConfig, load_sampler_config
from .simulate import (
    PARAM_NAMES,
    FrustumSpec,
    generate_points,
    run_fixed_projection,
    run_fixed_rectification,
)

EXIT_OK = 0
EXIT_PARSE = 3
EXIT_NO_VALID_REGION = 4
EXIT_NON_CONVERGENCE = 5
EXIT_SIZE_MISMATCH = 6
EXIT_VALIDATION = 7
EXIT_STARVATION = 8
EXIT_EMPTY_INPUT = 9
EXIT_OTHER = 1

DEFAULT_SWEEP_FACTORS = "0.90,0.95,1.00,1.05,1.10,1.15,1.20"


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("MISCALIB_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ParseError(f"MISCALIB_SEED must be an integer, got {env!r}") from exc
    return 0


def _print_config(args, seed=None, **extra):
    print("resolved config:")
    skip = {"func"}
    items = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    if seed is not None:
        items["seed"] = seed
    items.update(extra)
    for key, value in sorted(items.items()):
        print(f"  {key} = {value}")


def _load_calib(args, path_attr="calib", fmt_attr="calib_format"):
    return parse_calib(getattr(args, path_attr), getattr(args, fmt_attr), camera=args.camera)


def _ranges(args) -> PerturbRanges:
    return PerturbRanges(
        focal=(args.focal_range[0], args.focal_range[1]),
        center=(args.center_range[0], args.center_range[1]),
        distortion=(args.distortion_range[0], args.distortion_range[1]),
    )


def _label_size(raw_size: ImageSize, scale: int) -> ImageSize:
    if scale == 1:
        return raw_size
    return ImageSize(max(2, round(raw_size.width / scale)),
                     max(2, round(raw_size.height / scale)))


def cmd_rectify(args) -> int:
    _print_config(args)
    calib = _load_calib(args)
    img = read_image(args.image)
    if image_size(img) != calib.raw_size:
        raise SizeMismatch(
            f"image {args.image} is {image_size(img)}, calibration expects {calib.raw_size}"
        )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.image).stem

    theta = calib.intrinsics
    if args.perturbed_calib:
        perturbed = parse_calib(args.perturbed_calib, args.perturbed_format,
                                camera=args.camera)
        theta = perturbed.intrinsics
        value = appd_from_params(calib.intrinsics, theta, calib.raw_size)
        print(f"APPD {value:.6f}")

    rectified, rmap = rectify_pipeline(img, theta)
    out_image = out_dir / f"{stem}_rectified.png"
    write_image(out_image, rectified)
    print(f"wrote {out_image}")
    if args.dump_map:
        out_map = out_dir / f"{stem}_map.rmap"
        write_map(out_map, rmap)
        print(f"wrote {out_map}")
    return EXIT_OK


def cmd_appd(args) -> int:
    _print_config(args)
    calib = _load_calib(args)
    perturbed = parse_calib(args.perturbed_calib, args.perturbed_format, camera=args.camera)
    if perturbed.raw_size != calib.raw_size:
        raise SizeMismatch(
            f"calibrations disagree on raw size: {calib.raw_size} vs {perturbed.raw_size}"
        )
    value = appd_from_params(calib.intrinsics, perturbed.intrinsics, calib.raw_size)
    print(f"APPD {value:.6f}")
    return EXIT_OK


def cmd_generate(args) -> int:
    seed = _resolve_seed(args)
    _print_config(args, seed=seed)
    calib = _load_calib(args)
    if args.sampler_config:
        cfg = load_sampler_config(args.sampler_config)
        if args.seed is not None or os.environ.get("MISCALIB_SEED"):
            cfg = dataclasses.replace(cfg, seed=seed)
    else:
        cfg = SamplerConfig(n_samples=1, seed=seed)
    cfg = dataclasses.replace(
        cfg,
        n_bins=args.bins if args.bins is not None else cfg.n_bins,
        zero_fraction=(args.zero_fraction if args.zero_fraction is not None
                       else cfg.zero_fraction),
        appd_max=args.appd_max if args.appd_max is not None else cfg.appd_max,
        pilot_draws=(args.pilot_draws if args.pilot_draws is not None
                     else cfg.pilot_draws),
    )
    label_size = _label_size(calib.raw_size, args.label_scale)
    manifest = generate_dataset(
        args.images, calib, _ranges(args), cfg,
        per_image=args.per_image, out_dir=args.out,
        n_total=args.n, label_size=label_size, jobs=args.jobs,
    )

    labels = np.array([r.appd_label for r in manifest.records])
    zeros = int((labels == 0.0).sum())
    appd_max = manifest.header["sampler"]["appd_max"]
    print(f"generated {len(manifest.records)} samples into {args.out}")
    print(f"zero-label samples: {zeros}")
    print(f"appd_max: {appd_max:.6f}")
    n_bins = manifest.header["sampler"]["n_bins"]
    if appd_max > 0:
        edges = np.linspace(0.0, appd_max, n_bins + 1)
        counts, _ = np.histogram(labels[labels > 0], bins=edges)
        print("label histogram (nonzero bins):")
        for i, c in enumerate(counts):
            print(f"  ({edges[i]:.4f}, {edges[i + 1]:.4f}] {c}")
    starved = manifest.header["starved_bins"]
    for entry in starved:
        print(f"warning: bin {entry['bin_index']} starved "
              f"({entry['filled']}/{entry['wanted']} filled)")
    if starved and args.strict:
        return EXIT_STARVATION
    return EXIT_OK


def cmd_sweep(args) -> int:
    from .simulate import sweep_parameter

    _print_config(args)
    calib = _load_calib(args)
    factors = [float(f) for f in args.factors.split(",")]
    params = args.param or list(PARAM_NAMES)
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["param", "factor", "appd"])
        for param in params:
            for factor, value, note in sweep_parameter(calib.intrinsics, calib.raw_size,
                                                       param, factors):
                writer.writerow([param, repr(factor), "" if note else repr(value)])
                if note:
                    print(f"warning: {param} x {factor}: {note}")
    print(f"wrote {out_path}")
    return EXIT_OK


def cmd_reproj(args) -> int:
    from .sampling import sample_params

    seed = _resolve_seed(args)
    _print_config(args, seed=seed)
    calib = _load_calib(args)
    theta_star = calib.intrinsics
    size = calib.raw_size
    frustum = FrustumSpec(n_points=args.n_points, seed=seed)
    points = generate_points(frustum, theta_star, size)
    rng = np.random.default_rng(seed)
    ranges = _ranges(args)

    rows = []
    for i in range(args.n_perturbations):
        theta_m = sample_params(theta_star, ranges, rng)
        for run in (run_fixed_projection, run_fixed_rectification):
            try:
                res = run(theta_star, theta_m, size, points=points)
            except (TooFewValidPoints, NoValidRegion) as exc:
                print(f"warning: sample {i}: {exc}")
                continue
            rows.append((res.protocol, i, res.appd, res.reproj_error, res.n_valid))

    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["protocol", "sample_index", "appd", "reproj_error", "n_valid"])
        for row in rows:
            writer.writerow([row[0], row[1], repr(row[2]), repr(row[3]), row[4]])
    print(f"wrote {out_path}")

    from scipy import stats

    for protocol in ("fixed_projection", "fixed_rectification"):
        sub = [(r[2], r[3]) for r in rows if r[0] == protocol]
        if len(sub) >= 3:
            rho = stats.spearmanr([s[0] for s in sub], [s[1] for s in sub]).statistic
            print(f"spearman({protocol}) = {rho:.4f} over {len(sub)} samples")
    return EXIT_OK


def cmd_validate(args) -> int:
    _print_config(args)
    problems = validate_manifest(args.manifest, recompute=args.recompute)
    manifest_len = len(read_manifest(args.manifest).records)
    if problems:
        for p in problems:
            print(f"PROBLEM: {p}")
        print(f"validation failed: {len(problems)} problem(s) in {manifest_len} records")
        return EXIT_VALIDATION
    print(f"validation passed: {manifest_len} records")
    return EXIT_OK


def _add_common(parser, calib=True):
    if calib:
        parser.add_argument("--calib", required=True, help="calibration file path")
        parser.add_argument("--calib-format", choices=("native", "kitti"), default="native")
        parser.add_argument("--camera", type=int, default=2,
                            help="camera index for KITTI files (default 2)")
    parser.add_argument("--seed", type=int, default=None,
                        help="RNG seed (falls back to MISCALIB_SEED, then 0)")


def _add_ranges(parser):
    parser.add_argument("--focal-range", type=float, nargs=2, default=(0.95, 1.20),
                        metavar=("LO", "HI"))
    parser.add_argument("--center-range", type=float, nargs=2, default=(0.95, 1.05),
                        metavar=("LO", "HI"))
    parser.add_argument("--distortion-range", type=float, nargs=2, default=(0.85, 1.15),
                        metavar=("LO", "HI"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="miscalib",
        description="Semi-synthetic camera miscalibration toolkit",
    )
    parser.add_argument("--version", action="version", version=f"miscalib {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rectify", help="rectify one image, optionally with perturbed parameters")
    _add_common(p)
    p.add_argument("--image", required=True)
    p.add_argument("--perturbed-calib", default=None,
                   help="rectify with these parameters and print the APPD against --calib")
    p.add_argument("--perturbed-format", choices=("native", "kitti"), default="native")
    p.add_argument("--dump-map", action="store_true", help="also write the map as .rmap")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_rectify)

    p = sub.add_parser("appd", help="APPD between two calibrations")
    _add_common(p)
    p.add_argument("--perturbed-calib", required=True)
    p.add_argument("--perturbed-format", choices=("native", "kitti"), default="native")
    p.set_defaults(func=cmd_appd)

    p = sub.add_parser("generate", help="generate a labeled miscalibration dataset")
    _add_common(p)
    _add_ranges(p)
    p.add_argument("--images", required=True, help="directory of raw images")
    p.add_argument("--out", required=True, help="dataset output directory")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--n", type=int, default=None, help="total number of samples")
    group.add_argument("--per-image", type=int, default=None,
                       help="perturbations per raw image")
    p.add_argument("--bins", type=int, default=None, help="label histogram bins (default 10)")
    p.add_argument("--zero-fraction", type=float, default=None,
                   help="fraction of exact-zero labels (default 0.01)")
    p.add_argument("--appd-max", type=float, default=None,
                   help="upper label bound (default: 95th percentile pilot estimate)")
    p.add_argument("--pilot-draws", type=int, default=None,
                   help="pilot draws for the appd-max estimate (default 1000)")
    p.add_argument("--label-scale", type=int, default=1,
                   help="evaluate APPD labels at raw size divided by this factor")
    p.add_argument("--sampler-config", default=None,
                   help="key-value file with SamplerConfig fields")
    p.add_argument("--jobs", type=int, default=1, help="worker threads for image output")
    p.add_argument("--strict", action="store_true",
                   help="exit nonzero when any label bin starves")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("sweep", help="single-parameter APPD sweep curves to CSV")
    _add_common(p)
    p.add_argument("--param", action="append", choices=PARAM_NAMES, default=None,
                   help="parameter to sweep (repeatable; default: all)")
    p.add_argument("--factors", default=DEFAULT_SWEEP_FACTORS,
                   help="comma-separated multiplication factors")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("reproj", help="APPD vs reprojection error experiments to CSV")
    _add_common(p)
    _add_ranges(p)
    p.add_argument("--n-perturbations", type=int, default=200)
    p.add_argument("--n-points", type=int, default=500)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_reproj)

    p = sub.add_parser("validate", help="re-check a dataset manifest")
    _add_common(p, calib=False)
    p.add_argument("--manifest", required=True)
    p.add_argument("--recompute", type=int, default=0,
                   help="recompute this many labels from stored parameters")
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NoValidRegion as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_VALID_REGION
    except NonConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NON_CONVERGENCE
    except SizeMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE_MISMATCH
    except EmptyInputDir as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY_INPUT
    except MiscalibError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
