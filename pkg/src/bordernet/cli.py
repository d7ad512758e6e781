"""Command-line entry points for every capability of the package.

Subcommands:

* ``geodesics``: roll out a fan of planar completion curves to CSV,
  optionally rendering an SVG of the (x, y) projection.
* ``occlude``: read an IDX image file, zero out a periodic stripe or
  grid pattern, write a valid IDX file back (optional PGM previews).
* ``orientation``: per-pixel dominant orientation of a PGM image, as CSV.
* ``filters``: dump the four oriented kernels as CSV and PGM.
* ``train``: train one model on a dataset and write a checkpoint.
* ``eval``: score a checkpoint on a (possibly occluded) test split.
* ``bench``: the paired multi-cycle benchmark with CSV/SVG reports.

``bench`` accepts ``--config FILE`` with flat ``key=value`` lines
mirroring its flags; explicit flags override file values.  Dataset
location comes from ``--data-dir`` or the BORDERNET_DATA_DIR variable.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

import numpy as np

from . import datasets, filters, geodesics, harness, nn, report, vision


def _data_dir(value: str | None) -> str:
    if value:
        return value
    env = os.environ.get("BORDERNET_DATA_DIR")
    if env:
        return env
    raise SystemExit("no dataset directory: pass --data-dir or set BORDERNET_DATA_DIR")


# ---------------------------------------------------------------------------
# geodesics

def _cmd_geodesics(args) -> int:
    if args.gammas is not None:
        gammas = np.array([float(tok) for tok in args.gammas.split(",") if tok.strip()])
        if gammas.size == 0:
            raise SystemExit("--gammas must list at least one value")
    else:
        gammas = geodesics.fan_gammas(args.fan)
    fan = geodesics.association_fan(args.energy, gammas, t_end=args.t_end,
                                    dt=args.dt, system=args.system)
    out = Path(args.out)
    if len(fan) == 1:
        fan[0].to_csv(out)
        written = [out]
    else:
        # One file per curve: fan.csv becomes fan_00.csv, fan_01.csv, ...
        written = []
        for i, traj in enumerate(fan):
            path = out.with_name(f"{out.stem}_{i:02d}{out.suffix or '.csv'}")
            traj.to_csv(path)
            written.append(path)
    print(f"wrote {len(written)} trajectory file(s) to {written[0].parent}")
    if args.svg:
        report.fan_svg(fan, args.svg)
        print(f"wrote fan plot {args.svg}")
    return 0


# ---------------------------------------------------------------------------
# occlude / orientation / filters

def _cmd_occlude(args) -> int:
    images = datasets.load_idx_images(args.infile)
    spec = vision.OcclusionSpec(args.kind, args.w, args.s)
    occluded = vision.occlude(images, spec)
    datasets.write_idx_images(args.out, occluded)
    frac = vision.occluded_fraction(images.shape[1], images.shape[2], spec)
    print(f"occluded {len(images)} images ({args.kind}, w={args.w}, s={args.s}, "
          f"{100 * frac:.1f}% of pixels) -> {args.out}")
    if args.png_preview:
        preview_dir = Path(args.png_preview)
        preview_dir.mkdir(parents=True, exist_ok=True)
        for i in range(min(args.preview_count, len(occluded))):
            vision.write_pgm(preview_dir / f"occluded_{i:03d}.pgm", occluded[i])
        print(f"wrote {min(args.preview_count, len(occluded))} previews "
              f"to {preview_dir}")
    return 0


def _cmd_orientation(args) -> int:
    pixels = vision.read_pgm(args.infile)
    img = vision.ImageGrid.from_raw(pixels).normalized()
    omap = vision.orientation_map(img, n_bins=args.bins)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "col", "theta"])
        h, w = omap.theta.shape
        for r in range(h):
            for c in range(w):
                t = omap.theta[r, c]
                writer.writerow([r, c, "" if np.isnan(t) else repr(float(t))])
    defined = int(omap.defined.sum())
    print(f"wrote {args.out}: {defined}/{omap.theta.size} pixels "
          f"with defined orientation")
    return 0


def _cmd_filters(args) -> int:
    dump_dir = Path(args.dump)
    dump_dir.mkdir(parents=True, exist_ok=True)
    for kernel in filters.bank():
        base = dump_dir / kernel.orientation
        with open(base.with_suffix(".csv"), "w", newline="") as fh:
            csv.writer(fh).writerows(kernel.weights.astype(int).tolist())
        vision.write_pgm(base.with_suffix(".pgm"),
                         (kernel.weights * 255).astype(np.uint8))
    print(f"wrote 4 kernels (csv + pgm) to {dump_dir}")
    return 0


# ---------------------------------------------------------------------------
# train / eval

def _model_spec(name: str, mode: str) -> nn.NetworkSpec:
    if name == "lenet5":
        return nn.lenet5_spec()
    if name == "bordernet":
        return nn.bordernet_spec(mode)
    raise SystemExit(f"unknown model {name!r}; expected lenet5 or bordernet")


def _cmd_train(args) -> int:
    data_dir = _data_dir(args.data_dir)
    train_set = datasets.load_dataset(args.dataset, data_dir, "train")
    train_set = train_set.take(args.train_limit)
    spec = _model_spec(args.model, args.mode)
    print(f"training {spec.name} on {args.dataset} "
          f"({len(train_set)} samples, {args.epochs} epochs, seed {args.seed})")
    model = nn.train(spec, datasets.normalize(train_set), epochs=args.epochs,
                     batch_size=args.batch_size, seed=args.seed, verbose=True)
    nn.save_checkpoint(model, args.out)
    test_set = datasets.load_dataset(args.dataset, data_dir, "test")
    acc = nn.evaluate(model, datasets.normalize(test_set))
    print(f"clean test accuracy {acc:.4f}; checkpoint saved to {args.out}")
    return 0


def _parse_occlusion(text: str | None) -> vision.OcclusionSpec | None:
    if text is None:
        return None
    parts = text.split(",")
    if len(parts) != 3:
        raise SystemExit("--occlusion expects kind,w,s (e.g. stripes,3,3)")
    return vision.OcclusionSpec(parts[0].strip(), int(parts[1]), int(parts[2]))


def _cmd_eval(args) -> int:
    model = nn.load_checkpoint(args.model_file)
    data_dir = _data_dir(args.data_dir)
    test_set = datasets.load_dataset(args.dataset, data_dir, args.split)
    spec = _parse_occlusion(args.occlusion)
    label = "clean"
    if spec is not None:
        test_set = datasets.LabeledSet(vision.occlude(test_set.images, spec),
                                       test_set.labels, datasets.RAW)
        label = f"{spec.kind} w={spec.w} s={spec.s}"
    acc = nn.evaluate(model, datasets.normalize(test_set))
    print(f"{model.spec.name} on {args.dataset} {args.split} ({label}): "
          f"accuracy {acc:.4f}")
    return 0


# ---------------------------------------------------------------------------
# bench

def _parse_cells(text: str) -> tuple[tuple[int, int], ...]:
    cells = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(",")
        if len(parts) != 2:
            raise SystemExit(f"bad cell {chunk!r}: expected w,s")
        cells.append((int(parts[0]), int(parts[1])))
    if not cells:
        raise SystemExit("--cells must name at least one w,s pair")
    return tuple(cells)


def read_config_file(path) -> dict[str, str]:
    """Flat key=value lines; '#' starts a comment, blank lines ignored."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SystemExit(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        values[key.strip().replace("_", "-")] = value.strip()
    return values


_BENCH_KEYS = ("dataset", "kind", "cells", "full-grid", "cycles", "seed", "epochs",
               "batch-size", "train-limit", "resamples", "statistic", "mode",
               "data-dir", "out")


def _merge_bench_options(args) -> dict:
    """Start from defaults, overlay config-file values, overlay given flags."""
    merged = {
        "dataset": "mnist", "kind": vision.STRIPES, "cells": "1,1",
        "full-grid": False, "cycles": 100, "seed": 42, "epochs": 10,
        "batch-size": 64, "train-limit": None, "resamples": 100_000,
        "statistic": harness.MEDIAN_OF_RATIOS, "mode": nn.BANK,
        "data-dir": None, "out": "bench_out",
    }
    if args.config:
        file_values = read_config_file(args.config)
        unknown = set(file_values) - set(_BENCH_KEYS)
        if unknown:
            raise SystemExit(f"unknown config keys: {sorted(unknown)}")
        for key, text in file_values.items():
            if key == "full-grid":
                merged[key] = text.lower() in ("1", "true", "yes", "on")
            elif key in ("cycles", "seed", "epochs", "batch-size", "train-limit"):
                merged[key] = int(text)
            elif key == "resamples":
                merged[key] = None if text.lower() in ("none", "exhaustive") else int(text)
            else:
                merged[key] = text
    for key, attr in (("dataset", "dataset"), ("kind", "kind"), ("cells", "cells"),
                      ("cycles", "cycles"), ("seed", "seed"), ("epochs", "epochs"),
                      ("batch-size", "batch_size"), ("train-limit", "train_limit"),
                      ("resamples", "resamples"), ("statistic", "statistic"),
                      ("mode", "mode"), ("data-dir", "data_dir"), ("out", "out")):
        value = getattr(args, attr)
        if value is not None:
            merged[key] = value
    if args.full_grid:
        merged["full-grid"] = True
    return merged


def _cmd_bench(args) -> int:
    opts = _merge_bench_options(args)
    cells = _parse_cells(opts["cells"]) if isinstance(opts["cells"], str) \
        else opts["cells"]
    config = harness.ExperimentConfig(
        dataset=opts["dataset"], kind=opts["kind"], cells=cells,
        full_grid=opts["full-grid"], cycles=opts["cycles"],
        base_seed=opts["seed"], epochs=opts["epochs"],
        batch_size=opts["batch-size"], train_limit=opts["train-limit"],
        resamples=opts["resamples"], statistic=opts["statistic"],
        bordernet_mode=opts["mode"], data_dir=_data_dir(opts["data-dir"]),
        out_dir=opts["out"])
    out_dir = Path(opts["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    n_cells = len(config.expanded_cells())
    print(f"benchmark: {config.dataset}, {n_cells} cell(s), "
          f"{config.cycles} cycle(s), seed {config.base_seed}")
    try:
        results = harness.run_experiment(config, verbose=True)
    except (RuntimeError, ValueError, OSError, FileNotFoundError) as exc:
        print(f"benchmark failed: {exc}", file=sys.stderr)
        return 1
    csv_path = out_dir / "results.csv"
    report.emit_csv(results, csv_path)
    svg_path = out_dir / "improvement.svg"
    if results:
        report.emit_heatmap_svg(results, svg_path)
    for r in results:
        print(f"  {r.kind} (w={r.w}, s={r.s}): lenet5 {r.mean_lenet5:.4f}, "
              f"bordernet {r.mean_bordernet:.4f}, improvement "
              f"{r.imp_median_pct:.2f}% CI [{r.ci_low_pct:.2f}, {r.ci_high_pct:.2f}]")
    print(f"wrote {csv_path}" + (f" and {svg_path}" if results else ""))
    return 0


# ---------------------------------------------------------------------------
# Parser assembly

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bordernet",
        description="Completion-curve geometry, oriented filters and the "
                    "occlusion-robustness benchmark.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("geodesics", help="integrate completion-curve fans")
    p.add_argument("--energy", type=float, default=geodesics.DEFAULT_ENERGY)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--gammas", help="comma-separated initial phases in (0, 2pi)")
    group.add_argument("--fan", type=int, default=16,
                       help="number of evenly spaced initial phases")
    p.add_argument("--t-end", type=float, default=geodesics.DEFAULT_T_END)
    p.add_argument("--dt", type=float, default=geodesics.DEFAULT_DT)
    p.add_argument("--system", choices=(geodesics.FULL, geodesics.REDUCED),
                   default=geodesics.REDUCED)
    p.add_argument("--out", required=True, help="output CSV path (stem for fans)")
    p.add_argument("--svg", help="optional SVG plot of the (x, y) fan")
    p.set_defaults(func=_cmd_geodesics)

    p = sub.add_parser("occlude", help="apply a periodic occlusion to an IDX file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--kind", choices=(vision.STRIPES, vision.GRID), required=True)
    p.add_argument("--w", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--png-preview", help="directory for PGM previews")
    p.add_argument("--preview-count", type=int, default=8)
    p.set_defaults(func=_cmd_occlude)

    p = sub.add_parser("orientation", help="per-pixel orientation of a PGM image")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--bins", type=int, default=vision.DEFAULT_BINS)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_orientation)

    p = sub.add_parser("filters", help="dump the oriented filter bank")
    p.add_argument("--dump", required=True, help="output directory")
    p.set_defaults(func=_cmd_filters)

    p = sub.add_parser("train", help="train one model, save a checkpoint")
    p.add_argument("--model", choices=("lenet5", "bordernet"), required=True)
    p.add_argument("--dataset", choices=datasets.DATASET_NAMES, default="mnist")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--train-limit", type=int)
    p.add_argument("--mode", choices=(nn.BANK, nn.CASCADE), default=nn.BANK)
    p.add_argument("--data-dir")
    p.add_argument("--out", required=True, help="checkpoint path (.npz)")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint")
    p.add_argument("--model-file", required=True)
    p.add_argument("--dataset", choices=datasets.DATASET_NAMES, default="mnist")
    p.add_argument("--split", choices=("train", "test"), default="test")
    p.add_argument("--occlusion", help="kind,w,s (omit for clean evaluation)")
    p.add_argument("--data-dir")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("bench", help="paired multi-cycle benchmark")
    p.add_argument("--config", help="flat key=value file; flags override it")
    p.add_argument("--dataset", choices=datasets.DATASET_NAMES)
    p.add_argument("--kind", choices=(vision.STRIPES, vision.GRID, harness.BOTH))
    p.add_argument("--cells", help='semicolon-separated pairs, e.g. "1,1;3,3"')
    p.add_argument("--full-grid", action="store_true",
                   help="all 100 cells (w, s) in [1,10]x[1,10]")
    p.add_argument("--cycles", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--train-limit", type=int)
    p.add_argument("--resamples", type=int)
    p.add_argument("--statistic", choices=harness.STATISTICS)
    p.add_argument("--mode", choices=(nn.BANK, nn.CASCADE))
    p.add_argument("--data-dir")
    p.add_argument("--out", help="output directory for CSV and SVG")
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
