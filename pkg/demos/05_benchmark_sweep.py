#!/usr/bin/env python3
"""A miniature end-to-end benchmark run, offline.

Real runs point the harness at a digit dataset and use many cycles;
here three cycles on synthetic glyphs cover three stripe cells, so the
whole sweep finishes in under a minute.  The bootstrap is exhaustive
(3 cycles means only 27 resamples).  Output lands as results.csv plus
an improvement heatmap SVG, the same artifacts the bench command
writes.
"""

from pathlib import Path

from bordernet import datasets, harness, report

OUT = Path(__file__).resolve().parent / "out"


def main() -> None:
    OUT.mkdir(exist_ok=True)

    config = harness.ExperimentConfig(
        dataset="synthetic",
        kind="stripes",
        cells=((1, 1), (3, 3), (5, 5)),
        cycles=3,
        base_seed=7,
        epochs=2,
        batch_size=64,
        resamples=None,
    )
    data = (datasets.synthetic(2000, seed=21), datasets.synthetic(500, seed=22))
    results = harness.run_experiment(config, data=data, verbose=True)

    csv_path = OUT / "results.csv"
    svg_path = OUT / "improvement.svg"
    report.emit_csv(results, csv_path)
    report.emit_heatmap_svg(results, svg_path)

    print()
    print(f"{'cell':<14}{'lenet5':>10}{'bordernet':>12}{'median %':>10}"
          f"{'95% CI':>20}")
    for r in results:
        ci = f"[{r.ci_low_pct:.1f}, {r.ci_high_pct:.1f}]"
        print(f"{r.kind}({r.w},{r.s})".ljust(14)
              + f"{r.mean_lenet5:>10.4f}{r.mean_bordernet:>12.4f}"
              + f"{r.imp_median_pct:>10.1f}{ci:>20}")
    print(f"\nwrote {csv_path} and {svg_path}")


if __name__ == "__main__":
    main()
