#!/usr/bin/env python3
"""Show the four oriented kernels and the two occlusion families."""

from pathlib import Path

import numpy as np

from bordernet import datasets, filters, vision

OUT = Path(__file__).resolve().parent / "out"


def print_kernel(orientation: str) -> None:
    k = filters.make_filter(orientation)
    print(f"{orientation} (sum {int(k.weights.sum())}):")
    for row in k.weights.astype(int):
        print("  " + " ".join("#" if v else "." for v in row))


def print_mask(kind: str, w: int, s: int, side: int = 12) -> None:
    spec = vision.OcclusionSpec(kind, w, s)
    mask = vision.occlusion_mask(side, side, spec)
    frac = vision.occluded_fraction(28, 28, spec)
    print(f"{kind} w={w} s={s}: {frac:.1%} of a 28x28 image occluded")
    for row in mask:
        print("  " + "".join("#" if v else "." for v in row))


def main() -> None:
    OUT.mkdir(exist_ok=True)

    for orientation in filters.ORIENTATIONS:
        print_kernel(orientation)
        print()

    print_mask(vision.STRIPES, 2, 3)
    print()
    print_mask(vision.GRID, 1, 4)
    print()

    # coverage grows with w and shrinks with s
    print("stripes coverage on 28x28, rows w=1..4, cols s=1..4:")
    for w in range(1, 5):
        cells = [vision.occluded_fraction(28, 28, vision.OcclusionSpec(vision.STRIPES, w, s))
                 for s in range(1, 5)]
        print("  " + "  ".join(f"{v:.3f}" for v in cells))

    # before and after, on a synthetic glyph
    digit = datasets.synthetic(1, seed=9).images[0]
    spec = vision.OcclusionSpec(vision.STRIPES, 3, 4)
    vision.write_pgm(OUT / "glyph_clean.pgm", digit)
    vision.write_pgm(OUT / "glyph_occluded.pgm", vision.occlude(digit, spec))
    print(f"\nwrote glyph_clean.pgm / glyph_occluded.pgm under {OUT}")


if __name__ == "__main__":
    main()
