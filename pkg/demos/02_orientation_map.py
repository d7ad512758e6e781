#!/usr/bin/env python3
"""Per-pixel dominant orientation of a smooth test image, drawn in ASCII."""

from pathlib import Path

import numpy as np

from bordernet import vision

OUT = Path(__file__).resolve().parent / "out"

# theta mod pi, quantized to four glyphs: - / | \
GLYPHS = "-/|\\"


def swirl_image(side: int = 28) -> np.ndarray:
    """A ring pattern whose level sets circle the image center."""
    r = np.hypot(*np.meshgrid(np.arange(side) - side / 2 + 0.5,
                              np.arange(side) - side / 2 + 0.5, indexing="ij"))
    img = 0.5 + 0.5 * np.sin(r * 0.9)
    return img


def ascii_render(omap: vision.OrientationMap) -> str:
    rows = []
    for r in range(omap.height):
        chars = []
        for c in range(omap.width):
            th = omap.theta[r, c]
            if not np.isfinite(th):
                chars.append(".")
                continue
            k = int(np.round((th % np.pi) / (np.pi / 4))) % 4
            chars.append(GLYPHS[k])
        rows.append("".join(chars))
    return "\n".join(rows)


def main() -> None:
    OUT.mkdir(exist_ok=True)

    img = vision.ImageGrid(swirl_image(), vision.NORMALIZED)
    omap = vision.orientation_map(img, n_bins=72)

    defined = int(omap.defined.sum())
    print(f"orientation map, 72 bins: {defined}/{omap.theta.size} pixels "
          f"above the gradient floor")
    print(ascii_render(omap))

    raw = (img.pixels * 255).round().astype(np.uint8)
    pgm_path = OUT / "swirl.pgm"
    vision.write_pgm(pgm_path, raw)

    csv_path = OUT / "swirl_orientation.csv"
    with open(csv_path, "w") as fh:
        fh.write("row,col,theta\n")
        for r in range(omap.height):
            for c in range(omap.width):
                th = omap.theta[r, c]
                fh.write(f"{r},{c},{'' if not np.isfinite(th) else repr(float(th))}\n")
    print(f"wrote {pgm_path} and {csv_path}")


if __name__ == "__main__":
    main()
