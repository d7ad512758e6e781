"""Discrete images, gradients, orientation maps and occlusion masks.

Grey images live on an (H, W) grid with x = column index growing
rightward and y = row index growing downward.  The direction-selective
response at angle theta is the derivative along
Z(theta) = -sin(theta) d/dx + cos(theta) d/dy; maximizing it over a
discrete circle of angles assigns each pixel the orientation orthogonal
to the local level set, which is the local contour normal.

Occlusions are deterministic binary masks: 45-degree anti-diagonal
stripes (lines r + c = const) or axis-aligned grids, parameterized by a
stripe width w and an inter-stripe spacing s, anchored at pixel (0, 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi

RAW = "raw"
NORMALIZED = "normalized"

STRIPES = "stripes"
GRID = "grid"

#: strictly positive stand-in for the gradient != 0 regularity condition
GRADIENT_EPSILON = 1e-6
DEFAULT_BINS = 360


@dataclass
class ImageGrid:
    """An H x W grey raster plus a tag for its value range."""

    pixels: np.ndarray
    range_tag: str = RAW

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels)
        if self.pixels.ndim != 2:
            raise ValueError(f"expected a 2-D raster, got shape {self.pixels.shape}")
        if self.range_tag not in (RAW, NORMALIZED):
            raise ValueError(f"unknown range tag {self.range_tag!r}")
        if self.range_tag == NORMALIZED:
            p = self.pixels.astype(float)
            if p.size and (p.min() < 0.0 or p.max() > 1.0):
                raise ValueError("normalized pixels must lie in [0, 1]")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @classmethod
    def from_raw(cls, pixels) -> "ImageGrid":
        return cls(np.asarray(pixels, dtype=np.uint8), RAW)

    def normalized(self) -> "ImageGrid":
        """Byte range 0..255 scaled into [0, 1]."""
        if self.range_tag == NORMALIZED:
            return self
        return ImageGrid(self.pixels.astype(np.float64) / 255.0, NORMALIZED)


def _field(img, require_normalized=False) -> np.ndarray:
    if isinstance(img, ImageGrid):
        if require_normalized and img.range_tag != NORMALIZED:
            raise ValueError("operation requires a normalized image")
        return img.pixels.astype(np.float64, copy=False)
    return np.asarray(img, dtype=np.float64)


def gradient(img) -> tuple[np.ndarray, np.ndarray]:
    """(Ix, Iy): central differences inside, one-sided at the borders."""
    p = _field(img, require_normalized=True)
    ix = np.empty_like(p)
    iy = np.empty_like(p)
    ix[:, 1:-1] = 0.5 * (p[:, 2:] - p[:, :-2])
    ix[:, 0] = p[:, 1] - p[:, 0]
    ix[:, -1] = p[:, -1] - p[:, -2]
    iy[1:-1, :] = 0.5 * (p[2:, :] - p[:-2, :])
    iy[0, :] = p[1, :] - p[0, :]
    iy[-1, :] = p[-1, :] - p[-2, :]
    return ix, iy


def apply_Z(img, theta: float) -> np.ndarray:
    """Directional derivative -sin(theta) Ix + cos(theta) Iy, pixelwise."""
    ix, iy = gradient(img)
    return -math.sin(theta) * ix + math.cos(theta) * iy


@dataclass
class OrientationMap:
    """Per-pixel maximizing angle; NaN marks pixels below the gradient floor."""

    theta: np.ndarray
    grad_mag: np.ndarray
    n_bins: int
    gradient_epsilon: float = GRADIENT_EPSILON

    @property
    def height(self) -> int:
        return self.theta.shape[0]

    @property
    def width(self) -> int:
        return self.theta.shape[1]

    @property
    def defined(self) -> np.ndarray:
        return self.grad_mag >= self.gradient_epsilon


def orientation_map(img, n_bins: int = DEFAULT_BINS,
                    gradient_epsilon: float = GRADIENT_EPSILON) -> OrientationMap:
    """Argmax of the Z(theta) response over n_bins angles 2*pi*k/n_bins.

    Ties resolve to the smallest angle.  The closed-form maximizer is
    atan2(-Ix, Iy); the discrete argmax lands on the nearest bin.
    """
    if n_bins < 4:
        raise ValueError(f"need at least 4 bins, got {n_bins}")
    ix, iy = gradient(img)
    mag = np.hypot(ix, iy)
    best = np.full(ix.shape, -np.inf)
    best_bin = np.zeros(ix.shape, dtype=np.intp)
    angles = TWO_PI * np.arange(n_bins) / n_bins
    for k, th in enumerate(angles):
        resp = -math.sin(th) * ix + math.cos(th) * iy
        better = resp > best
        best[better] = resp[better]
        best_bin[better] = k
    theta = angles[best_bin]
    theta[mag < gradient_epsilon] = np.nan
    return OrientationMap(theta=theta, grad_mag=mag, n_bins=n_bins,
                          gradient_epsilon=gradient_epsilon)


@dataclass(frozen=True)
class OcclusionSpec:
    """Mask family: kind in {stripes, grid}, stripe width w, spacing s."""

    kind: str
    w: int
    s: int
    phase: int = 0

    def __post_init__(self):
        if self.kind not in (STRIPES, GRID):
            raise ValueError(f"kind must be {STRIPES!r} or {GRID!r}, got {self.kind!r}")
        if self.w < 1 or self.s < 1:
            raise ValueError(f"w and s must be >= 1, got w={self.w}, s={self.s}")

    @property
    def period(self) -> int:
        return self.w + self.s


def stripe_mask(h: int, w_img: int, spec: OcclusionSpec) -> np.ndarray:
    """Anti-diagonal stripes: pixel (r, c) occluded iff (r+c+phase) mod (w+s) < w."""
    if spec.kind != STRIPES:
        raise ValueError(f"expected a stripes spec, got {spec.kind!r}")
    diag = np.add.outer(np.arange(h), np.arange(w_img)) + spec.phase
    return (diag % spec.period) < spec.w


def grid_mask(h: int, w_img: int, spec: OcclusionSpec) -> np.ndarray:
    """Axis-aligned grid: occluded iff the row or the column falls in a stripe."""
    if spec.kind != GRID:
        raise ValueError(f"expected a grid spec, got {spec.kind!r}")
    rows = ((np.arange(h) + spec.phase) % spec.period) < spec.w
    cols = ((np.arange(w_img) + spec.phase) % spec.period) < spec.w
    return rows[:, None] | cols[None, :]


def occlusion_mask(h: int, w_img: int, spec: OcclusionSpec) -> np.ndarray:
    return stripe_mask(h, w_img, spec) if spec.kind == STRIPES else grid_mask(h, w_img, spec)


def occlude(img, spec: OcclusionSpec):
    """Black out masked pixels of a raw image (or a stack of raw images).

    Operates on byte-range data; occlusion erases pixels to 0 and must be
    applied before normalization.  Accepts an ImageGrid or an ndarray
    whose last two axes are (H, W); returns the same container type.
    """
    if isinstance(img, ImageGrid):
        if img.range_tag != RAW:
            raise ValueError("occlusion applies to raw byte-range images")
        return ImageGrid(occlude(img.pixels, spec), RAW)
    arr = np.asarray(img)
    if arr.ndim < 2:
        raise ValueError("need at least a 2-D image")
    mask = occlusion_mask(arr.shape[-2], arr.shape[-1], spec)
    out = arr.copy()
    out[..., mask] = 0
    return out


def occluded_fraction(h: int, w_img: int, spec: OcclusionSpec) -> float:
    m = occlusion_mask(h, w_img, spec)
    return float(m.sum()) / m.size


# ---------------------------------------------------------------------------
# PGM I/O (binary P5 and ASCII P2, maxval 255)

def write_pgm(path, pixels) -> None:
    arr = np.asarray(pixels)
    if arr.ndim != 2:
        raise ValueError("PGM wants a single 2-D image")
    arr = arr.astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode("ascii"))
        fh.write(arr.tobytes())


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    tokens = []
    i = 0
    while len(tokens) < 4 and i < len(data):
        if data[i:i + 1] == b"#":  # comment runs to end of line
            while i < len(data) and data[i] not in b"\r\n":
                i += 1
        elif data[i:i + 1].isspace():
            i += 1
        else:
            j = i
            while j < len(data) and not data[j:j + 1].isspace():
                j += 1
            tokens.append(data[i:j])
            i = j
    if len(tokens) < 4 or tokens[0] not in (b"P5", b"P2"):
        raise ValueError(f"not a supported PGM file: {path}")
    width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval != 255:
        raise ValueError(f"only maxval 255 is supported, got {maxval}")
    if tokens[0] == b"P5":
        i += 1  # single whitespace byte after the header
        raster = np.frombuffer(data, dtype=np.uint8, count=height * width, offset=i)
    else:
        values = data[i:].split()
        if len(values) < height * width:
            raise ValueError("PGM truncated")
        raster = np.array(values[: height * width], dtype=np.uint8)
    return raster.reshape(height, width)
