"""Fixed orientation-selective convolution kernels.

Four binary 7x7 kernels, one per direction (horizontal, vertical and
the two diagonals), each a centered stripe of width 3: ones on the
stripe, zeros elsewhere.  Convolving an image with one of them mimics a
direction-selective receptive field; the four together form the frozen
front end of the border-completion network.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HORIZONTAL = "horizontal"
VERTICAL = "vertical"
DIAG_MAIN = "diag_main"
DIAG_ANTI = "diag_anti"

#: fixed channel order of the filter bank
ORIENTATIONS = (HORIZONTAL, VERTICAL, DIAG_MAIN, DIAG_ANTI)

DEFAULT_SIZE = 7
DEFAULT_WIDTH = 3


@dataclass(frozen=True)
class FilterKernel:
    orientation: str
    size: int
    width: int
    weights: np.ndarray  # binary, shape (size, size)

    @property
    def normalized(self) -> np.ndarray:
        """L1-normalized copy; keeps filtered activations in input range."""
        return self.weights / self.weights.sum()


def band_member(orientation: str, r, c, size: int, width: int):
    """Membership predicate of the oriented stripe, vectorized over (r, c)."""
    half = (width - 1) // 2
    center = (size - 1) // 2
    r = np.asarray(r)
    c = np.asarray(c)
    if orientation == HORIZONTAL:
        return np.abs(r - center) <= half
    if orientation == VERTICAL:
        return np.abs(c - center) <= half
    if orientation == DIAG_MAIN:
        return np.abs(r - c) <= half
    if orientation == DIAG_ANTI:
        return np.abs(r + c - (size - 1)) <= half
    raise ValueError(f"unknown orientation {orientation!r}")


def make_filter(orientation: str, size: int = DEFAULT_SIZE,
                width: int = DEFAULT_WIDTH) -> FilterKernel:
    if size % 2 == 0 or width % 2 == 0:
        raise ValueError(f"size and width must be odd, got size={size}, width={width}")
    if width >= size:
        raise ValueError(f"width must be smaller than size, got {width} >= {size}")
    r, c = np.indices((size, size))
    weights = band_member(orientation, r, c, size, width).astype(np.float64)
    weights.flags.writeable = False
    return FilterKernel(orientation=orientation, size=size, width=width, weights=weights)


def bank(size: int = DEFAULT_SIZE, width: int = DEFAULT_WIDTH) -> list[FilterKernel]:
    """The four kernels in fixed channel order."""
    return [make_filter(o, size, width) for o in ORIENTATIONS]


def bank_weights(size: int = DEFAULT_SIZE, width: int = DEFAULT_WIDTH,
                 normalized: bool = True) -> np.ndarray:
    """Stacked (4, 1, size, size) array ready to drop into a conv layer."""
    kernels = bank(size, width)
    mats = [k.normalized if normalized else k.weights for k in kernels]
    return np.stack(mats)[:, None, :, :]
