"""Loading and writing 28x28 digit datasets in the IDX binary format.

The on-disk layout is the classic big-endian IDX container: a 4-byte
magic (0x00000803 for uint8 image tensors, 0x00000801 for uint8 label
vectors), one 4-byte big-endian size per dimension, then the raw bytes.
Files may be gzip-compressed; compression is detected from the ``.gz``
suffix.  ``load_dataset`` knows the conventional file names for three
datasets (mnist, fashion, emnist-digits) and transposes emnist images,
which are stored column-major relative to the other two.

A small synthetic glyph generator is included so the training stack can
be exercised without any dataset files on disk.
"""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801

RAW = "raw"
NORMALIZED = "normalized"

IMAGE_SIDE = 28
NUM_CLASSES = 10

# Conventional file names per dataset, train split then test split.
DATASET_FILES = {
    "mnist": (
        ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
        ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
    ),
    "fashion": (
        ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
        ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
    ),
    "emnist-digits": (
        ("emnist-digits-train-images-idx3-ubyte", "emnist-digits-train-labels-idx1-ubyte"),
        ("emnist-digits-test-images-idx3-ubyte", "emnist-digits-test-labels-idx1-ubyte"),
    ),
}

DATASET_NAMES = tuple(DATASET_FILES)


@dataclass(frozen=True)
class LabeledSet:
    """A stack of 28x28 uint8 or normalized-float images with labels."""

    images: np.ndarray
    labels: np.ndarray
    range_tag: str = RAW

    def __post_init__(self):
        if self.images.ndim != 3 or self.images.shape[1:] != (IMAGE_SIDE, IMAGE_SIDE):
            raise ValueError(f"images must be (n, 28, 28), got {self.images.shape}")
        if self.labels.ndim != 1 or len(self.labels) != len(self.images):
            raise ValueError("labels must be a vector matching the image count")
        if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= NUM_CLASSES):
            raise ValueError("labels must lie in [0, 10)")
        if self.range_tag not in (RAW, NORMALIZED):
            raise ValueError(f"unknown range tag {self.range_tag!r}")

    def __len__(self):
        return len(self.labels)

    def subset(self, index) -> "LabeledSet":
        return LabeledSet(self.images[index], self.labels[index], self.range_tag)

    def take(self, limit: int | None) -> "LabeledSet":
        if limit is None or limit >= len(self):
            return self
        return self.subset(slice(0, limit))


def normalize(data: LabeledSet) -> LabeledSet:
    """Map raw byte images onto [0, 1] floats; idempotent on normalized sets."""
    if data.range_tag == NORMALIZED:
        return data
    return LabeledSet(data.images.astype(np.float64) / 255.0, data.labels, NORMALIZED)


# ---------------------------------------------------------------------------
# IDX reading and writing

def _open_maybe_gzip(path: Path):
    if path.suffix == ".gz":
        return gzip.open(path, "rb")
    return open(path, "rb")


def _read_exact(fh, count: int, path, what: str) -> bytes:
    buf = fh.read(count)
    if len(buf) != count:
        raise ValueError(f"{path}: truncated file while reading {what} "
                         f"(wanted {count} bytes, got {len(buf)})")
    return buf


def load_idx_images(path) -> np.ndarray:
    """Read an IDX image tensor as a (n, rows, cols) uint8 array."""
    path = Path(path)
    with _open_maybe_gzip(path) as fh:
        magic, = struct.unpack(">I", _read_exact(fh, 4, path, "magic number"))
        if magic != IMAGE_MAGIC:
            raise ValueError(f"{path}: bad magic 0x{magic:08x}, "
                             f"expected image magic 0x{IMAGE_MAGIC:08x}")
        n, rows, cols = struct.unpack(">III", _read_exact(fh, 12, path, "dimensions"))
        data = _read_exact(fh, n * rows * cols, path, f"{n} images of {rows}x{cols}")
        extra = fh.read(1)
    if extra:
        raise ValueError(f"{path}: trailing bytes after {n} images")
    return np.frombuffer(data, dtype=np.uint8).reshape(n, rows, cols)


def load_idx_labels(path) -> np.ndarray:
    """Read an IDX label vector as a (n,) uint8 array."""
    path = Path(path)
    with _open_maybe_gzip(path) as fh:
        magic, = struct.unpack(">I", _read_exact(fh, 4, path, "magic number"))
        if magic != LABEL_MAGIC:
            raise ValueError(f"{path}: bad magic 0x{magic:08x}, "
                             f"expected label magic 0x{LABEL_MAGIC:08x}")
        n, = struct.unpack(">I", _read_exact(fh, 4, path, "dimensions"))
        data = _read_exact(fh, n, path, f"{n} labels")
        extra = fh.read(1)
    if extra:
        raise ValueError(f"{path}: trailing bytes after {n} labels")
    return np.frombuffer(data, dtype=np.uint8)


def write_idx_images(path, images: np.ndarray) -> None:
    images = np.ascontiguousarray(images, dtype=np.uint8)
    if images.ndim != 3:
        raise ValueError(f"expected (n, rows, cols), got shape {images.shape}")
    n, rows, cols = images.shape
    with open(path, "wb") as fh:
        fh.write(struct.pack(">IIII", IMAGE_MAGIC, n, rows, cols))
        fh.write(images.tobytes())


def write_idx_labels(path, labels: np.ndarray) -> None:
    labels = np.ascontiguousarray(labels, dtype=np.uint8)
    if labels.ndim != 1:
        raise ValueError(f"expected a label vector, got shape {labels.shape}")
    with open(path, "wb") as fh:
        fh.write(struct.pack(">II", LABEL_MAGIC, len(labels)))
        fh.write(labels.tobytes())


# ---------------------------------------------------------------------------
# Dataset directory layout

def _find_file(data_dir: Path, name: str, filename: str) -> Path | None:
    for parent in (data_dir / name, data_dir):
        for candidate in (parent / filename, parent / (filename + ".gz")):
            if candidate.is_file():
                return candidate
    return None


def load_dataset(name: str, data_dir, split: str = "train") -> LabeledSet:
    """Load one split of a named dataset from a local directory.

    Files are searched first under ``data_dir/<name>/`` and then flat in
    ``data_dir``; a ``.gz`` variant of each file name is accepted.
    EMNIST images are transposed on load so every dataset comes out in
    the same row-major orientation.
    """
    if name not in DATASET_FILES:
        raise ValueError(f"unknown dataset {name!r}; expected one of {DATASET_NAMES}")
    if split not in ("train", "test"):
        raise ValueError(f"split must be 'train' or 'test', got {split!r}")
    data_dir = Path(data_dir)
    img_name, lab_name = DATASET_FILES[name][0 if split == "train" else 1]
    img_path = _find_file(data_dir, name, img_name)
    lab_path = _find_file(data_dir, name, lab_name)
    if img_path is None or lab_path is None:
        raise FileNotFoundError(
            f"dataset {name!r} ({split} split) not found under {data_dir}; "
            f"expected {img_name}[.gz] and {lab_name}[.gz] "
            f"in {data_dir / name} or {data_dir}")
    images = load_idx_images(img_path)
    labels = load_idx_labels(lab_path)
    if len(images) != len(labels):
        raise ValueError(f"{img_path} has {len(images)} images but "
                         f"{lab_path} has {len(labels)} labels")
    if images.shape[1:] != (IMAGE_SIDE, IMAGE_SIDE):
        raise ValueError(f"{img_path}: expected 28x28 images, "
                         f"got {images.shape[1]}x{images.shape[2]}")
    if name == "emnist-digits":
        images = np.ascontiguousarray(images.transpose(0, 2, 1))
    return LabeledSet(images, labels, RAW)


# ---------------------------------------------------------------------------
# Synthetic stand-in data

def synthetic(n: int, seed: int = 0) -> LabeledSet:
    """Generate oriented-bar glyphs with class = bar count mod 10.

    Each image holds between 1 and 4 bright anti-aliased bars at one of
    four orientations on a dark noisy background; the label is derived
    from bar count and orientation so that a small network can learn the
    task. Intended for tests and demos, not as a benchmark substitute.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    side = IMAGE_SIDE
    rr, cc = np.indices((side, side))
    images = np.empty((n, side, side), dtype=np.uint8)
    labels = np.empty(n, dtype=np.uint8)
    spans = ((rr, 4, side - 4), (cc, 4, side - 4),
             (rr - cc, -10, 11), (rr + cc - (side - 1), -10, 11))
    for i in range(n):
        count = int(rng.integers(1, 5))
        orient = int(rng.integers(0, 4))
        canvas = rng.normal(16.0, 6.0, size=(side, side))
        axis, lo, hi = spans[orient]
        for _ in range(count):
            band = np.abs(axis - int(rng.integers(lo, hi)))
            canvas = np.where(band <= 1, 220.0 - 15.0 * band, canvas)
        images[i] = np.clip(canvas, 0, 255).astype(np.uint8)
        labels[i] = (count * 4 + orient) % NUM_CLASSES
    return LabeledSet(images, labels, RAW)
