"""Shared fixtures: smooth random images and dataset-directory discovery."""

import os
from pathlib import Path

import numpy as np
import pytest


def smooth_image(rng, side=28, terms=6):
    """A random band-limited image in [0, 1] with gentle gradients.

    Sum of a few low-frequency sinusoids; smooth enough that finite
    differences approximate the true gradient well away from extrema.
    """
    rr, cc = np.indices((side, side)) / side
    img = np.zeros((side, side))
    for _ in range(terms):
        fx, fy = rng.uniform(-2.5, 2.5, size=2)
        phase = rng.uniform(0, 2 * np.pi)
        img += rng.uniform(0.3, 1.0) * np.sin(2 * np.pi * (fx * cc + fy * rr) + phase)
    lo, hi = img.min(), img.max()
    return (img - lo) / (hi - lo if hi > lo else 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)


def dataset_dir():
    """Directory holding IDX dataset files, or None when absent."""
    env = os.environ.get("BORDERNET_DATA_DIR")
    candidates = [Path(env)] if env else []
    candidates += [Path("/root/pkg/data"), Path("/root/data"),
                   Path.home() / "datasets"]
    names = ("train-images-idx3-ubyte", "train-images-idx3-ubyte.gz")
    for base in candidates:
        for sub in (base, base / "mnist"):
            if any((sub / n).is_file() for n in names):
                return base
    return None


requires_mnist = pytest.mark.skipif(
    dataset_dir() is None,
    reason="no IDX dataset files found (set BORDERNET_DATA_DIR)")
