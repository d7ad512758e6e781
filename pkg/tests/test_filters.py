"""Oriented kernel bank: literal layouts, sums, symmetries, scaling."""

import numpy as np
import numpy.testing as npt
import pytest

from bordernet import filters

HORIZONTAL_LITERAL = np.array([
    [0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0],
    [1, 1, 1, 1, 1, 1, 1],
    [1, 1, 1, 1, 1, 1, 1],
    [1, 1, 1, 1, 1, 1, 1],
    [0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0],
], dtype=float)

DIAG_MAIN_LITERAL = np.array([
    [1, 1, 0, 0, 0, 0, 0],
    [1, 1, 1, 0, 0, 0, 0],
    [0, 1, 1, 1, 0, 0, 0],
    [0, 0, 1, 1, 1, 0, 0],
    [0, 0, 0, 1, 1, 1, 0],
    [0, 0, 0, 0, 1, 1, 1],
    [0, 0, 0, 0, 0, 1, 1],
], dtype=float)


def test_horizontal_kernel_literal_layout():
    k = filters.make_filter(filters.HORIZONTAL)
    npt.assert_array_equal(k.weights, HORIZONTAL_LITERAL)


def test_diag_main_kernel_literal_layout():
    k = filters.make_filter(filters.DIAG_MAIN)
    npt.assert_array_equal(k.weights, DIAG_MAIN_LITERAL)


def test_kernel_sums():
    sums = {o: filters.make_filter(o).weights.sum() for o in filters.ORIENTATIONS}
    assert sums[filters.HORIZONTAL] == 21
    assert sums[filters.VERTICAL] == 21
    assert sums[filters.DIAG_MAIN] == 19
    assert sums[filters.DIAG_ANTI] == 19


def test_membership_predicate_exhaustive():
    for orientation in filters.ORIENTATIONS:
        k = filters.make_filter(orientation)
        for r in range(7):
            for c in range(7):
                member = bool(filters.band_member(orientation, r, c, 7, 3))
                assert k.weights[r, c] == (1.0 if member else 0.0), \
                    (orientation, r, c)


def test_symmetries():
    h = filters.make_filter(filters.HORIZONTAL).weights
    v = filters.make_filter(filters.VERTICAL).weights
    dm = filters.make_filter(filters.DIAG_MAIN).weights
    da = filters.make_filter(filters.DIAG_ANTI).weights
    npt.assert_array_equal(v, h.T)
    npt.assert_array_equal(da, np.fliplr(dm))
    npt.assert_array_equal(h, np.flipud(h))
    npt.assert_array_equal(v, np.fliplr(v))
    npt.assert_array_equal(dm, dm.T)
    npt.assert_array_equal(da, np.rot90(dm))


def test_normalized_copies():
    for orientation in filters.ORIENTATIONS:
        k = filters.make_filter(orientation)
        norm = k.normalized
        assert norm.sum() == pytest.approx(1.0)
        npt.assert_allclose(norm * k.weights.sum(), k.weights)


def test_bank_order_and_stacking():
    kernels = filters.bank()
    assert tuple(k.orientation for k in kernels) == filters.ORIENTATIONS
    stacked = filters.bank_weights(normalized=False)
    assert stacked.shape == (4, 1, 7, 7)
    for i, k in enumerate(kernels):
        npt.assert_array_equal(stacked[i, 0], k.weights)
    norm = filters.bank_weights(normalized=True)
    npt.assert_allclose(norm.sum(axis=(1, 2, 3)), np.ones(4))


def test_other_sizes_follow_same_rules():
    k = filters.make_filter(filters.HORIZONTAL, size=5, width=1)
    expected = np.zeros((5, 5))
    expected[2, :] = 1
    npt.assert_array_equal(k.weights, expected)
    d = filters.make_filter(filters.DIAG_MAIN, size=5, width=3)
    assert d.weights.sum() == 5 + 4 + 4


def test_geometry_validation():
    with pytest.raises(ValueError):
        filters.make_filter(filters.HORIZONTAL, size=6, width=3)
    with pytest.raises(ValueError):
        filters.make_filter(filters.HORIZONTAL, size=7, width=4)
    with pytest.raises(ValueError):
        filters.make_filter(filters.HORIZONTAL, size=3, width=5)
    with pytest.raises(ValueError):
        filters.make_filter("swirl")


def test_kernels_are_immutable():
    k = filters.make_filter(filters.VERTICAL)
    with pytest.raises(ValueError):
        k.weights[0, 0] = 5.0
