"""The jitted kernels and their numpy fallbacks must agree."""

import numpy as np
import pytest

from ampkit import _kernels


def test_alias_pick_paths_identical():
    gen = np.random.default_rng(70)
    k = 257
    raw = gen.random(k)
    probs = raw / raw.sum()
    prob, alias = np.minimum(probs * k, 1.0), gen.integers(0, k, k)
    u1, u2 = gen.random(5000), gen.random(5000)
    a = _kernels._alias_pick_np(prob, alias, u1, u2)
    if _kernels.HAVE_NUMBA:
        b = _kernels._alias_pick_jit(prob, alias, u1, u2)
        assert np.array_equal(a, b)
    assert a.min() >= 0 and a.max() < k


def test_unique_count_rows_paths_identical():
    gen = np.random.default_rng(71)
    labels = gen.integers(0, 40, size=(200, 25))
    a = _kernels._unique_count_rows_np(labels, 40)
    expected = np.array([np.unique(row).size for row in labels])
    assert np.array_equal(a, expected)
    if _kernels.HAVE_NUMBA:
        b = _kernels._unique_count_rows_jit(labels, 40)
        assert np.array_equal(b, expected)


def test_has_duplicate_rows_paths_identical():
    gen = np.random.default_rng(72)
    labels = gen.integers(0, 50, size=(300, 12))
    a = _kernels._has_duplicate_rows_np(labels, 50)
    expected = np.array([np.unique(row).size < 12 for row in labels])
    assert np.array_equal(a, expected)
    if _kernels.HAVE_NUMBA:
        b = _kernels._has_duplicate_rows_jit(labels, 50)
        assert np.array_equal(b, expected)


def test_compound_law_paths_agree():
    for n, extra, p in ((20, 2, 0.3), (50, 7, 0.9), (10, 3, 0.0), (10, 3, 1.0)):
        a = _kernels._compound_law_np(n, extra, p)
        assert a.sum() == pytest.approx(1.0, abs=1e-12)
        if _kernels.HAVE_NUMBA:
            b = _kernels._compound_law_jit(n, extra, p)
            assert np.abs(a - b).max() < 1e-12


def test_empty_rows():
    empty = np.zeros((3, 0), dtype=np.int64)
    assert np.array_equal(_kernels._unique_count_rows_np(empty, 5), [0, 0, 0])
    if _kernels.HAVE_NUMBA:
        assert np.array_equal(_kernels._unique_count_rows_jit(empty, 5),
                              [0, 0, 0])
