import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asmr import coords as C
from asmr.errors import (
    BaseProductMismatch,
    CoordOutOfRange,
    LevelOutOfRange,
    LevelValueOutOfRange,
    NonPositiveBase,
    RaggedLevels,
)


def test_make_scheme_binary():
    s = C.make_scheme([[2, 2, 2]], [8])
    assert s.cumulative == ((2, 4, 8),)
    assert s.grid_sizes == ((4, 2, 1),)
    assert s.extents == (8,)


def test_make_scheme_reference_config():
    s = C.make_scheme([[4, 4, 4, 8], [4, 4, 4, 8]], [512, 512])
    for axis in range(2):
        assert s.cumulative[axis] == (4, 16, 64, 512)
        assert s.grid_sizes[axis] == (128, 32, 8, 1)


@pytest.mark.parametrize(
    "bases, extents, err",
    [
        ([[3, 3]], [8], BaseProductMismatch),
        ([[2, 2], [2, 2, 2]], None, RaggedLevels),
        ([[2, 0, 4]], None, NonPositiveBase),
        ([[1, 1]], None, NonPositiveBase),
        ([[2, 4]], [0], NonPositiveBase),
    ],
)
def test_make_scheme_errors(bases, extents, err):
    with pytest.raises(err):
        C.make_scheme(bases, extents)


@pytest.mark.parametrize(
    "x, bases, digits",
    [
        (5, [2, 2, 2], (1, 0, 1)),
        (100, [4, 4, 4, 8], (0, 3, 0, 4)),
        (511, [4, 4, 4, 8], (3, 3, 3, 7)),
    ],
)
def test_decompose_recompose_examples(x, bases, digits):
    s = C.make_scheme([bases])
    got = C.decompose(x, s)
    assert tuple(v[0] for v in got) == digits
    assert C.recompose([[v] for v in digits], s) == (x,)


def test_recompose_hand_sum():
    s = C.make_scheme([[4, 4, 4, 8]])
    assert 0 * 128 + 3 * 32 + 0 * 8 + 4 * 1 == C.recompose([[0], [3], [0], [4]], s)[0]


def test_decompose_out_of_range():
    s = C.make_scheme([[2, 2, 2]])
    with pytest.raises(CoordOutOfRange):
        C.decompose(8, s)
    with pytest.raises(CoordOutOfRange):
        C.decompose(-1, s)


def test_recompose_bad_digit():
    s = C.make_scheme([[2, 2, 2]])
    with pytest.raises(LevelValueOutOfRange):
        C.recompose([[2], [0], [0]], s)


def test_level_grid():
    s = C.make_scheme([[2], [2]])
    assert C.level_grid(s, 0).tolist() == [[0, 0], [0, 1], [1, 0], [1, 1]]
    s1 = C.make_scheme([[4, 4, 4, 8]])
    assert C.level_grid(s1, 3)[:, 0].tolist() == list(range(8))
    with pytest.raises(LevelOutOfRange):
        C.level_grid(s1, 4)


def test_normalize_level():
    assert C.normalize_level([0, 1], 2).tolist() == [-1.0, 1.0]
    np.testing.assert_allclose(C.normalize_level([0, 1, 2, 3], 4), [-1, -1 / 3, 1 / 3, 1])
    assert C.normalize_level([0], 1).tolist() == [0.0]


def test_scheme_text_roundtrip():
    s = C.parse_scheme("axis0=4x4x4x8;axis1=4x4x6x8")
    assert s.bases == ((4, 4, 4, 8), (4, 4, 6, 8))
    assert C.parse_scheme(C.format_scheme(s)) == s
    assert C.parse_scheme("2x2x2").bases == ((2, 2, 2),)
    assert C.parse_scheme("4x4", ndim=3).bases == ((4, 4),) * 3


def _all_schemes_upto(limit):
    for n_levels in (1, 2, 3, 4):
        for bases in itertools.product([1, 2, 3, 4, 5, 8], repeat=n_levels):
            if max(bases) >= 2 and math.prod(bases) <= limit:
                yield list(bases)


def test_roundtrip_exhaustive_small():
    count = 0
    for bases in _all_schemes_upto(4096):
        s = C.make_scheme([bases])
        xs = np.arange(s.extents[0])[:, None]
        digits = C.decompose_array(xs, s)
        back = (digits * np.array(s.grid_sizes).T[:, None, :]).sum(axis=0)
        assert np.array_equal(back, xs)
        count += 1
    assert count > 100


@st.composite
def schemes(draw, max_dim=3):
    d = draw(st.integers(1, max_dim))
    L = draw(st.integers(1, 5))
    bases = []
    for _ in range(d):
        b = draw(st.lists(st.integers(1, 9), min_size=L, max_size=L))
        if max(b) < 2:
            b[draw(st.integers(0, L - 1))] = draw(st.integers(2, 9))
        bases.append(b)
    return C.make_scheme(bases)


@settings(max_examples=200, deadline=None)
@given(schemes(), st.data())
def test_roundtrip_and_digit_range(s, data):
    x = tuple(data.draw(st.integers(0, n - 1)) for n in s.extents)
    digits = C.decompose(x, s)
    for i, row in enumerate(digits):
        for a, v in enumerate(row):
            assert 0 <= v < s.bases[a][i]
    assert C.recompose(digits, s) == x


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 10), st.integers(1, 6), st.data())
def test_uniform_base_is_positional(B, L, data):
    s = C.make_scheme([[B] * L])
    x = data.draw(st.integers(0, B**L - 1))
    expected = []
    y = x
    for _ in range(L):
        expected.append(y % B)
        y //= B
    assert [d[0] for d in C.decompose(x, s)] == expected[::-1]


@settings(max_examples=100, deadline=None)
@given(schemes(max_dim=1), st.data())
def test_shared_prefix_iff_same_cell(s, data):
    n = s.extents[0]
    x = data.draw(st.integers(0, n - 1))
    y = data.draw(st.integers(0, n - 1))
    dx, dy = C.decompose(x, s), C.decompose(y, s)
    for i in range(s.levels):
        g = s.grid_sizes[0][i]
        assert (dx[: i + 1] == dy[: i + 1]) == (x // g == y // g)


def test_recompose_array_inverts_decompose_array():
    s = C.make_scheme([[4, 4, 4], [2, 8, 4]])
    xs = C.global_grid(s.extents)
    assert np.array_equal(C.recompose_array(C.decompose_array(xs, s), s), xs)
    with pytest.raises(LevelValueOutOfRange):
        C.recompose_array(np.full((3, 1, 2), 4), s)
