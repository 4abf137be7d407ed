from math import comb, prod

import pytest
from hypothesis import given
from hypothesis import strategies as st

from intralink.bounds import (ArchShape, HypothesisViolation, dense_lower_bound,
                              normalize_mode, piece_upper_bound, region_upper_bound,
                              width2_feedforward_bound, zaslavsky_sum)


@pytest.mark.parametrize("widths, mode, upper", [
    ([3, 2], "ff", 12),
    ([6, 4], "intra2", 70),
    ([2, 2, 2], "ff", 21),
    ([2, 2], "ff", 7),
    ([2], "ff", 3),
    ([4], "all", 11),
    ([1, 1, 1, 1], "resnet", 16),
    ([4, 4], "intra2", 49),
])
def test_piece_bound_examples(widths, mode, upper):
    assert piece_upper_bound(ArchShape.uniform(widths, mode)).upper == upper


def test_width2_bound_values():
    assert [width2_feedforward_bound(k) for k in range(1, 6)] == [3, 7, 21, 49, 147]


@pytest.mark.parametrize("m, n, want", [(4, 2, 11), (7, 2, 29), (3, 1, 4), (5, 5, 32), (0, 3, 1)])
def test_zaslavsky_examples(m, n, want):
    assert zaslavsky_sum(m, n) == want


@given(st.integers(0, 30), st.integers(0, 8))
def test_zaslavsky_matches_binomials(m, n):
    assert zaslavsky_sum(m, n) == sum(comb(m, j) for j in range(min(m, n) + 1))
    # Pascal-style recurrence for hyperplane arrangements
    if m > 0 and n > 0:
        assert zaslavsky_sum(m, n) == zaslavsky_sum(m - 1, n) + zaslavsky_sum(m - 1, n - 1)


def test_region_examples():
    assert region_upper_bound(ArchShape.uniform([4], "ff", 2)) == 11
    assert region_upper_bound(ArchShape.uniform([4], "intra2", 2)) == 29


def test_region_n1_ff_equals_piece_bound():
    for widths in ([3], [3, 5], [4, 4, 1]):
        shape = ArchShape.uniform(widths, "ff")
        assert region_upper_bound(shape) == prod(w + 1 for w in widths)


@pytest.mark.parametrize("widths, want", [([3], 8), ([3, 3], 50), ([1], 2), ([2, 4], 46)])
def test_dense_lower(widths, want):
    assert dense_lower_bound(widths) == want


def test_dense_has_no_upper():
    with pytest.raises(HypothesisViolation):
        piece_upper_bound(ArchShape.uniform([3], "dense"))


@pytest.mark.parametrize("shape", [
    ArchShape.uniform([3], "intra2"),
    ArchShape.uniform([], "ff"),
    ArchShape.uniform([2], "resnet"),
    ArchShape((1, 2), ("resnet", "ff")),
    ArchShape.uniform([0], "ff"),
])
def test_hypothesis_violations(shape):
    with pytest.raises(HypothesisViolation):
        piece_upper_bound(shape)


def test_piece_bound_rejects_multivariate():
    with pytest.raises(HypothesisViolation):
        piece_upper_bound(ArchShape.uniform([2], "ff", input_dim=2))


def test_construction_lower_above_upper():
    with pytest.raises(ValueError):
        piece_upper_bound(ArchShape.uniform([2], "ff"), construction_lower=4)
    assert piece_upper_bound(ArchShape.uniform([2], "ff"), 3).construction_lower == 3


@pytest.mark.parametrize("alias, mode", [("1", "ff"), ("pairwise", "intra2"), ("dense_intra", "dense")])
def test_mode_aliases(alias, mode):
    assert normalize_mode(alias) == mode
    with pytest.raises(ValueError):
        normalize_mode("triple")


even = st.integers(1, 8).map(lambda i: 2 * i)


@given(st.lists(even, min_size=1, max_size=4), st.integers(0, 3), st.integers(1, 4))
def test_monotone_in_width(widths, i, n):
    i %= len(widths)
    for mode in ("ff", "intra2"):
        bigger = list(widths)
        bigger[i] += 2
        lo, hi = ArchShape.uniform(widths, mode, n), ArchShape.uniform(bigger, mode, n)
        assert region_upper_bound(lo) <= region_upper_bound(hi)
        if n == 1 and not (mode == "ff" and all(w == 2 for w in widths)):
            assert piece_upper_bound(lo).upper <= piece_upper_bound(hi).upper


@given(st.lists(even, min_size=1, max_size=4))
def test_monotone_in_depth(widths):
    for mode in ("ff", "intra2", "all"):
        a = piece_upper_bound(ArchShape.uniform(widths, mode)).upper
        b = piece_upper_bound(ArchShape.uniform(widths + [2], mode)).upper
        assert a <= b


@given(st.lists(even, min_size=1, max_size=4), st.integers(1, 4))
def test_linking_raises_bound(widths, n):
    ff, intra = ArchShape.uniform(widths, "ff", n), ArchShape.uniform(widths, "intra2", n)
    assert region_upper_bound(ff) < region_upper_bound(intra)
    if n == 1:
        assert piece_upper_bound(ff).upper < piece_upper_bound(intra).upper
        assert piece_upper_bound(intra).upper <= piece_upper_bound(
            ArchShape.uniform(widths, "all")).upper
