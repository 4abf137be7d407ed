import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from intralink.arrangement2d import (RegionError, centroid, check_centroids, check_region_bound,
                                     check_tiling, enumerate_regions, fuzz_lift_oracle,
                                     fuzz_region_bound, lift_to_2d, polygon_area, to_json_dict,
                                     to_svg)
from intralink.network import LayerSpec, NetworkSpec, forward_symbolic
from intralink.suite import generic_four_lines
from intralink.verify import FuzzConfig, random_net

BOX = (-2, 2, -2, 2)


def test_polygon_helpers():
    square = [(0, 0), (2, 0), (2, 2), (0, 2)]
    assert polygon_area(square) == 4
    assert centroid(square) == (1, 1)
    tri = [(F(0), F(0)), (F(3), F(0)), (F(0), F(3))]
    assert polygon_area(tri) == F(9, 2)
    assert centroid(tri) == (1, 1)


def test_generic_four_lines():
    dec = enumerate_regions(generic_four_lines(), BOX)
    assert dec.merged_region_count == 11
    assert dec.activation_cell_count == 11
    assert check_tiling(dec)
    assert check_centroids(generic_four_lines(), dec)


def test_single_relu_two_regions():
    net = NetworkSpec.make([LayerSpec.make([[1, 1]], [0])], [1], input_dim=2)
    dec = enumerate_regions(net, BOX)
    assert dec.merged_region_count == 2


def test_cancelling_neurons_merge():
    # s(x) - s(x) is identically zero: one region despite the activation cut
    net = NetworkSpec.make([LayerSpec.make([[1, 0], [1, 0]], [0, 0])], [1, -1], input_dim=2)
    dec = enumerate_regions(net, BOX)
    assert dec.activation_cell_count == 2
    assert dec.merged_region_count == 1


def test_linked_pair_in_plane():
    layer = LayerSpec.make([[1, 0], [0, 1]], [0, 0], link_group=2)
    net = NetworkSpec.make([layer], [1, 1], input_dim=2)
    dec = enumerate_regions(net, BOX)
    assert check_tiling(dec) and check_centroids(net, dec)
    assert dec.merged_region_count <= check_region_bound(net, BOX).upper_bound


@pytest.mark.parametrize("seed", range(10))
def test_random_decompositions_are_tilings(seed):
    rng = random.Random(f"tile:{seed}")
    net = random_net(rng, FuzzConfig(seed, max_width=4, max_depth=2), rng.choice(["ff", "intra2"]), 2)
    dec = enumerate_regions(net, BOX)
    assert check_tiling(dec)
    assert check_centroids(net, dec)
    assert check_region_bound(net, BOX).ok
    assert dec.merged_region_count <= dec.activation_cell_count


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_lift_matches_piece_count(seed):
    rng = random.Random(f"lift-prop:{seed}")
    net = random_net(rng, FuzzConfig(seed, max_width=4, max_depth=3), rng.choice(["ff", "intra2"]))
    f = forward_symbolic(net)
    lo = (f.xs[0] if f.xs else 0) - 1
    hi = (f.xs[-1] if f.xs else 0) + 1
    dec = enumerate_regions(lift_to_2d(net), (lo, hi, -1, 1))
    assert dec.merged_region_count == f.num_pieces


def test_fuzzers_clean():
    assert fuzz_region_bound(FuzzConfig(1, 30, max_width=4, max_depth=2)).ok
    assert fuzz_lift_oracle(FuzzConfig(1, 20, max_width=4, max_depth=3)).ok


def test_rejects_bad_inputs():
    with pytest.raises(RegionError):
        enumerate_regions(generic_four_lines(), (1, 0, 0, 1))
    univariate = NetworkSpec.make([LayerSpec.make([[1]], [0])], [1])
    with pytest.raises(RegionError):
        enumerate_regions(univariate, BOX)
    with pytest.raises(RegionError):
        lift_to_2d(generic_four_lines())


def test_exports():
    dec = enumerate_regions(generic_four_lines(), BOX)
    doc = to_json_dict(dec)
    assert doc["merged_region_count"] == 11
    assert len(doc["cells"]) == dec.activation_cell_count
    assert all("/" in v for v in doc["cells"][0]["vertices"][0])
    svg = to_svg(dec)
    assert svg.startswith("<svg") and svg.count("<polygon") == len(dec.cells)
    assert to_svg(dec) == svg
