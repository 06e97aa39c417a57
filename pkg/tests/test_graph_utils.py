import math

import numpy as np

from src.graph_utils import (
    UNREACHED,
    bfs_depths,
    build_adjacency,
    format_girth,
    parse_girth,
    pick_farthest,
    shortest_cycle,
)


def test_bfs_depths_on_path_and_isolated_node():
    adjacency = build_adjacency(4, [(0, 1), (1, 2)])
    assert bfs_depths(adjacency, 0).tolist() == [0, 1, 2, UNREACHED]


def test_shortest_cycle_of_square_and_forest():
    assert shortest_cycle(build_adjacency(4, [(0, 1), (1, 2), (2, 3), (3, 0)])) == 4
    assert math.isinf(shortest_cycle(build_adjacency(4, [(0, 1), (1, 2), (1, 3)])))


def test_parallel_edges_form_a_two_cycle():
    assert shortest_cycle(build_adjacency(2, [(0, 1), (0, 1)])) == 2


def test_odd_cycle_is_found():
    assert shortest_cycle(build_adjacency(5, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4)])) == 3


def test_pick_farthest_prefers_depth_then_degree():
    rng = np.random.default_rng(0)
    depth = np.array([1, 3, 3, UNREACHED])
    degree = np.array([0, 2, 1, 5])
    assert pick_farthest(np.array([0, 1, 2]), depth, degree, rng) == 2
    assert pick_farthest(np.array([0, 1, 2, 3]), depth, degree, rng) == 3


def test_girth_text_roundtrip():
    assert format_girth(math.inf) == "inf"
    assert format_girth(6) == "6"
    assert math.isinf(parse_girth("inf"))
    assert parse_girth("8") == 8
