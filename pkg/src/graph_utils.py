"""BFS helpers shared by the Tanner-graph and interleaver constructions."""

from __future__ import annotations

from collections import deque
import math
from typing import Iterable, List, Sequence, Tuple

import numpy as np


UNREACHED = -1

# adjacency[u] is a list of (neighbor, edge_id) pairs
Adjacency = Sequence[Sequence[Tuple[int, int]]]


def build_adjacency(n_nodes: int, edges: Iterable[Tuple[int, int]]) -> List[List[Tuple[int, int]]]:
    adjacency: List[List[Tuple[int, int]]] = [[] for _ in range(n_nodes)]
    for edge_id, (u, v) in enumerate(edges):
        adjacency[u].append((v, edge_id))
        adjacency[v].append((u, edge_id))
    return adjacency


def bfs_depths(adjacency: Adjacency, source: int) -> np.ndarray:
    """Edge distance from ``source`` to every node, UNREACHED if disconnected."""
    depth = np.full(len(adjacency), UNREACHED, dtype=np.int64)
    depth[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        next_depth = depth[u] + 1
        for v, _edge in adjacency[u]:
            if depth[v] == UNREACHED:
                depth[v] = next_depth
                queue.append(v)
    return depth


def shortest_cycle(adjacency: Adjacency) -> float:
    """Girth of an undirected multigraph, ``math.inf`` for a forest.

    Parallel edges count as a cycle of length 2. Runs one BFS per node and
    stops each search once it cannot beat the best cycle found so far.
    """
    n_nodes = len(adjacency)
    best = math.inf
    depth = np.full(n_nodes, UNREACHED, dtype=np.int64)
    parent_edge = np.full(n_nodes, UNREACHED, dtype=np.int64)

    for root in range(n_nodes):
        if not adjacency[root]:
            continue
        touched = [root]
        depth[root] = 0
        queue = deque([root])
        while queue:
            u = queue.popleft()
            if 2 * depth[u] >= best:
                break
            for v, edge in adjacency[u]:
                if edge == parent_edge[u]:
                    continue
                if depth[v] == UNREACHED:
                    depth[v] = depth[u] + 1
                    parent_edge[v] = edge
                    touched.append(v)
                    queue.append(v)
                else:
                    best = min(best, int(depth[u] + depth[v] + 1))
        for node in touched:
            depth[node] = UNREACHED
            parent_edge[node] = UNREACHED
        if best == 2:
            break
    return best


def pick_farthest(
    candidates: np.ndarray,
    depth: np.ndarray,
    degree: np.ndarray,
    rng: np.random.Generator,
) -> int:
    """PEG selection rule: deepest candidate, then lowest degree, then uniform.

    Unreached candidates count as infinitely deep.
    """
    if candidates.size == 0:
        raise ValueError("no candidate nodes to choose from")
    cand_depth = depth[candidates].astype(np.float64)
    cand_depth[cand_depth == UNREACHED] = np.inf
    deepest = candidates[cand_depth == cand_depth.max()]
    lightest = deepest[degree[deepest] == degree[deepest].min()]
    return int(lightest[rng.integers(lightest.size)])


def format_girth(value: float) -> str:
    return "inf" if math.isinf(value) else str(int(value))


def parse_girth(text: str) -> float:
    return math.inf if text == "inf" else int(text)
