"""Bit interleavers between coded symbols and modulation symbols.

A pattern maps coded bit ``i`` (bit ``i % p`` of symbol ``i // p``) to
modulation bit ``perm[i]`` (bit ``perm[i] % m`` of modulation symbol
``perm[i] // m``). Seen as a graph, it joins N_m modulation-nodes of degree m
to N symbol-nodes of degree p.
"""

from __future__ import annotations

from dataclasses import dataclass
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .graph_utils import bfs_depths, build_adjacency, pick_farthest, shortest_cycle
from .tanner import TannerGraph


KINDS = ("identity", "random", "peg")
VISIT_ORDERS = ("natural", "random")


class InterleaverError(ValueError):
    pass


class InterleaverFileError(InterleaverError):
    pass


@dataclass(frozen=True, eq=False)
class InterleaverPattern:
    perm: np.ndarray
    p: int
    m: int
    kind: str
    seed: int = 0

    def __post_init__(self) -> None:
        n = self.perm.size
        if self.kind not in KINDS:
            raise InterleaverError(f"unknown interleaver kind: {self.kind}")
        if self.p < 1 or self.m < 1 or n % self.p or n % self.m:
            raise InterleaverError(f"n = {n} must be a multiple of p = {self.p} and m = {self.m}")
        if not np.array_equal(np.sort(self.perm), np.arange(n)):
            raise InterleaverError("interleaver pattern is not a permutation")

    @property
    def n(self) -> int:
        return int(self.perm.size)

    @property
    def n_symbols(self) -> int:
        return self.n // self.p

    @property
    def n_modulation(self) -> int:
        return self.n // self.m

    @property
    def is_identity(self) -> bool:
        return self.p == self.m and bool(np.array_equal(self.perm, np.arange(self.n)))

    def interleaving_edges(self) -> List[Tuple[int, int]]:
        """(modulation-node, symbol-node) pair carried by each coded bit."""
        coded = np.arange(self.n)
        return list(zip((self.perm // self.m).tolist(), (coded // self.p).tolist()))


def _check_dimensions(n: int, p: int, m: int) -> None:
    if n < 1 or p < 1 or m < 1:
        raise InterleaverError("n, p and m must be positive")
    if n % p or n % m:
        raise InterleaverError(f"n = {n} must equal N*p and N_m*m (p = {p}, m = {m})")


def identity_pattern(n_symbols: int, p: int, m: int) -> InterleaverPattern:
    if p != m:
        raise InterleaverError(f"identity mapping needs m == p, got m = {m}, p = {p}")
    _check_dimensions(n_symbols * p, p, m)
    return InterleaverPattern(perm=np.arange(n_symbols * p), p=p, m=m, kind="identity")


def random_pattern(
    n: int,
    p: int,
    m: int,
    rng: np.random.Generator,
    seed: int = 0,
) -> InterleaverPattern:
    _check_dimensions(n, p, m)
    return InterleaverPattern(perm=rng.permutation(n), p=p, m=m, kind="random", seed=seed)


def peg_pattern(
    graph: TannerGraph,
    p: int,
    m: int,
    rng: np.random.Generator,
    seed: int = 0,
    local_scramble: bool = False,
    order: str = "natural",
    logger: Optional[logging.LoggerAdapter] = None,
) -> InterleaverPattern:
    """Interleaver matched to ``graph`` by progressive edge growth on the global graph.

    Every modulation-node takes its first symbol-node uniformly among those of
    lowest interleaving degree, then each further symbol-node among the deepest
    ones seen from the modulation-node through modulation, symbol and
    constraint nodes. Symbol-nodes already holding p edges are traversed but
    never selected.
    """
    log = logger or logging.getLogger("nbldpc_bicm")
    n_symbols = graph.n_symbols
    n = n_symbols * p
    _check_dimensions(n, p, m)
    if order not in VISIT_ORDERS:
        raise InterleaverError(f"unknown modulation-node order: {order}")
    n_modulation = n // m
    n_tanner = n_symbols + graph.n_checks

    # global node ids: symbols, then constraints, then modulation-nodes
    adjacency = [list(neighbors) for neighbors in graph.adjacency]
    adjacency.extend([] for _ in range(n_modulation))
    next_edge_id = graph.n_edges

    degree = np.zeros(n_symbols, dtype=np.int64)
    all_symbols = np.arange(n_symbols)
    links: List[Tuple[int, int, int, int]] = []
    modulation_links: List[List[int]] = [[] for _ in range(n_modulation)]

    visit = np.arange(n_modulation) if order == "natural" else rng.permutation(n_modulation)
    for k in visit.tolist():
        node = n_tanner + k
        for slot in range(m):
            open_symbols = degree < p
            if not open_symbols.any():
                raise InterleaverError("no symbol-node has residual capacity")
            if slot == 0:
                candidates = all_symbols[open_symbols]
                lightest = candidates[degree[candidates] == degree[candidates].min()]
                symbol = int(lightest[rng.integers(lightest.size)])
            else:
                fresh = open_symbols.copy()
                fresh[modulation_links[k]] = False
                candidates = all_symbols[fresh if fresh.any() else open_symbols]
                depth = bfs_depths(adjacency, node)[:n_symbols]
                symbol = pick_farthest(candidates, depth, degree, rng)
            adjacency[node].append((symbol, next_edge_id))
            adjacency[symbol].append((node, next_edge_id))
            next_edge_id += 1
            links.append((k, slot, symbol, int(degree[symbol])))
            degree[symbol] += 1
            modulation_links[k].append(symbol)

    perm = _assign_bits(links, n_symbols, p, m, rng if local_scramble else None)
    pattern = InterleaverPattern(perm=perm, p=p, m=m, kind="peg", seed=seed)
    log.debug(
        "interleaver_built",
        extra={"event": "interleaver_built", "kind": "peg", "n": n, "multiEdges": multi_edge_count(pattern)},
    )
    return pattern


def _assign_bits(
    links: Sequence[Tuple[int, int, int, int]],
    n_symbols: int,
    p: int,
    m: int,
    scrambler: Optional[np.random.Generator],
) -> np.ndarray:
    """Sequential fill: the t-th edge of a symbol carries its t-th bit (LSB-first),
    the j-th edge of a modulation-node carries its j-th bit.

    ``links`` holds (k, j, symbol, t) per edge. ``scrambler`` reorders the bits
    inside each coded symbol.
    """
    bit_order = np.tile(np.arange(p), (n_symbols, 1))
    if scrambler is not None:
        bit_order = np.array([scrambler.permutation(p) for _ in range(n_symbols)]).reshape(n_symbols, p)
    perm = np.full(n_symbols * p, -1, dtype=np.int64)
    for k, j, symbol, t in links:
        perm[symbol * p + bit_order[symbol, t]] = k * m + j
    if np.any(perm < 0):
        raise InterleaverError("interleaving graph left coded bits unassigned")
    return perm


def global_adjacency(graph: TannerGraph, pattern: InterleaverPattern):
    """Simple global graph: Tanner edges plus one edge per linked (x_k, s_i) pair."""
    if pattern.n_symbols != graph.n_symbols or pattern.p != graph.field.p:
        raise InterleaverError("interleaver does not match the code dimensions")
    n_tanner = graph.n_symbols + graph.n_checks
    pairs = sorted(set(pattern.interleaving_edges()))
    edges = list(zip(graph.symbols.tolist(), (graph.checks + graph.n_symbols).tolist()))
    edges.extend((n_tanner + k, symbol) for k, symbol in pairs)
    return build_adjacency(n_tanner + pattern.n_modulation, edges)


def global_girth(graph: TannerGraph, pattern: InterleaverPattern) -> float:
    return shortest_cycle(global_adjacency(graph, pattern))


def multi_edge_count(pattern: InterleaverPattern) -> int:
    """Number of coded bits whose (x_k, s_i) link repeats an earlier one."""
    edges = pattern.interleaving_edges()
    return len(edges) - len(set(edges))


def degree_profile(pattern: InterleaverPattern) -> Tuple[np.ndarray, np.ndarray]:
    """Edge counts (d_k per modulation-node, d_i per symbol-node)."""
    edges = np.array(pattern.interleaving_edges(), dtype=np.int64).reshape(-1, 2)
    return (
        np.bincount(edges[:, 0], minlength=pattern.n_modulation),
        np.bincount(edges[:, 1], minlength=pattern.n_symbols),
    )


def apply(pattern: InterleaverPattern, bits: np.ndarray) -> np.ndarray:
    values = np.asarray(bits)
    if values.shape[0] != pattern.n:
        raise InterleaverError(f"expected {pattern.n} bits, got {values.shape[0]}")
    out = np.empty_like(values)
    out[pattern.perm] = values
    return out


def deapply(pattern: InterleaverPattern, bits: np.ndarray) -> np.ndarray:
    values = np.asarray(bits)
    if values.shape[0] != pattern.n:
        raise InterleaverError(f"expected {pattern.n} bits, got {values.shape[0]}")
    return values[pattern.perm]


def format_pattern(pattern: InterleaverPattern) -> str:
    lines = [f"{pattern.n} {pattern.p} {pattern.m} {pattern.kind} {pattern.seed}"]
    lines.extend(str(position) for position in pattern.perm.tolist())
    return "\n".join(lines) + "\n"


def write_pattern(path: str | Path, pattern: InterleaverPattern) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(format_pattern(pattern), encoding="ascii")


def parse_pattern(text: str) -> InterleaverPattern:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise InterleaverFileError("interleaver file is empty")
    header = lines[0].split()
    if len(header) != 5:
        raise InterleaverFileError("interleaver header must be: n p m kind seed")
    try:
        n, p, m = (int(value) for value in header[:3])
        seed = int(header[4])
        perm = np.array([int(line) for line in lines[1:]], dtype=np.int64)
    except ValueError as exc:
        raise InterleaverFileError(f"malformed interleaver file: {exc}") from exc
    if perm.size != n:
        raise InterleaverFileError(f"header announces {n} positions, file has {perm.size}")
    try:
        return InterleaverPattern(perm=perm, p=p, m=m, kind=header[3], seed=seed)
    except InterleaverError as exc:
        raise InterleaverFileError(str(exc)) from exc


def read_pattern(path: str | Path) -> InterleaverPattern:
    return parse_pattern(Path(path).read_text(encoding="ascii"))
