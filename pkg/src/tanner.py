"""Non-binary Tanner graphs: PEG construction, girth, syndrome, encoding, code files."""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property
import logging
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .gf import Field, field_new
from .graph_utils import (
    build_adjacency,
    bfs_depths,
    format_girth,
    parse_girth,
    pick_farthest,
    shortest_cycle,
)


MAX_COEFFICIENT_REDRAWS = 32
MAX_TOPOLOGY_ATTEMPTS = 64


class ConstructionError(Exception):
    pass


class RankDeficientError(ConstructionError):
    pass


class CodeFileError(ValueError):
    pass


@dataclass(frozen=True)
class SystematicEncoder:
    info_positions: np.ndarray
    parity_positions: np.ndarray
    parity_matrix: np.ndarray  # M x K, parity[r] = sum_c parity_matrix[r, c] * message[c]


@dataclass(frozen=True, eq=False)
class TannerGraph:
    """Sparse parity-check matrix H in edge-list form.

    Edge e connects constraint ``checks[e]`` to symbol ``symbols[e]`` with the
    nonzero label ``coeffs[e]``; edges are sorted by (check, symbol).
    """

    field: Field
    n_symbols: int
    n_checks: int
    checks: np.ndarray
    symbols: np.ndarray
    coeffs: np.ndarray
    seed: int = 0

    @classmethod
    def from_edges(
        cls,
        field: Field,
        n_symbols: int,
        n_checks: int,
        edges: Iterable[Tuple[int, int, int]],
        seed: int = 0,
    ) -> "TannerGraph":
        triples = sorted((int(j), int(i), int(h)) for j, i, h in edges)
        array = np.array(triples, dtype=np.int64).reshape(-1, 3)
        graph = cls(
            field=field,
            n_symbols=int(n_symbols),
            n_checks=int(n_checks),
            checks=array[:, 0].copy(),
            symbols=array[:, 1].copy(),
            coeffs=array[:, 2].copy(),
            seed=int(seed),
        )
        graph.validate()
        return graph

    def with_coefficients(self, coeffs: np.ndarray) -> "TannerGraph":
        return replace(self, coeffs=np.asarray(coeffs, dtype=np.int64))

    @property
    def n_edges(self) -> int:
        return int(self.checks.size)

    @property
    def n_info(self) -> int:
        return self.n_symbols - self.n_checks

    @property
    def rate(self) -> float:
        return 1.0 - self.n_checks / self.n_symbols

    @property
    def n_bits(self) -> int:
        return self.n_symbols * self.field.p

    @cached_property
    def symbol_degrees(self) -> np.ndarray:
        return np.bincount(self.symbols, minlength=self.n_symbols)

    @cached_property
    def check_degrees(self) -> np.ndarray:
        return np.bincount(self.checks, minlength=self.n_checks)

    @property
    def dv(self) -> int:
        return int(self.symbol_degrees.max(initial=0))

    @property
    def dc(self) -> int:
        return int(self.check_degrees.max(initial=0))

    @property
    def is_regular(self) -> bool:
        return bool(
            np.all(self.symbol_degrees == self.dv) and np.all(self.check_degrees == self.dc)
        )

    @cached_property
    def adjacency(self):
        """Undirected adjacency, symbols 0..N-1 then checks N..N+M-1."""
        pairs = zip(self.symbols.tolist(), (self.checks + self.n_symbols).tolist())
        return build_adjacency(self.n_symbols + self.n_checks, pairs)

    def parity_check_matrix(self) -> np.ndarray:
        matrix = np.zeros((self.n_checks, self.n_symbols), dtype=np.int64)
        matrix[self.checks, self.symbols] = self.coeffs
        return matrix

    def validate(self, require_regular: bool = False) -> None:
        q = self.field.q
        if self.n_symbols < 1 or self.n_checks < 0:
            raise ConstructionError("graph needs at least one symbol-node")
        if np.any(self.coeffs <= 0) or np.any(self.coeffs >= q):
            raise ConstructionError("edge coefficients must be nonzero symbols")
        if np.any(self.checks < 0) or np.any(self.checks >= self.n_checks):
            raise ConstructionError("constraint index out of range")
        if np.any(self.symbols < 0) or np.any(self.symbols >= self.n_symbols):
            raise ConstructionError("symbol index out of range")
        pairs = self.checks * self.n_symbols + self.symbols
        if np.unique(pairs).size != pairs.size:
            raise ConstructionError("parallel edges between a symbol and a constraint")
        if require_regular and not self.is_regular:
            raise ConstructionError("graph is not degree-regular")

    @cached_property
    def encoder(self) -> SystematicEncoder:
        reduced, pivots = row_reduce(self.field, self.parity_check_matrix())
        if len(pivots) < self.n_checks:
            raise RankDeficientError(
                f"parity-check matrix has rank {len(pivots)} < {self.n_checks}"
            )
        pivot_set = set(pivots)
        info = np.array([c for c in range(self.n_symbols) if c not in pivot_set], dtype=np.int64)
        return SystematicEncoder(
            info_positions=info,
            parity_positions=np.array(pivots, dtype=np.int64),
            parity_matrix=reduced[:, info],
        )


def row_reduce(field: Field, matrix: np.ndarray) -> Tuple[np.ndarray, List[int]]:
    """Gauss-Jordan elimination over GF(q); returns the nonzero RREF rows and pivot columns."""
    reduced = np.array(matrix, dtype=np.int64, copy=True)
    n_rows, n_cols = reduced.shape
    mul = field.mul_table
    pivots: List[int] = []
    row = 0
    for col in range(n_cols):
        if row == n_rows:
            break
        nonzero = np.flatnonzero(reduced[row:, col])
        if nonzero.size == 0:
            continue
        pivot = row + int(nonzero[0])
        if pivot != row:
            reduced[[row, pivot]] = reduced[[pivot, row]]
        reduced[row] = mul[field.inv_table[reduced[row, col]], reduced[row]]
        others = np.flatnonzero(reduced[:, col])
        others = others[others != row]
        if others.size:
            reduced[others] ^= mul[reduced[others, col][:, None], reduced[row][None, :]]
        pivots.append(col)
        row += 1
    return reduced[:row], pivots


def gf_rank(field: Field, matrix: np.ndarray) -> int:
    return len(row_reduce(field, matrix)[1])


def peg_construct(
    n_symbols: int,
    dv: int,
    dc: int,
    field: Field,
    rng: np.random.Generator,
    seed: int = 0,
    min_girth: float = 4,
    logger: Optional[logging.LoggerAdapter] = None,
) -> TannerGraph:
    """Build a (dv, dc)-regular graph by progressive edge growth.

    Each new edge of a symbol-node goes to a constraint-node as far as possible
    from it in the current graph, ties broken by lowest degree then uniformly.
    The topology is regrown while its girth is below ``min_girth``.
    Coefficients are uniform over the nonzero symbols and re-drawn until H has
    full row rank; re-draws keep the topology.
    """
    log = logger or logging.getLogger("nbldpc_bicm")
    if n_symbols < 1 or dv < 1 or dc < 1:
        raise ConstructionError("N, dv and dc must be positive")
    if (n_symbols * dv) % dc:
        raise ConstructionError(
            f"N*dv = {n_symbols * dv} is not divisible by dc = {dc}"
        )
    n_checks = n_symbols * dv // dc
    if dv > n_checks or dc > n_symbols:
        raise ConstructionError(
            f"infeasible degrees: dv={dv} with M={n_checks}, dc={dc} with N={n_symbols}"
        )

    graph = None
    for attempt in range(MAX_TOPOLOGY_ATTEMPTS):
        edges = _grow_edges(n_symbols, n_checks, dv, dc, rng)
        if edges is None:
            continue
        checks = np.array([j for j, _i in edges], dtype=np.int64)
        symbols = np.array([i for _j, i in edges], dtype=np.int64)
        order = np.lexsort((symbols, checks))
        candidate = TannerGraph(
            field=field,
            n_symbols=n_symbols,
            n_checks=n_checks,
            checks=checks[order],
            symbols=symbols[order],
            coeffs=np.ones(len(edges), dtype=np.int64),
            seed=int(seed),
        )
        achieved = girth(candidate)
        if achieved >= min_girth:
            graph = candidate
            break
        log.info(
            "code_regrow",
            extra={"event": "code_regrow", "attempt": attempt + 1, "girth": achieved},
        )
    if graph is None:
        raise ConstructionError(
            f"progressive edge growth found no regular graph with girth >= {min_girth}"
        )

    matrix_shape = (n_checks, n_symbols)
    for draw in range(MAX_COEFFICIENT_REDRAWS):
        coeffs = rng.integers(1, field.q, size=graph.n_edges)
        candidate = graph.with_coefficients(coeffs)
        matrix = np.zeros(matrix_shape, dtype=np.int64)
        matrix[candidate.checks, candidate.symbols] = coeffs
        if gf_rank(field, matrix) == n_checks:
            candidate.validate(require_regular=True)
            return candidate
        log.info("code_redraw", extra={"event": "code_redraw", "draw": draw + 1})
    raise RankDeficientError(
        f"no full-rank coefficient assignment after {MAX_COEFFICIENT_REDRAWS} draws"
    )


def _grow_edges(
    n_symbols: int,
    n_checks: int,
    dv: int,
    dc: int,
    rng: np.random.Generator,
) -> Optional[List[Tuple[int, int]]]:
    adjacency: List[List[Tuple[int, int]]] = [[] for _ in range(n_symbols + n_checks)]
    check_degree = np.zeros(n_checks, dtype=np.int64)
    all_checks = np.arange(n_checks)
    edges: List[Tuple[int, int]] = []

    for symbol in range(n_symbols):
        for _k in range(dv):
            depth = bfs_depths(adjacency, symbol)[n_symbols:]
            open_checks = check_degree < dc
            for neighbor, _edge in adjacency[symbol]:
                open_checks[neighbor - n_symbols] = False
            candidates = all_checks[open_checks]
            if candidates.size == 0:
                return None
            check = pick_farthest(candidates, depth, check_degree, rng)
            edge_id = len(edges)
            adjacency[symbol].append((n_symbols + check, edge_id))
            adjacency[n_symbols + check].append((symbol, edge_id))
            check_degree[check] += 1
            edges.append((check, symbol))
    return edges


def girth(graph: TannerGraph) -> float:
    return shortest_cycle(graph.adjacency)


def syndrome(graph: TannerGraph, symbols: Sequence[int]) -> np.ndarray:
    word = np.asarray(symbols, dtype=np.int64)
    if word.shape != (graph.n_symbols,):
        raise ValueError(f"expected {graph.n_symbols} symbols, got shape {word.shape}")
    products = graph.field.mul_table[graph.coeffs, word[graph.symbols]]
    result = np.zeros(graph.n_checks, dtype=np.int64)
    np.bitwise_xor.at(result, graph.checks, products)
    return result


def encode(graph: TannerGraph, message: Sequence[int]) -> np.ndarray:
    encoder = graph.encoder
    info = np.asarray(message, dtype=np.int64)
    if info.shape != (graph.n_info,):
        raise ValueError(f"expected {graph.n_info} message symbols, got shape {info.shape}")
    codeword = np.zeros(graph.n_symbols, dtype=np.int64)
    codeword[encoder.info_positions] = info
    if encoder.parity_positions.size:
        products = graph.field.mul_table[encoder.parity_matrix, info[None, :]]
        codeword[encoder.parity_positions] = np.bitwise_xor.reduce(products, axis=1)
    return codeword


def format_code(graph: TannerGraph) -> str:
    header = " ".join(
        [
            str(graph.field.q),
            str(graph.n_symbols),
            str(graph.n_checks),
            str(graph.dv),
            str(graph.dc),
            str(graph.field.primitive_poly),
            str(graph.seed),
            format_girth(girth(graph)),
        ]
    )
    lines = [header]
    lines.extend(
        f"{j} {i} {h}"
        for j, i, h in zip(graph.checks.tolist(), graph.symbols.tolist(), graph.coeffs.tolist())
    )
    return "\n".join(lines) + "\n"


def write_code(path: str | Path, graph: TannerGraph) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(format_code(graph), encoding="ascii")


def parse_code(text: str) -> TannerGraph:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise CodeFileError("code file is empty")
    header = lines[0].split()
    if len(header) != 8:
        raise CodeFileError("code header must be: q N M dv dc primitive_poly seed girth")
    try:
        q, n_symbols, n_checks, dv, dc, poly, seed = (int(value) for value in header[:7])
        recorded_girth = parse_girth(header[7])
        edges = [tuple(int(value) for value in line.split()) for line in lines[1:]]
    except ValueError as exc:
        raise CodeFileError(f"malformed code file: {exc}") from exc
    if q < 2 or q & (q - 1):
        raise CodeFileError(f"field order {q} is not a power of two")
    if any(len(edge) != 3 for edge in edges):
        raise CodeFileError("edge lines must be: j i h_ji")
    try:
        field = field_new(q.bit_length() - 1, poly)
        graph = TannerGraph.from_edges(field, n_symbols, n_checks, edges, seed=seed)
    except (ValueError, ConstructionError) as exc:
        raise CodeFileError(str(exc)) from exc
    if graph.dv != dv or graph.dc != dc:
        raise CodeFileError(f"header degrees ({dv},{dc}) disagree with edges ({graph.dv},{graph.dc})")
    if girth(graph) != recorded_girth:
        raise CodeFileError("recorded girth does not match the graph")
    return graph


def read_code(path: str | Path) -> TannerGraph:
    return parse_code(Path(path).read_text(encoding="ascii"))
