"""Flooding belief propagation over GF(q) on a Tanner graph.

Messages live in the probability domain, one length-q vector per edge and
direction. alpha(i -> j) and beta(j -> i) are both indexed by the value of the
symbol s_i; the check update moves them into the constraint frame (values of
h_ji * s_i) and back.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
import logging
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import hadamard

from .gf import Field
from .tanner import TannerGraph, syndrome


DEFAULT_MAX_ITERATIONS = 100
DIRECTIONS = ("forward", "backward")


class DecodeStatus(str, Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"


@dataclass(frozen=True, eq=False)
class DecodeOutcome:
    decision: np.ndarray
    status: DecodeStatus
    iterations_used: int
    posteriors: np.ndarray

    @property
    def converged(self) -> bool:
        return self.status is DecodeStatus.CONVERGED


@lru_cache(maxsize=None)
def _hadamard_matrix(q: int) -> np.ndarray:
    # Sylvester ordering: entry (a, b) is (-1)^popcount(a & b)
    return hadamard(q).astype(np.float64)


def walsh_hadamard(vectors: np.ndarray) -> np.ndarray:
    """Walsh-Hadamard transform along the last axis; XOR-convolution becomes a product."""
    values = np.asarray(vectors, dtype=np.float64)
    return values @ _hadamard_matrix(values.shape[-1])


def _normalize(vectors: np.ndarray) -> tuple[np.ndarray, int]:
    """Rows scaled to sum 1; rows with no mass become uniform. Returns the fallback count."""
    totals = vectors.sum(axis=-1, keepdims=True)
    degenerate = ~(np.isfinite(totals) & (totals > 0))
    q = vectors.shape[-1]
    safe = np.where(degenerate, 1.0, totals)
    result = np.where(degenerate, 1.0 / q, vectors / safe)
    return result, int(degenerate.sum())


def _all_resolved(posteriors: np.ndarray) -> bool:
    """True when every symbol has a unique most likely value; tied symbols carry no decision."""
    peaks = posteriors == posteriors.max(axis=1, keepdims=True)
    return bool(np.all(peaks.sum(axis=1) == 1))


def _exclusive_products(stacked: np.ndarray) -> np.ndarray:
    """``out[:, k]`` is the product of ``stacked[:, k']`` over all k' != k."""
    ones = np.ones_like(stacked[:, :1])
    prefix = np.cumprod(np.concatenate([ones, stacked[:, :-1]], axis=1), axis=1)
    tail = np.concatenate([stacked[:, 1:], ones], axis=1)
    suffix = np.flip(np.cumprod(np.flip(tail, axis=1), axis=1), axis=1)
    return prefix * suffix


def variable_update(
    gamma: np.ndarray,
    incoming: Sequence[np.ndarray],
    logger: Optional[logging.LoggerAdapter] = None,
) -> np.ndarray:
    """alpha(i -> j): channel vector times the check messages from every j' != j."""
    product = np.array(gamma, dtype=np.float64, copy=True)
    for message in incoming:
        product = product * np.asarray(message, dtype=np.float64)
    result, degenerate = _normalize(product)
    if degenerate:
        log = logger or logging.getLogger("nbldpc_bicm")
        log.warning("decoder_degenerate", extra={"event": "decoder_degenerate", "vectors": degenerate})
    return result


def permute_by_coefficient(
    msg: np.ndarray,
    h: int,
    field: Field,
    direction: str = "forward",
) -> np.ndarray:
    """Reindex a message by the edge label: entry a moves to h*a (forward) or h^-1*a (backward)."""
    if direction not in DIRECTIONS:
        raise ValueError(f"unknown direction: {direction}")
    if h == 0:
        raise ValueError("edge coefficient must be nonzero")
    values = np.asarray(msg)
    if values.shape[-1] != field.q:
        raise ValueError(f"expected length-{field.q} messages, got {values.shape[-1]}")
    source = field.inv(h) if direction == "forward" else int(h)
    return values[..., field.mul_table[source]]


def check_update(
    incoming: Sequence[np.ndarray],
    field: Optional[Field] = None,
    h_target: Optional[int] = None,
) -> np.ndarray:
    """Distribution of the GF(q) sum of independent symbols given in the constraint frame.

    With ``h_target`` the result is moved back to the frame of the target symbol.
    No incoming messages means the sum is certainly zero.
    """
    if h_target is not None and field is None:
        raise ValueError("moving to the target frame needs the field")
    if len(incoming) == 0 and field is None:
        raise ValueError("cannot size an empty check update without the field")
    q = field.q if field is not None else len(incoming[0])
    spectrum = np.ones(q)
    for message in incoming:
        spectrum = spectrum * walsh_hadamard(message)
    convolved = np.clip(walsh_hadamard(spectrum) / q, 0.0, None)
    result, _ = _normalize(convolved)
    if h_target is not None:
        result = permute_by_coefficient(result, h_target, field, "backward")
    return result


class BeliefPropagationDecoder:
    """Vectorized flooding BP for one Tanner graph.

    Per-edge permutation indices and the padded check/symbol edge tables are
    built once; ``decode`` keeps no state between calls.
    """

    def __init__(self, graph: TannerGraph, logger: Optional[logging.LoggerAdapter] = None) -> None:
        self.graph = graph
        self.logger = logger or logging.getLogger("nbldpc_bicm")
        field = graph.field
        n_edges = graph.n_edges
        edge_ids = np.arange(n_edges)

        # to_check[e, b] = alpha index holding the mass of h_e * s = b
        self._to_check = field.mul_table[field.inv_table[graph.coeffs]]
        # to_symbol[e, a] = constraint-frame index of h_e * a
        self._to_symbol = field.mul_table[graph.coeffs]

        # padded slots point at row n_edges, a neutral message
        check_starts = np.concatenate([[0], np.cumsum(graph.check_degrees)[:-1]]).astype(np.int64)
        self._check_slots = np.full((graph.n_checks, max(graph.dc, 1)), n_edges, dtype=np.int64)
        self._check_slots[graph.checks, edge_ids - check_starts[graph.checks]] = edge_ids

        by_symbol = np.argsort(graph.symbols, kind="stable")
        symbol_starts = np.concatenate([[0], np.cumsum(graph.symbol_degrees)[:-1]]).astype(np.int64)
        owners = graph.symbols[by_symbol]
        self._symbol_slots = np.full((graph.n_symbols, max(graph.dv, 1)), n_edges, dtype=np.int64)
        self._symbol_slots[owners, np.arange(n_edges) - symbol_starts[owners]] = by_symbol

        self._check_mask = self._check_slots < n_edges
        self._symbol_mask = self._symbol_slots < n_edges

    def decode(
        self,
        gammas: np.ndarray,
        max_iter: int = DEFAULT_MAX_ITERATIONS,
        early_stop: bool = True,
    ) -> DecodeOutcome:
        graph = self.graph
        q = graph.field.q
        likelihoods = np.asarray(gammas, dtype=np.float64)
        if likelihoods.shape != (graph.n_symbols, q):
            raise ValueError(f"expected ({graph.n_symbols}, {q}) likelihoods, got {likelihoods.shape}")
        if max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        likelihoods, degenerate = _normalize(likelihoods)

        beta = np.full((graph.n_edges, q), 1.0 / q)
        decision = np.argmax(likelihoods, axis=1)
        posteriors = likelihoods
        status = DecodeStatus.MAX_ITERATIONS
        iterations = 0

        for iterations in range(1, max_iter + 1):
            alpha, fallbacks = self._variable_half(likelihoods, beta)
            degenerate += fallbacks
            beta, fallbacks = self._check_half(alpha)
            degenerate += fallbacks
            posteriors, fallbacks = self._posteriors(likelihoods, beta)
            degenerate += fallbacks
            decision = np.argmax(posteriors, axis=1)
            if _all_resolved(posteriors) and not np.any(syndrome(graph, decision)):
                status = DecodeStatus.CONVERGED
                if early_stop:
                    break
            else:
                status = DecodeStatus.MAX_ITERATIONS

        if degenerate:
            self.logger.warning(
                "decoder_degenerate",
                extra={"event": "decoder_degenerate", "vectors": degenerate, "iterations": iterations},
            )
        return DecodeOutcome(
            decision=decision.astype(np.int64),
            status=status,
            iterations_used=iterations,
            posteriors=posteriors,
        )

    def _gather_beta(self, beta: np.ndarray) -> np.ndarray:
        # max-normalized so long products do not underflow
        scaled = beta / beta.max(axis=1, keepdims=True)
        padded = np.vstack([scaled, np.ones((1, beta.shape[1]))])
        return padded[self._symbol_slots]

    def _variable_half(self, likelihoods: np.ndarray, beta: np.ndarray) -> tuple[np.ndarray, int]:
        stacked = self._gather_beta(beta)
        extrinsic = _exclusive_products(stacked) * likelihoods[:, None, :]
        alpha = np.empty_like(beta)
        alpha[self._symbol_slots[self._symbol_mask]] = extrinsic[self._symbol_mask]
        return _normalize(alpha)

    def _check_half(self, alpha: np.ndarray) -> tuple[np.ndarray, int]:
        q = alpha.shape[1]
        framed = np.take_along_axis(alpha, self._to_check, axis=1)
        # the transform of a point mass at 0 is all ones
        spectra = np.vstack([walsh_hadamard(framed), np.ones((1, q))])
        extrinsic = _exclusive_products(spectra[self._check_slots])
        sums = np.empty_like(alpha)
        sums[self._check_slots[self._check_mask]] = extrinsic[self._check_mask]
        convolved = np.clip(walsh_hadamard(sums) / q, 0.0, None)
        beta = np.take_along_axis(convolved, self._to_symbol, axis=1)
        return _normalize(beta)

    def _posteriors(self, likelihoods: np.ndarray, beta: np.ndarray) -> tuple[np.ndarray, int]:
        return _normalize(likelihoods * self._gather_beta(beta).prod(axis=1))


def decode(
    g: TannerGraph,
    gammas: np.ndarray,
    max_iter: int = DEFAULT_MAX_ITERATIONS,
    early_stop: bool = True,
) -> DecodeOutcome:
    return BeliefPropagationDecoder(g).decode(gammas, max_iter=max_iter, early_stop=early_stop)
