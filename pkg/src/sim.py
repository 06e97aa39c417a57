"""Monte-Carlo frame error rate engine for NB-LDPC coded modulation."""

from __future__ import annotations

from collections import deque
from concurrent.futures import Executor, ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict, dataclass, fields
from datetime import datetime, timezone
from enum import Enum
import itertools
import logging
import math
from typing import Any, Dict, Iterator, List, Optional, Protocol, Tuple

import numpy as np
from scipy.stats import norm
from tqdm import tqdm

from .decoder import DEFAULT_MAX_ITERATIONS, BeliefPropagationDecoder, DecodeOutcome, DecodeStatus
from .interleaver import InterleaverPattern, apply, identity_pattern, read_pattern
from .modem_channel import (
    Constellation,
    bitwise_marginalize,
    constellation_for,
    ebn0_to_esn0,
    ebn0_to_sigma2,
    modulate,
    rayleigh_awgn,
    regroup_bits_to_symbols,
    symbol_likelihoods,
)
from .tanner import TannerGraph, encode, read_code
from .validator import ValidationError, check_consistency


BATCH_SIZE = 32
SWEEP_TOLERANCE = 1e-9


class TrialKind(str, Enum):
    SUCCESS = "success"
    DETECTED = "detected"
    UNDETECTED = "undetected"


@dataclass(frozen=True)
class TrialResult:
    kind: TrialKind
    iterations: int
    bit_errors: int


@dataclass(frozen=True)
class SimConfig:
    code_path: str
    interleaver_path: Optional[str]  # None: no interleaver (identity, m == p)
    modulation: str
    ebn0_start: float
    ebn0_stop: float
    ebn0_step: float
    max_frames: int = 10_000_000
    min_frame_errors: int = 100
    max_iter: int = DEFAULT_MAX_ITERATIONS
    master_seed: int = 0
    workers: int = 1

    def __post_init__(self) -> None:
        if not self.ebn0_step > 0:
            raise ValidationError("ebn0", "step must be positive")
        if self.ebn0_stop < self.ebn0_start:
            raise ValidationError("ebn0", "stop must not be below start")
        for name in ("max_frames", "min_frame_errors", "max_iter", "workers"):
            if getattr(self, name) < 1:
                raise ValidationError(name, "must be at least 1")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SimConfig":
        known = {item.name for item in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValidationError("config", f"unknown keys: {', '.join(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class FerRecord:
    ebn0_db: float
    frames: int
    frame_errors: int
    detected_errors: int
    undetected_errors: int
    bit_errors: int
    mean_iterations: float
    fer: float
    detected_pct: float  # fraction of frame errors that were detected, nan without errors
    ci_lo: float
    ci_hi: float


class RecordSink(Protocol):
    def write(self, record: FerRecord) -> None: ...


def ebn0_points(start: float, stop: float, step: float) -> List[float]:
    if not step > 0:
        raise ValueError("step must be positive")
    if stop < start:
        raise ValueError("stop must not be below start")
    count = int(math.floor((stop - start) / step + SWEEP_TOLERANCE)) + 1
    return [round(start + index * step, 10) for index in range(count)]


def wilson_interval(errors: int, frames: int, confidence: float = 0.95) -> Tuple[float, float]:
    if frames <= 0:
        return 0.0, 1.0
    z = float(norm.ppf(0.5 + confidence / 2.0))
    rate = errors / frames
    z2n = z * z / frames
    center = (rate + z2n / 2.0) / (1.0 + z2n)
    half = z * math.sqrt(rate * (1.0 - rate) / frames + z2n / (4.0 * frames)) / (1.0 + z2n)
    lo = 0.0 if errors == 0 else max(0.0, center - half)
    hi = 1.0 if errors == frames else min(1.0, center + half)
    return lo, hi


def classify(outcome: DecodeOutcome, transmitted: np.ndarray) -> TrialKind:
    if np.array_equal(outcome.decision, transmitted):
        return TrialKind.SUCCESS
    if outcome.status is DecodeStatus.CONVERGED:
        return TrialKind.UNDETECTED
    return TrialKind.DETECTED


def channel_likelihoods(
    graph: TannerGraph,
    pattern: InterleaverPattern,
    constellation: Constellation,
    rho: np.ndarray,
    h: np.ndarray,
    sigma2: float,
) -> np.ndarray:
    """Symbol likelihoods at the decoder input.

    Without an interleaver each symbol owns one constellation point and is
    demapped directly; otherwise bit posteriors are marginalized, de-interleaved
    and regrouped.
    """
    if pattern.is_identity:
        return symbol_likelihoods(rho, h, sigma2, constellation, graph.field)
    bit_probs = bitwise_marginalize(rho, h, sigma2, constellation)
    return regroup_bits_to_symbols(bit_probs, pattern, graph.field)


def run_trial(
    graph: TannerGraph,
    pattern: InterleaverPattern,
    constellation: Constellation,
    sigma2: float,
    rng: np.random.Generator,
    max_iter: int = DEFAULT_MAX_ITERATIONS,
    decoder: Optional[BeliefPropagationDecoder] = None,
) -> TrialResult:
    field = graph.field
    message = rng.integers(0, field.q, size=graph.n_info)
    codeword = encode(graph, message)
    coded_bits = field.symbols_to_bits(codeword).reshape(-1)
    x = modulate(apply(pattern, coded_bits), constellation)
    received = rayleigh_awgn(x, sigma2, rng)
    gammas = channel_likelihoods(graph, pattern, constellation, received.rho, received.h, sigma2)

    outcome = (decoder or BeliefPropagationDecoder(graph)).decode(gammas, max_iter=max_iter)
    kind = classify(outcome, codeword)
    bit_errors = 0
    if kind is not TrialKind.SUCCESS:
        decided = outcome.decision[graph.encoder.info_positions]
        bit_errors = int(field.bit_table[np.bitwise_xor(decided, message)].sum())
    return TrialResult(kind=kind, iterations=outcome.iterations_used, bit_errors=bit_errors)


def trial_rng(master_seed: int, point_index: int, trial_index: int) -> np.random.Generator:
    return np.random.default_rng([master_seed, point_index, trial_index])


@dataclass
class _TrialContext:
    graph: TannerGraph
    pattern: InterleaverPattern
    constellation: Constellation
    max_iter: int
    decoder: BeliefPropagationDecoder

    def run_batch(self, master_seed: int, point_index: int, start: int, stop: int, sigma2: float) -> List[TrialResult]:
        return [
            run_trial(
                self.graph,
                self.pattern,
                self.constellation,
                sigma2,
                trial_rng(master_seed, point_index, trial_index),
                max_iter=self.max_iter,
                decoder=self.decoder,
            )
            for trial_index in range(start, stop)
        ]


_WORKER_CONTEXT: Optional[_TrialContext] = None


def _init_worker(graph: TannerGraph, pattern: InterleaverPattern, constellation: Constellation, max_iter: int) -> None:
    global _WORKER_CONTEXT
    _WORKER_CONTEXT = _TrialContext(graph, pattern, constellation, max_iter, BeliefPropagationDecoder(graph))


def _run_worker_batch(master_seed: int, point_index: int, start: int, stop: int, sigma2: float) -> List[TrialResult]:
    return _WORKER_CONTEXT.run_batch(master_seed, point_index, start, stop, sigma2)


@dataclass
class _PointCounters:
    frames: int = 0
    detected: int = 0
    undetected: int = 0
    bit_errors: int = 0
    iterations: int = 0

    @property
    def frame_errors(self) -> int:
        return self.detected + self.undetected

    def add(self, result: TrialResult) -> None:
        self.frames += 1
        self.iterations += result.iterations
        self.bit_errors += result.bit_errors
        if result.kind is TrialKind.DETECTED:
            self.detected += 1
        elif result.kind is TrialKind.UNDETECTED:
            self.undetected += 1

    def record(self, ebn0_db: float) -> FerRecord:
        errors = self.frame_errors
        ci_lo, ci_hi = wilson_interval(errors, self.frames)
        return FerRecord(
            ebn0_db=ebn0_db,
            frames=self.frames,
            frame_errors=errors,
            detected_errors=self.detected,
            undetected_errors=self.undetected,
            bit_errors=self.bit_errors,
            mean_iterations=self.iterations / self.frames if self.frames else 0.0,
            fer=errors / self.frames if self.frames else 0.0,
            detected_pct=self.detected / errors if errors else math.nan,
            ci_lo=ci_lo,
            ci_hi=ci_hi,
        )


def load_system(config: SimConfig) -> Tuple[TannerGraph, InterleaverPattern, Constellation]:
    """Read the code and interleaver named by ``config`` and check they fit together."""
    graph = read_code(config.code_path)
    constellation = constellation_for(config.modulation)
    if config.interleaver_path is None:
        if constellation.m != graph.field.p:
            raise ValidationError(
                "modulation",
                f"{config.modulation} carries {constellation.m} bits but GF({graph.field.q}) symbols have {graph.field.p}",
            )
        pattern = identity_pattern(graph.n_symbols, graph.field.p, constellation.m)
    else:
        pattern = read_pattern(config.interleaver_path)
    check_consistency(graph, pattern, constellation)
    return graph, pattern, constellation


class Simulator:
    """Runs trials until a point's stop rule fires, one Eb/N0 point after another.

    Trial t of point k always draws from ``trial_rng(seed, k, t)`` and results
    are consumed in trial order, so records do not depend on ``workers``.
    """

    def __init__(
        self,
        graph: TannerGraph,
        pattern: InterleaverPattern,
        constellation: Constellation,
        config: SimConfig,
        logger: Optional[logging.LoggerAdapter] = None,
        progress: bool = False,
    ) -> None:
        self.graph = graph
        self.pattern = pattern
        self.constellation = constellation
        self.config = config
        self.logger = logger or logging.getLogger("nbldpc_bicm")
        self.progress = progress
        self._context = _TrialContext(
            graph, pattern, constellation, config.max_iter, BeliefPropagationDecoder(graph, self.logger)
        )

    def run_sweep(self, sink: Optional[RecordSink] = None) -> List[FerRecord]:
        config = self.config
        started_time = datetime.now(timezone.utc)
        records: List[FerRecord] = []
        points = ebn0_points(config.ebn0_start, config.ebn0_stop, config.ebn0_step)
        with self._executor() as executor:
            for point_index, ebn0_db in enumerate(points):
                record = self._run_point(executor, ebn0_db, point_index)
                records.append(record)
                if sink is not None:
                    sink.write(record)

        finished_time = datetime.now(timezone.utc)
        self.logger.info(
            "sweep_done",
            extra={
                "event": "sweep_done",
                "startedAt": started_time.isoformat(),
                "finishedAt": finished_time.isoformat(),
                "durationMs": int((finished_time - started_time).total_seconds() * 1000),
                "points": len(records),
                "frames": sum(record.frames for record in records),
                "frameErrors": sum(record.frame_errors for record in records),
            },
        )
        return records

    def run_point(self, ebn0_db: float, point_index: int = 0) -> FerRecord:
        with self._executor() as executor:
            return self._run_point(executor, ebn0_db, point_index)

    @contextmanager
    def _executor(self) -> Iterator[Optional[Executor]]:
        if self.config.workers == 1:
            yield None
            return
        with ProcessPoolExecutor(
            max_workers=self.config.workers,
            initializer=_init_worker,
            initargs=(self.graph, self.pattern, self.constellation, self.config.max_iter),
        ) as executor:
            yield executor

    def _run_point(self, executor: Optional[Executor], ebn0_db: float, point_index: int) -> FerRecord:
        config = self.config
        rate = self.graph.rate
        m = self.constellation.m
        sigma2 = ebn0_to_sigma2(ebn0_db, rate, m)
        started_time = datetime.now(timezone.utc)
        self.logger.info(
            "point_started",
            extra={"event": "point_started", "ebn0": ebn0_db, "pointIndex": point_index, "sigma2": sigma2},
        )

        counters = _PointCounters()
        batches = self._batches(executor, point_index, sigma2)
        with tqdm(total=config.max_frames, unit="frame", desc=f"{ebn0_db:g} dB", disable=not self.progress) as bar:
            try:
                for batch in batches:
                    for result in batch:
                        counters.add(result)
                        bar.update(1)
                        if self._should_stop(counters):
                            break
                    if self._should_stop(counters):
                        break
            finally:
                batches.close()

        record = counters.record(ebn0_db)
        finished_time = datetime.now(timezone.utc)
        self.logger.info(
            "point_done",
            extra={
                "event": "point_done",
                "ebn0": ebn0_db,
                "esn0": ebn0_to_esn0(ebn0_db, rate, m),
                "pointIndex": point_index,
                "durationMs": int((finished_time - started_time).total_seconds() * 1000),
                "counts": {
                    "frames": record.frames,
                    "frameErrors": record.frame_errors,
                    "detected": record.detected_errors,
                    "undetected": record.undetected_errors,
                    "bitErrors": record.bit_errors,
                },
                "fer": record.fer,
                "meanIterations": record.mean_iterations,
            },
        )
        return record

    def _should_stop(self, counters: _PointCounters) -> bool:
        return (
            counters.frame_errors >= self.config.min_frame_errors
            or counters.frames >= self.config.max_frames
        )

    def _batches(
        self,
        executor: Optional[Executor],
        point_index: int,
        sigma2: float,
    ) -> Iterator[List[TrialResult]]:
        seed = self.config.master_seed
        max_frames = self.config.max_frames
        starts = iter(range(0, max_frames, BATCH_SIZE))

        if executor is None:
            for start in starts:
                yield self._context.run_batch(seed, point_index, start, min(start + BATCH_SIZE, max_frames), sigma2)
            return

        def submit(start: int):
            stop = min(start + BATCH_SIZE, max_frames)
            return executor.submit(_run_worker_batch, seed, point_index, start, stop, sigma2)

        pending = deque(submit(start) for start in itertools.islice(starts, 2 * self.config.workers))
        try:
            while pending:
                results = pending.popleft().result()
                following = next(starts, None)
                if following is not None:
                    pending.append(submit(following))
                yield results
        finally:
            for future in pending:
                future.cancel()


def run_point(
    cfg: SimConfig,
    ebn0_db: float,
    point_index: int = 0,
    logger: Optional[logging.LoggerAdapter] = None,
) -> FerRecord:
    graph, pattern, constellation = load_system(cfg)
    return Simulator(graph, pattern, constellation, cfg, logger).run_point(ebn0_db, point_index)


def run_sweep(
    cfg: SimConfig,
    sink: Optional[RecordSink] = None,
    logger: Optional[logging.LoggerAdapter] = None,
    progress: bool = False,
) -> List[FerRecord]:
    graph, pattern, constellation = load_system(cfg)
    return Simulator(graph, pattern, constellation, cfg, logger, progress).run_sweep(sink)
