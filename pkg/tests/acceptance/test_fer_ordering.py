import os

import numpy as np
import pytest

from src.compare import intervals_disjoint
from src.gf import field_new
from src.interleaver import identity_pattern, peg_pattern, random_pattern
from src.modem_channel import constellation_for
from src.results_store import write_results
from src.sim import SimConfig, Simulator
from src.tanner import peg_construct


def _acceptance_enabled() -> bool:
    return os.getenv("RUN_ACCEPTANCE_TESTS") == "1"


def _workers() -> int:
    return int(os.getenv("ACCEPTANCE_WORKERS", "8"))


def _systems(p, modulation, dc=6, seed=1):
    graph = peg_construct(102, 2, dc, field_new(p), np.random.default_rng(seed), seed=seed, min_girth=6)
    m = constellation_for(modulation).m
    return graph, {
        "none": identity_pattern(graph.n_symbols, p, m),
        "random": random_pattern(graph.n_bits, p, m, np.random.default_rng(7), seed=7),
        "peg": peg_pattern(graph, p, m, np.random.default_rng(7), seed=7),
    }


def _config(modulation, ebn0_db, **overrides):
    values = dict(
        code_path="",
        interleaver_path=None,
        modulation=modulation,
        ebn0_start=ebn0_db,
        ebn0_stop=ebn0_db,
        ebn0_step=1.0,
        max_frames=2_000_000,
        min_frame_errors=100,
        master_seed=2024,
        workers=_workers(),
    )
    values.update(overrides)
    return SimConfig(**values)


def _run(graph, pattern, modulation, config):
    return Simulator(graph, pattern, constellation_for(modulation), config).run_point(config.ebn0_start)


@pytest.mark.acceptance
def test_interleavers_beat_no_interleaver_on_gf64():
    if not _acceptance_enabled():
        pytest.skip("Set RUN_ACCEPTANCE_TESTS=1 to enable")
    ebn0_db = float(os.getenv("ACCEPTANCE_EBN0", "12.0"))
    graph, patterns = _systems(6, "qam64")
    config = _config("qam64", ebn0_db)
    records = {name: _run(graph, pattern, "qam64", config) for name, pattern in patterns.items()}

    none = records["none"]
    assert none.frame_errors >= 100
    for name in ("random", "peg"):
        assert records[name].fer < none.fer
        assert intervals_disjoint(records[name], none)
    assert records["peg"].detected_pct >= records["random"].detected_pct >= none.detected_pct


@pytest.mark.acceptance
def test_gf256_peg_errors_are_detected():
    if not _acceptance_enabled():
        pytest.skip("Set RUN_ACCEPTANCE_TESTS=1 to enable")
    ebn0_db = float(os.getenv("ACCEPTANCE_EBN0_GF256", "14.0"))
    graph, patterns = _systems(8, "qam256")
    record = _run(graph, patterns["peg"], "qam256", _config("qam256", ebn0_db))
    assert record.frame_errors > 0
    assert record.detected_pct >= 0.95


@pytest.mark.acceptance
def test_results_do_not_depend_on_worker_count(tmp_path):
    if not _acceptance_enabled():
        pytest.skip("Set RUN_ACCEPTANCE_TESTS=1 to enable")
    graph, patterns = _systems(6, "qam64")
    outputs = []
    for workers in (1, 8):
        config = _config("qam64", 10.0, ebn0_stop=12.0, max_frames=3000, min_frame_errors=50, workers=workers)
        constellation = constellation_for("qam64")
        records = Simulator(graph, patterns["peg"], constellation, config).run_sweep()
        path = tmp_path / f"workers{workers}.csv"
        write_results(path, records)
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]


@pytest.mark.acceptance
@pytest.mark.parametrize("kind", ["none", "random", "peg"])
def test_noiseless_frames_decode(kind):
    if not _acceptance_enabled():
        pytest.skip("Set RUN_ACCEPTANCE_TESTS=1 to enable")
    graph, patterns = _systems(6, "qam64")
    config = _config("qam64", 60.0, max_frames=1000)
    record = _run(graph, patterns[kind], "qam64", config)
    assert record.frames == 1000
    assert record.frame_errors == 0
