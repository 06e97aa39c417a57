import json
import math

import pytest

from src.results_store import (
    RESULTS_HEADER,
    ResultsFileError,
    ResultsWriter,
    build_manifest,
    format_row,
    manifest_path_for,
    read_manifest,
    read_results,
    stale_inputs,
    write_manifest,
    write_results,
)
from src.sim import FerRecord


def record(ebn0_db, frames, detected, undetected, bit_errors=7):
    errors = detected + undetected
    return FerRecord(
        ebn0_db=ebn0_db,
        frames=frames,
        frame_errors=errors,
        detected_errors=detected,
        undetected_errors=undetected,
        bit_errors=bit_errors,
        mean_iterations=3.125,
        fer=errors / frames,
        detected_pct=detected / errors if errors else math.nan,
        ci_lo=0.001,
        ci_hi=0.2,
    )


def test_results_file_layout(tmp_path):
    path = tmp_path / "run.csv"
    write_results(path, [record(14.0, 3000, 99, 1)])
    lines = path.read_text(encoding="ascii").splitlines()
    assert lines[0] == ",".join(RESULTS_HEADER)
    assert lines[1] == "14,3000,100,99,1,7,0.03333333333,0.99,3.125,0.001,0.2"


def test_results_rewrite_is_byte_identical(tmp_path):
    first = tmp_path / "first.csv"
    second = tmp_path / "second.csv"
    write_results(first, [record(14.0, 3000, 99, 1), record(14.5, 1_000_000, 0, 0)])
    loaded = read_results(first)
    write_results(second, loaded)
    assert first.read_bytes() == second.read_bytes()
    assert math.isnan(loaded[1].detected_pct)


def test_writer_flushes_each_row(tmp_path):
    path = tmp_path / "stream.csv"
    with ResultsWriter(path) as writer:
        writer.write(record(10.0, 100, 50, 0))
        assert len(path.read_text(encoding="ascii").splitlines()) == 2


def test_read_results_rejects_bad_files(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("ebn0,fer\n1,0.5\n", encoding="ascii")
    with pytest.raises(ResultsFileError):
        read_results(path)
    path.write_text(",".join(RESULTS_HEADER) + "\n1,2\n", encoding="ascii")
    with pytest.raises(ResultsFileError):
        read_results(path)
    row = format_row(record(1.0, 10, 1, 0))
    row[1] = "ten"
    path.write_text(",".join(RESULTS_HEADER) + "\n" + ",".join(row) + "\n", encoding="ascii")
    with pytest.raises(ResultsFileError):
        read_results(path)


def test_manifest_roundtrip_and_staleness(tmp_path):
    code = tmp_path / "code.txt"
    code.write_text("16 24 8 2 6 19 11 6\n", encoding="ascii")
    results = tmp_path / "run.csv"
    config = {"code_path": str(code), "interleaver_path": None, "master_seed": 5}

    manifest = build_manifest(config, results)
    path = manifest_path_for(results)
    assert path.name == "run.csv.manifest.json"
    write_manifest(path, manifest)
    loaded = read_manifest(path)
    assert loaded == manifest
    assert loaded.master_seed == 5
    assert loaded.interleaver_sha256 is None
    assert stale_inputs(loaded) == []

    code.write_text("16 24 8 2 6 19 12 6\n", encoding="ascii")
    assert stale_inputs(loaded) == [str(code)]


def test_manifest_is_ascii_json(tmp_path):
    code = tmp_path / "code.txt"
    code.write_text("x\n", encoding="ascii")
    path = tmp_path / "m.json"
    write_manifest(path, build_manifest({"code_path": str(code), "master_seed": 1}, "out.csv"))
    payload = json.loads(path.read_bytes().decode("ascii"))
    assert len(payload["code_sha256"]) == 64


def test_read_manifest_rejects_other_json(tmp_path):
    path = tmp_path / "m.json"
    path.write_text('{"hello": 1}', encoding="utf-8")
    with pytest.raises(ResultsFileError):
        read_manifest(path)
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ResultsFileError):
        read_manifest(path)
