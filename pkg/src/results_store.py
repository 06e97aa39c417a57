"""Results CSV and the JSON run manifest written next to it."""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
import hashlib
import json
from pathlib import Path
from typing import Any, Dict, List, Optional, TextIO

from . import __version__
from .sim import FerRecord


RESULTS_HEADER = (
    "ebn0_db",
    "frames",
    "frame_errors",
    "detected",
    "undetected",
    "bit_errors",
    "fer",
    "detected_pct",
    "mean_iters",
    "ci_lo",
    "ci_hi",
)

MANIFEST_SUFFIX = ".manifest.json"


class ResultsFileError(ValueError):
    pass


def _format_float(value: float) -> str:
    return "%.10g" % value


def format_row(record: FerRecord) -> List[str]:
    return [
        _format_float(record.ebn0_db),
        str(record.frames),
        str(record.frame_errors),
        str(record.detected_errors),
        str(record.undetected_errors),
        str(record.bit_errors),
        _format_float(record.fer),
        _format_float(record.detected_pct),
        _format_float(record.mean_iterations),
        _format_float(record.ci_lo),
        _format_float(record.ci_hi),
    ]


class ResultsWriter:
    """Streams one CSV row per completed point; every row is flushed."""

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self._handle: Optional[TextIO] = None
        self._writer = None

    def __enter__(self) -> "ResultsWriter":
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._handle = self.path.open("w", encoding="ascii", newline="")
        self._writer = csv.writer(self._handle, lineterminator="\n")
        self._writer.writerow(RESULTS_HEADER)
        self._handle.flush()
        return self

    def write(self, record: FerRecord) -> None:
        if self._writer is None:
            raise RuntimeError("results writer is not open")
        self._writer.writerow(format_row(record))
        self._handle.flush()

    def __exit__(self, *exc_info) -> None:
        if self._handle is not None:
            self._handle.close()
        self._handle = None
        self._writer = None


def write_results(path: str | Path, records: List[FerRecord]) -> None:
    with ResultsWriter(path) as writer:
        for record in records:
            writer.write(record)


def read_results(path: str | Path) -> List[FerRecord]:
    with Path(path).open("r", encoding="ascii", newline="") as handle:
        rows = list(csv.reader(handle))
    if not rows or tuple(rows[0]) != RESULTS_HEADER:
        raise ResultsFileError(f"{path}: header must be {','.join(RESULTS_HEADER)}")
    records: List[FerRecord] = []
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != len(RESULTS_HEADER):
            raise ResultsFileError(f"{path}:{line_no}: expected {len(RESULTS_HEADER)} columns")
        try:
            records.append(
                FerRecord(
                    ebn0_db=float(row[0]),
                    frames=int(row[1]),
                    frame_errors=int(row[2]),
                    detected_errors=int(row[3]),
                    undetected_errors=int(row[4]),
                    bit_errors=int(row[5]),
                    fer=float(row[6]),
                    detected_pct=float(row[7]),
                    mean_iterations=float(row[8]),
                    ci_lo=float(row[9]),
                    ci_hi=float(row[10]),
                )
            )
        except ValueError as exc:
            raise ResultsFileError(f"{path}:{line_no}: {exc}") from exc
    return records


def sha256_of(path: str | Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def manifest_path_for(results_path: str | Path) -> Path:
    return Path(str(results_path) + MANIFEST_SUFFIX)


@dataclass(frozen=True)
class RunManifest:
    config: Dict[str, Any]
    code_sha256: str
    interleaver_sha256: Optional[str]
    master_seed: int
    results: str
    tool_version: str = __version__
    created_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())


def build_manifest(config: Dict[str, Any], results_path: str | Path) -> RunManifest:
    interleaver = config.get("interleaver_path")
    return RunManifest(
        config=dict(config),
        code_sha256=sha256_of(config["code_path"]),
        interleaver_sha256=sha256_of(interleaver) if interleaver else None,
        master_seed=int(config["master_seed"]),
        results=str(results_path),
    )


def write_manifest(path: str | Path, manifest: RunManifest) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    payload = asdict(manifest)
    target.write_text(json.dumps(payload, ensure_ascii=True, indent=2), encoding="utf-8")


def read_manifest(path: str | Path) -> RunManifest:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return RunManifest(**data)
    except (json.JSONDecodeError, TypeError) as exc:
        raise ResultsFileError(f"{path}: not a run manifest ({exc})") from exc


def stale_inputs(manifest: RunManifest) -> List[str]:
    """Input files whose content no longer matches the manifest hashes."""
    stale: List[str] = []
    code_path = manifest.config["code_path"]
    if sha256_of(code_path) != manifest.code_sha256:
        stale.append(code_path)
    interleaver_path = manifest.config.get("interleaver_path")
    if interleaver_path and sha256_of(interleaver_path) != manifest.interleaver_sha256:
        stale.append(interleaver_path)
    return stale
