"""Campaign YAML loader and validation."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
import re
from typing import Any, Dict, List, Optional

import yaml

from .interleaver import KINDS, VISIT_ORDERS
from .modem_channel import MODULATIONS
from .validator import ValidationError, coerce_value, field_bits, parse_on_off, positive_int


SYSTEM_NAME = re.compile(r"^[A-Za-z0-9_.-]+$")


class CampaignError(Exception):
    pass


@dataclass(frozen=True)
class CodeSource:
    """Either an existing code file or the PEG parameters to build one."""

    path: Optional[str] = None
    field: int = 64
    n_symbols: int = 102
    dv: int = 2
    dc: int = 6
    seed: int = 0
    min_girth: int = 6

    @property
    def build_name(self) -> str:
        return f"code_gf{self.field}_n{self.n_symbols}_dv{self.dv}_dc{self.dc}_s{self.seed}.txt"


@dataclass(frozen=True)
class InterleaverSource:
    kind: str = "identity"
    path: Optional[str] = None
    seed: int = 0
    local_scramble: bool = False
    order: str = "natural"


@dataclass(frozen=True)
class SystemSpec:
    name: str
    code: CodeSource
    interleaver: InterleaverSource


@dataclass(frozen=True)
class CampaignConfig:
    version: int
    modulation: str
    ebn0_start: float
    ebn0_stop: float
    ebn0_step: float
    max_frames: int
    min_frame_errors: int
    max_iters: int
    seed: int
    workers: int
    systems: List[SystemSpec]


def load_campaign(path: str | Path) -> CampaignConfig:
    try:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise CampaignError(f"Campaign file is not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise CampaignError("Campaign root must be a dictionary")

    version = raw.get("version")
    if not isinstance(version, int) or isinstance(version, bool):
        raise CampaignError("Campaign version must be an integer")

    modulation = raw.get("modulation")
    if modulation not in MODULATIONS:
        raise CampaignError(f"modulation must be one of {', '.join(MODULATIONS)}")

    ebn0 = raw.get("ebn0")
    if not isinstance(ebn0, dict):
        raise CampaignError("ebn0 must be a mapping with start, stop and step")

    try:
        start = coerce_value(ebn0.get("start"), "float", "strict", "ebn0.start")
        stop = coerce_value(ebn0.get("stop", start), "float", "strict", "ebn0.stop")
        step = coerce_value(ebn0.get("step", 1.0), "float", "strict", "ebn0.step")
        if start is None:
            raise ValidationError("ebn0.start", "is required")
        if step <= 0:
            raise ValidationError("ebn0.step", "must be positive")
        if stop < start:
            raise ValidationError("ebn0.stop", "must not be below start")
        max_frames = positive_int(raw.get("max_frames", 10_000_000), "max_frames")
        min_frame_errors = positive_int(raw.get("min_frame_errors", 100), "min_frame_errors")
        max_iters = positive_int(raw.get("max_iters", 100), "max_iters")
        workers = positive_int(raw.get("workers", 1), "workers")
        seed = coerce_value(raw.get("seed", 0), "int", "strict", "seed")
    except ValidationError as exc:
        raise CampaignError(str(exc)) from exc

    systems = _parse_systems(raw.get("systems"))

    return CampaignConfig(
        version=version,
        modulation=modulation,
        ebn0_start=start,
        ebn0_stop=stop,
        ebn0_step=step,
        max_frames=max_frames,
        min_frame_errors=min_frame_errors,
        max_iters=max_iters,
        seed=seed,
        workers=workers,
        systems=systems,
    )


def _parse_systems(items: Any) -> List[SystemSpec]:
    if not isinstance(items, list) or not items:
        raise CampaignError("systems must be a non-empty list")
    systems: List[SystemSpec] = []
    seen = set()
    for item in items:
        if not isinstance(item, dict):
            raise CampaignError("systems entries must be dictionaries")
        name = item.get("name")
        if not isinstance(name, str) or not SYSTEM_NAME.match(name):
            raise CampaignError(f"system name {name!r} must be a plain file-name token")
        if name in seen:
            raise CampaignError(f"duplicate system name: {name}")
        seen.add(name)
        try:
            code = _parse_code(item.get("code"), name)
            interleaver = _parse_interleaver(item.get("interleaver", "identity"), name)
        except ValidationError as exc:
            raise CampaignError(f"systems[{name}].{exc}") from exc
        systems.append(SystemSpec(name=name, code=code, interleaver=interleaver))
    return systems


def _parse_code(value: Any, name: str) -> CodeSource:
    if isinstance(value, str) and value.strip():
        return CodeSource(path=value)
    if not isinstance(value, dict):
        raise CampaignError(f"systems[{name}].code must be a file path or PEG parameters")
    unknown = sorted(set(value) - {"field", "n_symbols", "dv", "dc", "seed", "min_girth"})
    if unknown:
        raise CampaignError(f"systems[{name}].code has unknown keys: {', '.join(unknown)}")
    defaults = CodeSource()
    field = coerce_value(value.get("field", defaults.field), "int", "strict", "code.field")
    field_bits(field)
    return CodeSource(
        field=field,
        n_symbols=positive_int(value.get("n_symbols", defaults.n_symbols), "code.n_symbols"),
        dv=positive_int(value.get("dv", defaults.dv), "code.dv"),
        dc=positive_int(value.get("dc", defaults.dc), "code.dc"),
        seed=coerce_value(value.get("seed", defaults.seed), "int", "strict", "code.seed"),
        min_girth=positive_int(value.get("min_girth", defaults.min_girth), "code.min_girth"),
    )


def _parse_interleaver(value: Any, name: str) -> InterleaverSource:
    if value == "identity":
        return InterleaverSource()
    if isinstance(value, str) and value.strip():
        return InterleaverSource(kind="file", path=value)
    if not isinstance(value, dict):
        raise CampaignError(f"systems[{name}].interleaver must be 'identity', a file path or a mapping")
    if "path" in value:
        return InterleaverSource(kind="file", path=str(value["path"]))
    kind = value.get("kind")
    if kind not in KINDS:
        raise CampaignError(f"systems[{name}].interleaver.kind must be one of {', '.join(KINDS)}")
    order = value.get("order", "natural")
    if order not in VISIT_ORDERS:
        raise CampaignError(f"systems[{name}].interleaver.order must be one of {', '.join(VISIT_ORDERS)}")
    return InterleaverSource(
        kind=kind,
        seed=coerce_value(value.get("seed", 0), "int", "strict", "interleaver.seed"),
        local_scramble=parse_on_off(value.get("local_scramble", False), "interleaver.local_scramble"),
        order=order,
    )


def campaign_summary(campaign: CampaignConfig) -> Dict[str, Any]:
    return {
        "modulation": campaign.modulation,
        "ebn0": [campaign.ebn0_start, campaign.ebn0_stop, campaign.ebn0_step],
        "systems": [system.name for system in campaign.systems],
    }
