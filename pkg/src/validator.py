"""Flag coercion and cross-artifact validation."""

from __future__ import annotations

from dataclasses import dataclass
import math
from typing import Any, Optional, Tuple, TYPE_CHECKING

if TYPE_CHECKING:
    from .interleaver import InterleaverPattern
    from .modem_channel import Constellation
    from .tanner import TannerGraph


FIELD_ORDERS = (4, 16, 64, 256)


@dataclass(frozen=True)
class ValidationError(Exception):
    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.field}: {self.message}"


def coerce_value(value: Any, expected_type: str, policy: str, field_name: Optional[str] = None) -> Any:
    """Return ``value`` as ``expected_type``; ``policy`` is "strict" or "coerce"."""
    name = field_name or expected_type
    if value is None:
        return None

    try:
        if expected_type == "string":
            if isinstance(value, str):
                return value
            if policy == "coerce":
                return str(value)
            raise ValidationError(name, f"expected string, got {type(value).__name__}")

        if expected_type == "int":
            if isinstance(value, bool):
                raise ValidationError(name, "bool is not int")
            if isinstance(value, int):
                return value
            if policy == "coerce":
                number = float(value)
                if not number.is_integer():
                    raise ValidationError(name, f"expected a whole number, got {value}")
                return int(number)
            raise ValidationError(name, f"expected int, got {type(value).__name__}")

        if expected_type == "float":
            if isinstance(value, (int, float)) and not isinstance(value, bool):
                number = float(value)
            elif policy == "coerce":
                number = float(value)
            else:
                raise ValidationError(name, f"expected float, got {type(value).__name__}")
            if not math.isfinite(number):
                raise ValidationError(name, "must be finite")
            return number

        if expected_type == "bool":
            if isinstance(value, bool):
                return value
            if policy == "coerce" and isinstance(value, str):
                lowered = value.strip().lower()
                if lowered in {"true", "1", "yes", "on"}:
                    return True
                if lowered in {"false", "0", "no", "off"}:
                    return False
            raise ValidationError(name, f"expected on/off, got {value!r}")

    except (TypeError, ValueError) as exc:
        raise ValidationError(name, str(exc)) from exc

    raise ValidationError(name, f"unknown expected type: {expected_type}")


def validate_constraints(value: Any, validations: dict, field_name: str) -> None:
    if value is None:
        return

    min_value = validations.get("min")
    if min_value is not None and value < min_value:
        raise ValidationError(field_name, f"value below min {min_value}")

    max_value = validations.get("max")
    if max_value is not None and value > max_value:
        raise ValidationError(field_name, f"value above max {max_value}")

    choices = validations.get("choices")
    if choices is not None and value not in choices:
        raise ValidationError(field_name, f"must be one of {', '.join(str(item) for item in choices)}")


def positive_int(value: Any, field_name: str) -> int:
    number = coerce_value(value, "int", "coerce", field_name)
    validate_constraints(number, {"min": 1}, field_name)
    return number


def parse_on_off(value: Any, field_name: str) -> bool:
    return coerce_value(value, "bool", "coerce", field_name)


def parse_ebn0_range(text: str) -> Tuple[float, float, float]:
    """``START:STOP:STEP`` in dB; a bare number is a single point."""
    parts = str(text).split(":")
    if len(parts) == 1:
        parts = [parts[0], parts[0], "1"]
    if len(parts) != 3:
        raise ValidationError("ebn0", f"expected START:STOP:STEP, got {text!r}")
    start, stop, step = (coerce_value(part.strip(), "float", "coerce", "ebn0") for part in parts)
    if step <= 0:
        raise ValidationError("ebn0", "step must be positive")
    if stop < start:
        raise ValidationError("ebn0", "stop must not be below start")
    return start, stop, step


def field_bits(q: Any) -> int:
    """Bits per symbol for a supported field order."""
    order = coerce_value(q, "int", "coerce", "field")
    validate_constraints(order, {"choices": FIELD_ORDERS}, "field")
    return order.bit_length() - 1


def check_consistency(
    graph: "TannerGraph",
    pattern: "InterleaverPattern",
    constellation: "Constellation",
) -> None:
    """Code, interleaver and constellation must describe the same n = N p = N_m m bits."""
    field = graph.field
    if pattern.p != field.p:
        raise ValidationError("interleaver", f"pattern built for p = {pattern.p}, code has p = {field.p}")
    if pattern.n_symbols != graph.n_symbols:
        raise ValidationError(
            "interleaver", f"pattern covers {pattern.n_symbols} symbols, code has {graph.n_symbols}"
        )
    if pattern.m != constellation.m:
        raise ValidationError(
            "modulation", f"pattern built for m = {pattern.m}, {constellation.name} carries {constellation.m}"
        )
    if constellation.m != field.p:
        raise ValidationError(
            "modulation",
            f"{constellation.name} carries {constellation.m} bits but GF({field.q}) symbols have {field.p}",
        )
