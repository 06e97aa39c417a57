"""Point-by-point comparison of two FER result sets."""

from __future__ import annotations

from dataclasses import dataclass
import math
from typing import Dict, List, Sequence

from .sim import FerRecord


@dataclass(frozen=True)
class ComparisonItem:
    ebn0_db: float
    fer_a: float
    fer_b: float
    fer_ratio: float  # fer_b / fer_a; nan when fer_a is 0
    detected_pct_a: float
    detected_pct_b: float
    disjoint: bool  # Wilson intervals do not overlap

    @property
    def b_better(self) -> bool:
        return self.disjoint and self.fer_b < self.fer_a


def _key(ebn0_db: float) -> float:
    return round(ebn0_db, 9)


def intervals_disjoint(a: FerRecord, b: FerRecord) -> bool:
    return a.ci_hi < b.ci_lo or b.ci_hi < a.ci_lo


def compare_records(records_a: Sequence[FerRecord], records_b: Sequence[FerRecord]) -> List[ComparisonItem]:
    """One item per Eb/N0 point present in both sets, in increasing Eb/N0."""
    by_point: Dict[float, FerRecord] = {_key(record.ebn0_db): record for record in records_b}
    items: List[ComparisonItem] = []
    for a in sorted(records_a, key=lambda record: record.ebn0_db):
        b = by_point.get(_key(a.ebn0_db))
        if b is None:
            continue
        items.append(
            ComparisonItem(
                ebn0_db=a.ebn0_db,
                fer_a=a.fer,
                fer_b=b.fer,
                fer_ratio=b.fer / a.fer if a.fer > 0 else math.nan,
                detected_pct_a=a.detected_pct,
                detected_pct_b=b.detected_pct,
                disjoint=intervals_disjoint(a, b),
            )
        )
    return items


def format_comparison(items: Sequence[ComparisonItem]) -> str:
    lines = ["ebn0_db fer_a fer_b ratio detected_a detected_b disjoint b_better"]
    for item in items:
        lines.append(
            "%g %.4g %.4g %.4g %.4g %.4g %s %s"
            % (
                item.ebn0_db,
                item.fer_a,
                item.fer_b,
                item.fer_ratio,
                item.detected_pct_a,
                item.detected_pct_b,
                "yes" if item.disjoint else "no",
                "yes" if item.b_better else "no",
            )
        )
    return "\n".join(lines)
