"""Human-readable and structured rendering of appraisal results."""

from __future__ import annotations

import json
from collections import Counter
from collections.abc import Sequence

from .campaign import result_to_record
from .scoring import AppraisalResult, ClassificationBand

TEXT = "text"
STRUCTURED = "structured"
FORMATS = (TEXT, STRUCTURED)


def format_degrees(values: Sequence[float]) -> str:
    return "[" + " ".join(f"{v:.4f}" for v in values) + "]"


def render_report(result: AppraisalResult, fmt: str = TEXT) -> str:
    if fmt == STRUCTURED:
        return json.dumps(result_to_record(result), ensure_ascii=False)
    if fmt != TEXT:
        raise ValueError(f"unknown report format {fmt!r}")

    id_width = max(len("aspect"), *(len(a.aspect_id) for a in result.aspect_results))
    grade_width = max(len("grade"), *(len(a.grade_name) for a in result.aspect_results))
    lines = [
        f"Subject {result.subject_id}",
        f"  {'aspect':<{id_width}}  {'grade':<{grade_width}}  weighting  composed",
    ]
    for a in result.aspect_results:
        lines.append(
            f"  {a.aspect_id:<{id_width}}  {a.grade_name:<{grade_width}}  "
            f"{a.weighting:>9.2f}  {format_degrees(a.composed)}"
        )
    performer = f" ({result.performer})" if result.performer else ""
    lines.append(f"  OPR {result.opr_display}  {result.group_label}{performer}")
    for remark in result.remarks:
        lines.append(f"    - {remark}")
    return "\n".join(lines)


def group_counts(
    results: Sequence[AppraisalResult], bands: Sequence[ClassificationBand]
) -> list[tuple[str, str, int]]:
    """Subjects per performer group, highest band first (bar-chart data series)."""
    counts = Counter(r.group_label for r in results)
    ordered = sorted(bands, key=lambda b: b.lower, reverse=True)
    return [(b.group_label, b.performer, counts.get(b.group_label, 0)) for b in ordered]
