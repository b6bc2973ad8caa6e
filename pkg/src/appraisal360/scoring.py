"""Multi-source aggregation, overall performance rating (OPR) and
performer-group classification."""

from __future__ import annotations

import math
from collections import defaultdict
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction

from .errors import (
    E_BAND_GAP,
    E_BAND_OVERLAP,
    E_DIM_MISMATCH,
    E_NO_RESPONSES,
    E_NO_SOURCES,
    E_SCHEMA,
    E_UNKNOWN_ROLE,
    AppraisalError,
)
from .fuzzy import MembershipVector
from .model import (
    AspectResult,
    GradeScale,
    RaterResponse,
    build_relation,
    evaluate_aspect,
    frequency_vector,
    score_to_grade,
)


@dataclass(frozen=True)
class SourceRole:
    name: str
    mark: float


def check_roles(roles: Sequence[SourceRole]) -> None:
    names = [r.name for r in roles]
    if not all(names) or len(set(names)) != len(names):
        raise AppraisalError(E_SCHEMA, "source role names must be unique and non-empty")
    if any(r.mark < 0 for r in roles):
        raise AppraisalError(E_SCHEMA, "source role marks must be non-negative")
    if not any(r.mark > 0 for r in roles):
        raise AppraisalError(E_SCHEMA, "at least one source role needs a positive mark")


@dataclass(frozen=True)
class ClassificationBand:
    """A performer group covering ``[lower, upper)``; ``upper=None`` means unbounded.

    The highest band is closed at its finite upper edge so that a perfect score
    is classified.
    """

    group_label: str
    lower: float
    upper: float | None
    performer: str = ""
    remarks: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "remarks", tuple(self.remarks))
        if not self.group_label:
            raise AppraisalError(E_SCHEMA, "band group label must be non-empty")
        if self.upper is not None and self.upper <= self.lower:
            raise AppraisalError(E_SCHEMA, f"band {self.group_label!r} is empty")


def check_bands(bands: Sequence[ClassificationBand], top: float = 100.0) -> list[ClassificationBand]:
    """Verify bands tile ``[0, top]``; return them in ascending order."""
    if not bands:
        raise AppraisalError(E_BAND_GAP, "no classification bands")
    ordered = sorted(bands, key=lambda b: b.lower)
    if ordered[0].lower > 0:
        raise AppraisalError(E_BAND_GAP, f"scores below {ordered[0].lower} are not classified")
    for below, above in zip(ordered, ordered[1:]):
        if below.upper is None or above.lower < below.upper:
            raise AppraisalError(
                E_BAND_OVERLAP, f"bands {below.group_label!r} and {above.group_label!r} overlap"
            )
        if above.lower > below.upper:
            raise AppraisalError(
                E_BAND_GAP, f"scores in [{below.upper}, {above.lower}) are not classified"
            )
    last = ordered[-1]
    if last.upper is not None and last.upper < top:
        raise AppraisalError(E_BAND_GAP, f"scores above {last.upper} are not classified")
    return ordered


def default_source_roles() -> list[SourceRole]:
    return [
        SourceRole("superior", 50.0),
        SourceRole("peer", 25.0),
        SourceRole("student", 20.0),
        SourceRole("self", 5.0),
    ]


def default_bands() -> list[ClassificationBand]:
    return [
        ClassificationBand(
            "Group I",
            80.0,
            None,
            "High performer(s)",
            (
                "An incentive of RM 1000.",
                "A certificate of appreciation.",
                "Entitled for “Best Service Award”.",
            ),
        ),
        ClassificationBand(
            "Group II",
            60.0,
            80.0,
            "Medium Performer(s)",
            ("An incentive of RM 500", "Advised to improve their performance in the coming year"),
        ),
        ClassificationBand(
            "Group III",
            50.0,
            60.0,
            "Average performer(s)",
            (
                "Advised to improve their performance in the coming year",
                "should attend training sessions & workshops",
            ),
        ),
        ClassificationBand(
            "Group IV",
            0.0,
            50.0,
            "Low Performer(s)",
            (
                "Disciplinary action might be taken towards the staff.",
                "Should constantly report his / her work progress to his / her assessors in a stated period",
            ),
        ),
    ]


def grade_to_weighting(grade_index: int, scale: GradeScale) -> float:
    return scale.weighting(grade_index)


def merge_source_vectors(
    per_source: Mapping[str, Sequence[float]], roles: Sequence[SourceRole]
) -> MembershipVector:
    """Weighted mean of per-role vectors using role marks.

    Marks are renormalized over the roles that are actually present, so a
    missing role neither contributes nor dilutes the others.
    """
    if not per_source:
        raise AppraisalError(E_NO_SOURCES, "no source vectors to merge")
    marks = {r.name: r.mark for r in roles}
    for name in per_source:
        if name not in marks:
            raise AppraisalError(E_UNKNOWN_ROLE, f"unknown source role {name!r}")
    lengths = {len(v) for v in per_source.values()}
    if len(lengths) != 1:
        raise AppraisalError(E_DIM_MISMATCH, f"source vectors have differing lengths {sorted(lengths)}")
    (width,) = lengths
    # iterate in configured role order so the result does not depend on mapping order
    present = [r for r in roles if r.name in per_source]
    # exact rational mean, rounded once: identical inputs come back unchanged
    marks_q = {r.name: Fraction(r.mark) for r in present}
    total = sum(marks_q.values())
    if total <= 0:
        raise AppraisalError(E_NO_SOURCES, "every present source role has mark 0")
    merged = []
    for k in range(width):
        value = sum(marks_q[r.name] * Fraction(per_source[r.name][k]) for r in present) / total
        merged.append(float(value))
    return MembershipVector(merged)


def overall_performance_rating(
    aspect_weightings: Sequence[float], aspect_marks: Sequence[float]
) -> float:
    if len(aspect_weightings) != len(aspect_marks):
        raise AppraisalError(
            E_DIM_MISMATCH,
            f"{len(aspect_weightings)} weightings for {len(aspect_marks)} aspect marks",
        )
    if not aspect_weightings:
        raise AppraisalError(E_DIM_MISMATCH, "no aspects to rate")
    return math.fsum(w * m for w, m in zip(aspect_weightings, aspect_marks))


def display_opr(opr: float) -> str:
    """OPR rounded half-up to two decimals, as shown to users."""
    return str(Decimal(repr(opr)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def classify(opr: float, bands: Sequence[ClassificationBand]) -> ClassificationBand:
    """Band containing ``opr``. Bands are assumed validated with :func:`check_bands`."""
    ordered = sorted(bands, key=lambda b: b.lower)
    for band in ordered:
        if band.lower <= opr and (band.upper is None or opr < band.upper):
            return band
    top = ordered[-1]
    if top.upper is not None and opr == top.upper:
        return top
    raise AppraisalError(E_BAND_GAP, f"no band contains {opr}")


@dataclass(frozen=True)
class AppraisalResult:
    subject_id: str
    aspect_results: tuple[AspectResult, ...]
    opr: float
    group_label: str
    performer: str = ""
    remarks: tuple[str, ...] = field(default_factory=tuple)

    @property
    def opr_display(self) -> str:
        return display_opr(self.opr)


def dedupe_responses(responses: Iterable[RaterResponse]) -> list[RaterResponse]:
    """Keep the last response per (rater, subject, aspect, factor)."""
    latest: dict[tuple[str, str, str, str], RaterResponse] = {}
    for r in responses:
        key = (r.rater_id, r.subject_id, r.aspect_id, r.factor_id)
        latest.pop(key, None)
        latest[key] = r
    return list(latest.values())


def _sort_key(r: RaterResponse):
    return (r.aspect_id, r.factor_id, r.source_role, r.rater_id)


def appraise_subject(subject_id: str, responses: Iterable[RaterResponse], config) -> AppraisalResult:
    """Run the full pipeline for one subject.

    Per factor the responses of each role become a frequency vector, the role
    vectors are merged by role marks, the factor rows form the aspect relation,
    and the aspect is composed with its weights and defuzzified. Aspect
    weightings times aspect marks give the OPR, which is then classified.

    ``config`` is a :class:`appraisal360.campaign.CampaignConfig`.
    """
    mine = [r for r in dedupe_responses(responses) if r.subject_id == subject_id]
    mine.sort(key=_sort_key)
    grouped: dict[tuple[str, str], dict[str, list[int]]] = defaultdict(lambda: defaultdict(list))
    for r in mine:
        grouped[(r.aspect_id, r.factor_id)][r.source_role].append(score_to_grade(r.score, config.scale))

    aspect_results = []
    for aspect in config.aspects:
        rows = []
        for factor in aspect.factors:
            by_role = grouped.get((aspect.id, factor.id), {})
            per_role = {
                role: frequency_vector(grades, config.scale) for role, grades in by_role.items()
            }
            if not per_role:
                raise AppraisalError(
                    E_NO_RESPONSES,
                    "no responses",
                    f"subject={subject_id} aspect={aspect.id} factor={factor.id}",
                )
            rows.append(merge_source_vectors(per_role, config.roles))
        aspect_results.append(evaluate_aspect(aspect, build_relation(rows), config.scale))

    opr = overall_performance_rating(
        [a.weighting for a in aspect_results], [a.mark for a in config.aspects]
    )
    band = classify(opr, config.bands)
    return AppraisalResult(
        subject_id=subject_id,
        aspect_results=tuple(aspect_results),
        opr=opr,
        group_label=band.group_label,
        performer=band.performer,
        remarks=band.remarks,
    )
