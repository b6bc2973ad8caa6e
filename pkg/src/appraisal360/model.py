"""Appraisal domain model: grade scales, aspects, rater responses and
single-aspect evaluation."""

from __future__ import annotations

from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass, field

from .errors import (
    E_BAND_GAP,
    E_BAND_OVERLAP,
    E_DIM_MISMATCH,
    E_GRADE_INDEX,
    E_NO_RESPONSES,
    E_SCHEMA,
    E_SCORE_RANGE,
    AppraisalError,
)
from .fuzzy import FuzzyRelation, MembershipVector, compose_max_min, defuzzify_biggest_subjection


@dataclass(frozen=True)
class Grade:
    name: str
    low: int
    high: int
    weighting: float

    def contains(self, score: int) -> bool:
        return self.low <= score <= self.high


@dataclass(frozen=True)
class GradeScale:
    """Verbal grades ordered most favorable first, each with an inclusive score band
    and the weighting used for the overall rating.

    Construction checks that bands tile ``score_range`` exactly and that
    weightings strictly decrease.
    """

    grades: tuple[Grade, ...]
    score_range: tuple[int, int] = (1, 10)

    def __post_init__(self):
        object.__setattr__(self, "grades", tuple(self.grades))
        object.__setattr__(self, "score_range", tuple(self.score_range))
        lo, hi = self.score_range
        if lo > hi:
            raise AppraisalError(E_SCHEMA, f"score range {lo}..{hi} is empty")
        if len(self.grades) < 2:
            raise AppraisalError(E_SCHEMA, "a grade scale needs at least two grades")
        names = [g.name for g in self.grades]
        if len(set(names)) != len(names) or not all(names):
            raise AppraisalError(E_SCHEMA, "grade names must be unique and non-empty")
        for g in self.grades:
            if g.low > g.high:
                raise AppraisalError(E_SCHEMA, f"grade {g.name!r} has an empty score band")
            if not 0.0 <= g.weighting <= 1.0:
                raise AppraisalError(E_SCHEMA, f"grade {g.name!r} weighting outside [0, 1]")
        for better, worse in zip(self.grades, self.grades[1:]):
            if not better.weighting > worse.weighting:
                raise AppraisalError(
                    E_SCHEMA, f"weighting of {better.name!r} must exceed that of {worse.name!r}"
                )
        # bands in ascending score order must tile [lo, hi] with no gaps or overlaps
        bands = sorted(self.grades, key=lambda g: g.low)
        expected = lo
        for g in bands:
            if g.low < lo or g.high > hi:
                raise AppraisalError(E_SCHEMA, f"grade {g.name!r} band leaves the score range")
            if g.low > expected:
                raise AppraisalError(E_BAND_GAP, f"scores {expected}..{g.low - 1} have no grade")
            if g.low < expected:
                raise AppraisalError(E_BAND_OVERLAP, f"grade {g.name!r} overlaps another band")
            expected = g.high + 1
        if expected <= hi:
            raise AppraisalError(E_BAND_GAP, f"scores {expected}..{hi} have no grade")

    def __len__(self) -> int:
        return len(self.grades)

    @property
    def names(self) -> list[str]:
        return [g.name for g in self.grades]

    @property
    def weightings(self) -> list[float]:
        return [g.weighting for g in self.grades]

    def weighting(self, grade_index: int) -> float:
        if not 0 <= grade_index < len(self.grades):
            raise AppraisalError(
                E_GRADE_INDEX, f"grade index {grade_index} outside 0..{len(self.grades) - 1}"
            )
        return self.grades[grade_index].weighting


def default_grade_scale() -> GradeScale:
    return GradeScale(
        (
            Grade("Exceptional", 9, 10, 1.0),
            Grade("Superior", 7, 8, 0.8),
            Grade("Fully Successful", 5, 6, 0.6),
            Grade("Minimally Successful", 3, 4, 0.4),
            Grade("Satisfactory", 1, 2, 0.2),
        ),
        (1, 10),
    )


@dataclass(frozen=True)
class Factor:
    id: str
    label: str = ""

    def __post_init__(self):
        if not self.id:
            raise AppraisalError(E_SCHEMA, "factor id must be non-empty")


@dataclass(frozen=True)
class Aspect:
    id: str
    label: str
    factors: tuple[Factor, ...]
    weights: MembershipVector
    mark: float

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not isinstance(self.weights, MembershipVector):
            object.__setattr__(self, "weights", MembershipVector(self.weights))
        if not self.id:
            raise AppraisalError(E_SCHEMA, "aspect id must be non-empty")
        if not self.factors:
            raise AppraisalError(E_SCHEMA, f"aspect {self.id!r} has no factors")
        ids = [f.id for f in self.factors]
        if len(set(ids)) != len(ids):
            raise AppraisalError(E_SCHEMA, f"aspect {self.id!r} has duplicate factor ids")
        if len(self.weights) != len(self.factors):
            raise AppraisalError(
                E_DIM_MISMATCH,
                f"aspect {self.id!r} has {len(self.factors)} factors but {len(self.weights)} weights",
            )
        if self.mark < 0:
            raise AppraisalError(E_SCHEMA, f"aspect {self.id!r} has a negative mark")

    @property
    def factor_ids(self) -> list[str]:
        return [f.id for f in self.factors]


def uniform_weights(count: int) -> MembershipVector:
    return MembershipVector([1.0 / count] * count)


@dataclass(frozen=True)
class RaterResponse:
    rater_id: str
    source_role: str
    subject_id: str
    aspect_id: str
    factor_id: str
    score: int
    # source row for diagnostics; not part of the response identity
    row: int | None = field(default=None, compare=False)


@dataclass(frozen=True)
class AspectResult:
    aspect_id: str
    composed: MembershipVector
    grade_index: int
    grade_name: str
    weighting: float


def score_to_grade(score: int, scale: GradeScale) -> int:
    lo, hi = scale.score_range
    if isinstance(score, bool) or not isinstance(score, int) or not lo <= score <= hi:
        raise AppraisalError(E_SCORE_RANGE, f"score {score!r} outside {lo}..{hi}")
    for index, grade in enumerate(scale.grades):
        if grade.contains(score):
            return index
    raise AssertionError("grade scale bands do not cover the score range")


def frequency_vector(grade_indices: Sequence[int], scale: GradeScale) -> MembershipVector:
    """Share of responses falling in each grade."""
    if len(grade_indices) == 0:
        raise AppraisalError(E_NO_RESPONSES, "no responses to build a frequency vector from")
    n = len(scale)
    for g in grade_indices:
        if not 0 <= g < n:
            raise AppraisalError(E_GRADE_INDEX, f"grade index {g} outside 0..{n - 1}")
    counts = Counter(grade_indices)
    total = len(grade_indices)
    return MembershipVector([counts[g] / total for g in range(n)])


def build_relation(per_factor_vectors: Sequence[Sequence[float]]) -> FuzzyRelation:
    if len(per_factor_vectors) == 0:
        raise AppraisalError(E_NO_RESPONSES, "no factor vectors to build a relation from")
    return FuzzyRelation(per_factor_vectors)


def evaluate_aspect(aspect: Aspect, relation: FuzzyRelation, scale: GradeScale) -> AspectResult:
    if relation.col_count != len(scale):
        raise AppraisalError(
            E_DIM_MISMATCH,
            f"relation has {relation.col_count} grade columns, scale has {len(scale)} grades",
        )
    composed = compose_max_min(aspect.weights, relation)
    index = defuzzify_biggest_subjection(composed, len(scale))
    return AspectResult(
        aspect_id=aspect.id,
        composed=composed,
        grade_index=index,
        grade_name=scale.grades[index].name,
        weighting=scale.weighting(index),
    )
