"""Fuzzy kernel: membership vectors, relation matrices, max-min composition
and biggest-subjection-degree defuzzification.

Everything here is a pure function over immutable values.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from numbers import Real

from .errors import E_DIM_MISMATCH, E_EMPTY, E_RANGE, AppraisalError

ROW_SUM_TOLERANCE = 1e-9


class NormalizationMode(enum.Enum):
    STRICT = "strict"
    LENIENT = "lenient"


def _as_degrees(values: Sequence[float]) -> tuple[float, ...]:
    out = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, Real):
            raise AppraisalError(E_RANGE, f"membership degree must be a number, got {v!r}")
        out.append(float(v))
    return tuple(out)


@dataclass(frozen=True)
class MembershipVector(Sequence):
    """Ordered membership degrees, each in [0, 1]."""

    degrees: tuple[float, ...]

    def __init__(self, degrees: Sequence[float]):
        values = _as_degrees(degrees)
        if not values:
            raise AppraisalError(E_EMPTY, "membership vector must have at least one degree")
        for i, v in enumerate(values):
            if not 0.0 <= v <= 1.0:
                raise AppraisalError(E_RANGE, f"degree {v!r} at index {i} is outside [0, 1]")
        object.__setattr__(self, "degrees", values)

    def __len__(self) -> int:
        return len(self.degrees)

    def __getitem__(self, index):
        return self.degrees[index]

    def __iter__(self) -> Iterator[float]:
        return iter(self.degrees)

    def tolist(self) -> list[float]:
        return list(self.degrees)


@dataclass(frozen=True)
class FuzzyRelation:
    """An m x p matrix of membership degrees; row i describes factor i over p grades."""

    rows: tuple[MembershipVector, ...]

    def __init__(self, rows: Sequence[Sequence[float]]):
        vectors = tuple(r if isinstance(r, MembershipVector) else MembershipVector(r) for r in rows)
        if not vectors:
            raise AppraisalError(E_EMPTY, "fuzzy relation needs at least one row")
        width = len(vectors[0])
        for i, row in enumerate(vectors):
            if len(row) != width:
                raise AppraisalError(
                    E_DIM_MISMATCH, f"row {i} has {len(row)} columns, expected {width}"
                )
        object.__setattr__(self, "rows", vectors)

    @property
    def row_count(self) -> int:
        return len(self.rows)

    @property
    def col_count(self) -> int:
        return len(self.rows[0])

    @property
    def shape(self) -> tuple[int, int]:
        return self.row_count, self.col_count

    def tolist(self) -> list[list[float]]:
        return [row.tolist() for row in self.rows]


def _coerce(weights, relation) -> tuple[MembershipVector, FuzzyRelation]:
    if not isinstance(weights, MembershipVector):
        weights = MembershipVector(weights)
    if not isinstance(relation, FuzzyRelation):
        relation = FuzzyRelation(relation)
    if len(weights) != relation.row_count:
        raise AppraisalError(
            E_DIM_MISMATCH,
            f"{len(weights)} weights for a relation with {relation.row_count} rows",
        )
    return weights, relation


def compose_max_min(weights, relation) -> MembershipVector:
    """Max-min composition ``W o R``.

    ``result[k] = max_i min(weights[i], relation[i][k])``. Only min and max are
    applied, so the output contains exactly the input floats, no rounding.
    """
    weights, relation = _coerce(weights, relation)
    result = []
    for k in range(relation.col_count):
        result.append(max(min(w, row[k]) for w, row in zip(weights, relation.rows)))
    return MembershipVector(result)


@dataclass(frozen=True)
class CompositionStep:
    """One output component with the min terms that were max-ed to produce it."""

    column: int
    pairs: tuple[tuple[float, float], ...]
    minima: tuple[float, ...]
    value: float


def composition_trace(weights, relation) -> list[CompositionStep]:
    """Same as :func:`compose_max_min` but keeps the ``(w_i ^ r_ik)`` chain per column."""
    weights, relation = _coerce(weights, relation)
    steps = []
    for k in range(relation.col_count):
        pairs = tuple((w, row[k]) for w, row in zip(weights, relation.rows))
        minima = tuple(min(w, r) for w, r in pairs)
        steps.append(CompositionStep(k, pairs, minima, max(minima)))
    return steps


def defuzzify_biggest_subjection(d: Sequence[float], grade_count: int) -> int:
    """Index of the largest degree; ties go to the lowest (most favorable) index."""
    if len(d) == 0:
        raise AppraisalError(E_EMPTY, "cannot defuzzify an empty vector")
    if len(d) != grade_count:
        raise AppraisalError(
            E_DIM_MISMATCH, f"vector has {len(d)} degrees but the scale has {grade_count} grades"
        )
    best = 0
    for i in range(1, len(d)):
        if d[i] > d[best]:
            best = i
    return best


@dataclass(frozen=True)
class Violation:
    index: int | None
    message: str


def validate_membership(
    v: Sequence[float], mode: NormalizationMode = NormalizationMode.LENIENT
) -> list[Violation]:
    """Check a candidate membership vector; returns an empty list when it is valid.

    Accepts raw sequences so that out-of-range data can be reported instead of
    rejected at construction time.
    """
    violations = []
    numeric = True
    if len(v) == 0:
        violations.append(Violation(None, "vector is empty"))
        return violations
    for i, x in enumerate(v):
        if isinstance(x, bool) or not isinstance(x, Real) or math.isnan(x):
            violations.append(Violation(i, f"entry {x!r} is not a number"))
            numeric = False
        elif not 0.0 <= x <= 1.0:
            violations.append(Violation(i, f"entry {x!r} is outside [0, 1]"))
    if mode is NormalizationMode.STRICT and numeric:
        total = math.fsum(v)
        if abs(total - 1.0) > ROW_SUM_TOLERANCE:
            violations.append(Violation(None, f"entries sum to {total!r}, expected 1"))
    return violations
