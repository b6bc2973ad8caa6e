"""Replay of the two worked composition examples and the worked OPR.

The expected numbers are embedded and checked on every run, so the demo
doubles as a golden self-test of the shipped engine.
"""

from __future__ import annotations

from collections.abc import Callable

from .fuzzy import composition_trace, compose_max_min, defuzzify_biggest_subjection
from .model import default_grade_scale
from .scoring import classify, default_bands, overall_performance_rating

SMALL_WEIGHTS = [0.4, 0.4, 0.2]
SMALL_RELATION = [
    [0.6, 0.2, 0.1, 0.1],
    [0.1, 0.5, 0.3, 0.1],
    [0.1, 0.3, 0.4, 0.2],
]
SMALL_EXPECTED = [0.4, 0.4, 0.3, 0.2]

WORKING_OUTPUT_WEIGHTS = [0.2, 0.3, 0.3, 0.2]
WORKING_OUTPUT_ROWS = [
    [0.1, 0.4, 0.3, 0.1, 0.1],
    [0.2, 0.5, 0.2, 0.1, 0.0],
    [0.5, 0.3, 0.1, 0.1, 0.0],
    [0.2, 0.5, 0.2, 0.1, 0.0],
]
WORKING_OUTPUT_EXPECTED = [0.3, 0.3, 0.2, 0.1, 0.1]
# min terms of each d_k, as written out in the worked example
WORKING_OUTPUT_CHAINS = [
    [0.1, 0.2, 0.3, 0.2],
    [0.2, 0.3, 0.3, 0.2],
    [0.2, 0.2, 0.1, 0.2],
    [0.1, 0.1, 0.1, 0.1],
    [0.1, 0.0, 0.0, 0.0],
]

# the summarized aspect weightings are fed as numbers, not looked up by grade name
ASPECT_WEIGHTINGS = [1.0, 0.6, 1.0, 0.8]
ASPECT_MARKS = [50.0, 25.0, 20.0, 5.0]
EXPECTED_OPR = 89.0
OPR_TOLERANCE = 1e-9


def vec(values) -> str:
    return "[" + ", ".join(repr(float(v)) for v in values) + "]"


def run_demo(emit: Callable[[str], None] = print) -> list[str]:
    """Print the worked examples; return a list of mismatches (empty on success)."""
    failures = []

    def check(label, got, want):
        if got != want:
            failures.append(f"{label}: got {got!r}, expected {want!r}")

    emit("Max-min composition, 3 factors x 4 grades")
    emit(f"  W = {vec(SMALL_WEIGHTS)}")
    for row in SMALL_RELATION:
        emit(f"      {vec(row)}")
    small = compose_max_min(SMALL_WEIGHTS, SMALL_RELATION).tolist()
    emit(f"  D = W o R = {vec(small)}")
    check("small composition", small, SMALL_EXPECTED)
    small_index = defuzzify_biggest_subjection(small, len(small))
    emit(f"  largest degree at grade index {small_index} (ties go to the more favorable grade)")
    check("small defuzzification", small_index, 0)
    emit("")

    scale = default_grade_scale()
    emit("Working output aspect, 4 factors x 5 grades")
    for i, row in enumerate(WORKING_OUTPUT_ROWS, start=1):
        emit(f"  R{i} = {vec(row)}")
    emit(f"  W1 = {vec(WORKING_OUTPUT_WEIGHTS)}")
    trace = composition_trace(WORKING_OUTPUT_WEIGHTS, WORKING_OUTPUT_ROWS)
    for step, want_chain in zip(trace, WORKING_OUTPUT_CHAINS):
        k = step.column + 1
        pairs = " v ".join(f"({w!r} ^ {r!r})" for w, r in step.pairs)
        minima = " v ".join(repr(m) for m in step.minima)
        emit(f"  d{k} = {pairs}")
        emit(f"     = {minima}")
        emit(f"     = {step.value!r}")
        check(f"d{k} chain", list(step.minima), want_chain)
        check(f"d{k}", step.value, WORKING_OUTPUT_EXPECTED[step.column])
    composed = [s.value for s in trace]
    emit(f"  D = {vec(composed)}")
    check("working output composition", composed, WORKING_OUTPUT_EXPECTED)
    grade = defuzzify_biggest_subjection(composed, len(scale))
    emit(f"  grade: {scale.grades[grade].name} (biggest subjection degree)")
    check("working output grade", scale.grades[grade].name, "Exceptional")
    emit("")

    emit("Overall performance rating")
    emit(f"  aspect weightings = {vec(ASPECT_WEIGHTINGS)}")
    emit(f"  aspect marks      = {vec(ASPECT_MARKS)}")
    opr = overall_performance_rating(ASPECT_WEIGHTINGS, ASPECT_MARKS)
    terms = " + ".join(f"({w:g} * {m:g})" for w, m in zip(ASPECT_WEIGHTINGS, ASPECT_MARKS))
    emit(f"  OPR = {terms}")
    emit(f"  OPR = {opr:g}")
    if abs(opr - EXPECTED_OPR) > OPR_TOLERANCE:
        failures.append(f"OPR: got {opr!r}, expected {EXPECTED_OPR!r}")
    band = classify(opr, default_bands())
    emit(f"  classification: {band.group_label} ({band.performer})")
    for remark in band.remarks:
        emit(f"    - {remark}")
    check("classification", band.group_label, "Group I")

    emit("")
    if failures:
        for f in failures:
            emit(f"MISMATCH {f}")
    else:
        emit("self-check: all values match")
    return failures
