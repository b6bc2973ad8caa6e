"""Campaign configuration, response ingestion/validation and result files."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import re
from collections import Counter, defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import yaml

from .errors import (
    E_IO,
    E_NO_RESPONSES,
    E_NO_SOURCES,
    E_PARSE,
    E_SCHEMA,
    E_SCORE_RANGE,
    E_UNKNOWN_ID,
    AppraisalError,
)
from .fuzzy import MembershipVector, NormalizationMode, ROW_SUM_TOLERANCE
from .model import (
    Aspect,
    AspectResult,
    Factor,
    Grade,
    GradeScale,
    RaterResponse,
    uniform_weights,
)
from .scoring import (
    AppraisalResult,
    ClassificationBand,
    SourceRole,
    appraise_subject,
    check_bands,
    check_roles,
    dedupe_responses,
)

log = logging.getLogger(__name__)

RESPONSE_COLUMNS = ("rater_id", "source_role", "subject_id", "aspect_id", "factor_id", "score")
DEFAULT_CONFIG_PATH = Path(__file__).with_name("default_campaign.yaml")
DEFAULT_CONFIG_ENV = "APPRAISAL360_DEFAULT_CONFIG"

_INT_RE = re.compile(r"[+-]?\d+")


@dataclass(frozen=True)
class CampaignConfig:
    campaign_id: str
    scale: GradeScale
    aspects: tuple[Aspect, ...]
    roles: tuple[SourceRole, ...]
    bands: tuple[ClassificationBand, ...]
    normalization: NormalizationMode = NormalizationMode.LENIENT

    def __post_init__(self):
        object.__setattr__(self, "aspects", tuple(self.aspects))
        object.__setattr__(self, "roles", tuple(self.roles))
        if not self.campaign_id:
            raise AppraisalError(E_SCHEMA, "campaign_id must be non-empty")
        if not self.aspects:
            raise AppraisalError(E_SCHEMA, "campaign defines no aspects")
        ids = [a.id for a in self.aspects]
        if len(set(ids)) != len(ids):
            raise AppraisalError(E_SCHEMA, "aspect ids must be unique")
        check_roles(self.roles)
        object.__setattr__(self, "bands", tuple(check_bands(self.bands, self.total_marks)))

    @property
    def score_range(self) -> tuple[int, int]:
        return self.scale.score_range

    @property
    def total_marks(self) -> float:
        return math.fsum(a.mark for a in self.aspects)

    def aspect(self, aspect_id: str) -> Aspect:
        for a in self.aspects:
            if a.id == aspect_id:
                return a
        raise KeyError(aspect_id)

    @property
    def role_names(self) -> list[str]:
        return [r.name for r in self.roles]


# -- config parsing ----------------------------------------------------------


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise AppraisalError(E_SCHEMA, f"expected a number, got {value!r}", where)
    if not math.isfinite(value):
        raise AppraisalError(E_SCHEMA, f"expected a finite number, got {value!r}", where)
    return float(value)


def _integer(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise AppraisalError(E_SCHEMA, f"expected an integer, got {value!r}", where)
    return value


def _text(value: Any, where: str, required: bool = True) -> str:
    if value is None and not required:
        return ""
    if not isinstance(value, str) or (required and not value.strip()):
        raise AppraisalError(E_SCHEMA, f"expected non-empty text, got {value!r}", where)
    return value


def _table(value: Any, where: str) -> list:
    if not isinstance(value, list) or not value:
        raise AppraisalError(E_SCHEMA, "expected a non-empty list", where)
    return value


def _mapping(value: Any, where: str) -> dict:
    if not isinstance(value, dict):
        raise AppraisalError(E_SCHEMA, f"expected a mapping, got {type(value).__name__}", where)
    return value


def _pair(value: Any, where: str) -> tuple[int, int]:
    if not isinstance(value, list) or len(value) != 2:
        raise AppraisalError(E_SCHEMA, "expected [low, high]", where)
    return _integer(value[0], where), _integer(value[1], where)


def _parse_scale(grades: list, score_range: tuple[int, int]) -> GradeScale:
    parsed = []
    for i, g in enumerate(grades):
        where = f"grades[{i}]"
        g = _mapping(g, where)
        low, high = _pair(g.get("scores"), f"{where}.scores")
        parsed.append(
            Grade(
                name=_text(g.get("name"), f"{where}.name"),
                low=low,
                high=high,
                weighting=_number(g.get("weighting"), f"{where}.weighting"),
            )
        )
    return GradeScale(tuple(parsed), score_range)


def _parse_aspects(aspects: list) -> list[Aspect]:
    parsed = []
    for i, a in enumerate(aspects):
        where = f"aspects[{i}]"
        a = _mapping(a, where)
        factors = []
        for j, f in enumerate(_table(a.get("factors"), f"{where}.factors")):
            f = _mapping(f, f"{where}.factors[{j}]")
            factors.append(
                Factor(
                    _text(f.get("id"), f"{where}.factors[{j}].id"),
                    _text(f.get("label"), f"{where}.factors[{j}].label", required=False),
                )
            )
        raw_weights = a.get("weights")
        try:
            if raw_weights is None:
                weights = uniform_weights(len(factors))
            else:
                weights = MembershipVector(
                    [_number(w, f"{where}.weights") for w in _table(raw_weights, f"{where}.weights")]
                )
            parsed.append(
                Aspect(
                    id=_text(a.get("id"), f"{where}.id"),
                    label=_text(a.get("label"), f"{where}.label", required=False),
                    factors=tuple(factors),
                    weights=weights,
                    mark=_number(a.get("mark"), f"{where}.mark"),
                )
            )
        except AppraisalError as exc:
            raise AppraisalError(E_SCHEMA, exc.message, where) from exc
    return parsed


def _parse_roles(roles: list) -> list[SourceRole]:
    parsed = []
    for i, r in enumerate(roles):
        r = _mapping(r, f"source_roles[{i}]")
        parsed.append(
            SourceRole(
                _text(r.get("name"), f"source_roles[{i}].name"),
                _number(r.get("mark"), f"source_roles[{i}].mark"),
            )
        )
    return parsed


def _parse_bands(bands: list) -> list[ClassificationBand]:
    parsed = []
    for i, b in enumerate(bands):
        where = f"bands[{i}]"
        b = _mapping(b, where)
        upper = b.get("upper")
        remarks = b.get("remarks") or []
        if not isinstance(remarks, list):
            raise AppraisalError(E_SCHEMA, "remarks must be a list", where)
        parsed.append(
            ClassificationBand(
                group_label=_text(b.get("group"), f"{where}.group"),
                lower=_number(b.get("lower"), f"{where}.lower"),
                upper=None if upper is None else _number(upper, f"{where}.upper"),
                performer=_text(b.get("performer"), f"{where}.performer", required=False),
                remarks=tuple(_text(r, f"{where}.remarks") for r in remarks),
            )
        )
    return parsed


def _read_yaml(path: str | os.PathLike) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise AppraisalError(E_IO, f"cannot read config: {exc}", str(path)) from exc
    except UnicodeDecodeError as exc:
        raise AppraisalError(E_PARSE, f"config is not UTF-8: {exc}", str(path)) from exc
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise AppraisalError(E_PARSE, f"malformed config: {exc}", str(path)) from exc


_defaults_cache: dict | None = None


def _default_tables() -> dict:
    global _defaults_cache
    if _defaults_cache is None:
        _defaults_cache = _read_yaml(DEFAULT_CONFIG_PATH)
    return _defaults_cache


def config_from_dict(data: Any) -> CampaignConfig:
    """Build a validated config; omitted tables take the shipped defaults."""
    data = _mapping(data, "<root>")
    defaults = _default_tables()

    def table(key):
        return _table(data[key] if key in data else defaults[key], key)

    score_range = _pair(data.get("score_range", defaults["score_range"]), "score_range")
    mode_name = data.get("normalization", "lenient")
    try:
        mode = NormalizationMode(mode_name)
    except ValueError:
        raise AppraisalError(
            E_SCHEMA, f"normalization must be 'strict' or 'lenient', got {mode_name!r}"
        ) from None
    return CampaignConfig(
        campaign_id=_text(data.get("campaign_id"), "campaign_id"),
        scale=_parse_scale(table("grades"), score_range),
        aspects=tuple(_parse_aspects(table("aspects"))),
        roles=tuple(_parse_roles(table("source_roles"))),
        bands=tuple(_parse_bands(table("bands"))),
        normalization=mode,
    )


def load_campaign_config(path: str | os.PathLike) -> CampaignConfig:
    return config_from_dict(_read_yaml(path))


def default_config_path() -> Path:
    override = os.environ.get(DEFAULT_CONFIG_ENV)
    return Path(override) if override else DEFAULT_CONFIG_PATH


def default_config() -> CampaignConfig:
    return load_campaign_config(DEFAULT_CONFIG_PATH)


def config_to_dict(config: CampaignConfig) -> dict:
    return {
        "campaign_id": config.campaign_id,
        "score_range": list(config.score_range),
        "normalization": config.normalization.value,
        "grades": [
            {"name": g.name, "scores": [g.low, g.high], "weighting": g.weighting}
            for g in config.scale.grades
        ],
        "aspects": [
            {
                "id": a.id,
                "label": a.label,
                "mark": a.mark,
                "weights": a.weights.tolist(),
                "factors": [{"id": f.id, "label": f.label} for f in a.factors],
            }
            for a in config.aspects
        ],
        "source_roles": [{"name": r.name, "mark": r.mark} for r in config.roles],
        "bands": [
            {
                "group": b.group_label,
                "performer": b.performer,
                "lower": b.lower,
                "upper": b.upper,
                "remarks": list(b.remarks),
            }
            for b in config.bands
        ],
    }


def dump_campaign_config(config: CampaignConfig, path: str | os.PathLike) -> None:
    text = yaml.safe_dump(config_to_dict(config), sort_keys=False, allow_unicode=True)
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise AppraisalError(E_IO, f"cannot write config: {exc}", str(path)) from exc


# -- responses ---------------------------------------------------------------


@dataclass(frozen=True)
class ResponseSet:
    campaign_id: str
    responses: tuple[RaterResponse, ...]
    source_path: str = ""
    loaded_at: datetime | None = field(default=None, compare=False)

    @property
    def subjects(self) -> list[str]:
        return sorted({r.subject_id for r in self.responses})


def _check_response(raw: dict, row: int, config: CampaignConfig) -> RaterResponse:
    where = f"row {row}"
    values = {}
    for col in RESPONSE_COLUMNS[:-1]:
        v = raw.get(col)
        if not isinstance(v, str) or not v.strip():
            raise AppraisalError(E_PARSE, f"column {col!r} must be non-empty text", where)
        values[col] = v.strip()

    score = raw.get("score")
    if isinstance(score, str) and _INT_RE.fullmatch(score.strip()):
        score = int(score.strip())
    if isinstance(score, bool) or not isinstance(score, int):
        raise AppraisalError(E_PARSE, f"score {raw.get('score')!r} is not an integer", where)
    lo, hi = config.score_range
    if not lo <= score <= hi:
        raise AppraisalError(E_SCORE_RANGE, f"score {score} outside {lo}..{hi}", where)

    if values["source_role"] not in config.role_names:
        raise AppraisalError(E_UNKNOWN_ID, f"unknown source role {values['source_role']!r}", where)
    try:
        aspect = config.aspect(values["aspect_id"])
    except KeyError:
        raise AppraisalError(E_UNKNOWN_ID, f"unknown aspect {values['aspect_id']!r}", where) from None
    if values["factor_id"] not in aspect.factor_ids:
        raise AppraisalError(
            E_UNKNOWN_ID,
            f"unknown factor {values['factor_id']!r} in aspect {aspect.id!r}",
            where,
        )
    return RaterResponse(score=score, row=row, **values)


def _csv_rows(text: str) -> Iterable[tuple[int, dict]]:
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise AppraisalError(E_PARSE, "response file is empty") from None
    header = [h.strip() for h in header]
    if tuple(header) != RESPONSE_COLUMNS:
        raise AppraisalError(
            E_PARSE, f"header must be {','.join(RESPONSE_COLUMNS)}, got {','.join(header)}", "row 1"
        )
    for cells in reader:
        row = reader.line_num
        if not cells or all(not c.strip() for c in cells):
            continue
        if len(cells) != len(RESPONSE_COLUMNS):
            raise AppraisalError(
                E_PARSE, f"expected {len(RESPONSE_COLUMNS)} columns, got {len(cells)}", f"row {row}"
            )
        yield row, dict(zip(RESPONSE_COLUMNS, cells))


def _json_rows(text: str, lines: bool) -> Iterable[tuple[int, dict]]:
    try:
        if lines:
            items = [json.loads(line) for line in text.splitlines() if line.strip()]
        else:
            items = json.loads(text)
    except json.JSONDecodeError as exc:
        raise AppraisalError(E_PARSE, f"malformed JSON: {exc}") from exc
    if isinstance(items, dict):
        items = items.get("responses")
    if not isinstance(items, list):
        raise AppraisalError(E_PARSE, "expected a list of response objects")
    for i, item in enumerate(items, start=1):
        if not isinstance(item, dict):
            raise AppraisalError(E_PARSE, "response must be an object", f"row {i}")
        missing = [c for c in RESPONSE_COLUMNS if c not in item]
        if missing:
            raise AppraisalError(E_PARSE, f"missing fields {missing}", f"row {i}")
        yield i, item


def parse_responses(path: str | os.PathLike, config: CampaignConfig) -> ResponseSet:
    """Read a response file.

    ``.json`` holds an array of objects (or ``{"responses": [...]}``),
    ``.jsonl`` one object per line; anything else is read as CSV with the
    exact header ``rater_id,source_role,subject_id,aspect_id,factor_id,score``.
    """
    path = Path(path)
    try:
        text = path.read_bytes().decode("utf-8-sig")
    except OSError as exc:
        raise AppraisalError(E_IO, f"cannot read responses: {exc}", str(path)) from exc
    except UnicodeDecodeError as exc:
        raise AppraisalError(E_PARSE, f"responses are not UTF-8: {exc}", str(path)) from exc

    suffix = path.suffix.lower()
    if suffix == ".json":
        rows = _json_rows(text, lines=False)
    elif suffix == ".jsonl":
        rows = _json_rows(text, lines=True)
    else:
        rows = _csv_rows(text)
    responses = tuple(_check_response(raw, row, config) for row, raw in rows)
    log.debug("parsed %d responses from %s", len(responses), path)
    return ResponseSet(
        campaign_id=config.campaign_id,
        responses=responses,
        source_path=str(path),
        loaded_at=datetime.now(timezone.utc),
    )


# -- validation --------------------------------------------------------------


@dataclass(frozen=True)
class Finding:
    code: str
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.code} [{self.location}] {self.message}"


@dataclass
class ValidationReport:
    errors: list[Finding] = field(default_factory=list)
    warnings: list[Finding] = field(default_factory=list)
    # (subject, aspect, factor, role) -> response count after de-duplication
    coverage: dict[tuple[str, str, str, str], int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.errors


def validate_campaign(
    config: CampaignConfig,
    responses: ResponseSet,
    mode: NormalizationMode | None = None,
) -> ValidationReport:
    """Report everything that would stop or distort an evaluation run.

    Errors: a subject/aspect/factor with no responses, or with responses only
    from roles whose mark is zero. Warnings: roles entirely absent for a
    subject, duplicate rows, and (strict mode) factor weights not summing to 1.
    """
    mode = mode or config.normalization
    report = ValidationReport()

    rows_by_key: dict[tuple, list] = defaultdict(list)
    for r in responses.responses:
        rows_by_key[(r.rater_id, r.subject_id, r.aspect_id, r.factor_id)].append(r.row)
    for key, rows in sorted(rows_by_key.items()):
        if len(rows) > 1:
            rater, subject, aspect, factor = key
            report.warnings.append(
                Finding(
                    "W_DUPLICATE",
                    f"subject={subject} aspect={aspect} factor={factor} rater={rater}",
                    f"{len(rows)} rows {rows}; the last one is used",
                )
            )

    kept = dedupe_responses(responses.responses)
    counts = Counter((r.subject_id, r.aspect_id, r.factor_id, r.source_role) for r in kept)
    marks = {r.name: r.mark for r in config.roles}
    subjects = sorted({r.subject_id for r in kept})
    if not subjects:
        report.warnings.append(Finding("W_NO_SUBJECTS", responses.source_path, "no responses"))

    for subject in subjects:
        seen_roles = set()
        for aspect in config.aspects:
            for factor in aspect.factors:
                present = []
                for role in config.role_names:
                    n = counts.get((subject, aspect.id, factor.id, role), 0)
                    report.coverage[(subject, aspect.id, factor.id, role)] = n
                    if n:
                        present.append(role)
                        seen_roles.add(role)
                where = f"subject={subject} aspect={aspect.id} factor={factor.id}"
                if not present:
                    report.errors.append(Finding(E_NO_RESPONSES, where, "factor has no responses"))
                elif not any(marks[role] > 0 for role in present):
                    report.errors.append(
                        Finding(E_NO_SOURCES, where, "only roles with mark 0 responded")
                    )
        for role in config.role_names:
            if role not in seen_roles:
                report.warnings.append(
                    Finding(
                        "W_ROLE_ABSENT",
                        f"subject={subject} role={role}",
                        f"no {role} responses; its mark is renormalized away",
                    )
                )

    if mode is NormalizationMode.STRICT:
        for aspect in config.aspects:
            total = math.fsum(aspect.weights)
            if abs(total - 1.0) > ROW_SUM_TOLERANCE:
                report.warnings.append(
                    Finding("W_NORMALIZATION", f"aspect={aspect.id}", f"weights sum to {total!r}")
                )
    return report


def evaluate_responses(
    config: CampaignConfig,
    responses: ResponseSet,
    subjects: Sequence[str] | None = None,
) -> list[AppraisalResult]:
    """Appraise every subject (or the selected ones) in subject-id order."""
    wanted = responses.subjects if subjects is None else sorted(set(subjects) & set(responses.subjects))
    return [appraise_subject(s, responses.responses, config) for s in wanted]


# -- results -----------------------------------------------------------------


def results_filename(campaign_id: str, when: datetime | None = None) -> str:
    when = when or datetime.now(timezone.utc)
    return f"{campaign_id}-{when.strftime('%Y%m%dT%H%M%S%fZ')}.results"


def result_to_record(result: AppraisalResult) -> dict:
    return {
        "subject_id": result.subject_id,
        "aspects": [
            {
                "aspect_id": a.aspect_id,
                "composed": a.composed.tolist(),
                "grade_index": a.grade_index,
                "grade": a.grade_name,
                "weighting": a.weighting,
            }
            for a in result.aspect_results
        ],
        "opr": result.opr,
        "opr_display": result.opr_display,
        "group": result.group_label,
        "performer": result.performer,
        "remarks": list(result.remarks),
    }


def record_to_result(record: dict) -> AppraisalResult:
    try:
        return AppraisalResult(
            subject_id=record["subject_id"],
            aspect_results=tuple(
                AspectResult(
                    aspect_id=a["aspect_id"],
                    composed=MembershipVector(a["composed"]),
                    grade_index=a["grade_index"],
                    grade_name=a["grade"],
                    weighting=a["weighting"],
                )
                for a in record["aspects"]
            ),
            opr=record["opr"],
            group_label=record["group"],
            performer=record.get("performer", ""),
            remarks=tuple(record.get("remarks", ())),
        )
    except (KeyError, TypeError) as exc:
        raise AppraisalError(E_PARSE, f"malformed result record: {exc}") from exc


def write_results(results: Sequence[AppraisalResult], path: str | os.PathLike) -> None:
    """Write one JSON record per line. The file must not exist yet: one run, one file."""
    lines = [json.dumps(result_to_record(r), ensure_ascii=False) + "\n" for r in results]
    try:
        with open(path, "x", encoding="utf-8", newline="\n") as fh:
            fh.writelines(lines)
    except OSError as exc:
        raise AppraisalError(E_IO, f"cannot write results: {exc}", str(path)) from exc


def read_results(path: str | os.PathLike) -> list[AppraisalResult]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise AppraisalError(E_IO, f"cannot read results: {exc}", str(path)) from exc
    out = []
    for n, line in enumerate(text.splitlines(), start=1):
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise AppraisalError(E_PARSE, f"malformed record: {exc}", f"line {n}") from exc
        out.append(record_to_result(record))
    return out
