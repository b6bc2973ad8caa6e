"""Fuzzy multifactorial evaluation for multi-source (360-degree) performance appraisal."""

from .campaign import (
    CampaignConfig,
    ResponseSet,
    ValidationReport,
    default_config,
    evaluate_responses,
    load_campaign_config,
    parse_responses,
    read_results,
    validate_campaign,
    write_results,
)
from .errors import AppraisalError
from .fuzzy import (
    FuzzyRelation,
    MembershipVector,
    NormalizationMode,
    compose_max_min,
    defuzzify_biggest_subjection,
    validate_membership,
)
from .model import (
    Aspect,
    AspectResult,
    Factor,
    Grade,
    GradeScale,
    RaterResponse,
    build_relation,
    default_grade_scale,
    evaluate_aspect,
    frequency_vector,
    score_to_grade,
)
from .scoring import (
    AppraisalResult,
    ClassificationBand,
    SourceRole,
    appraise_subject,
    classify,
    grade_to_weighting,
    merge_source_vectors,
    overall_performance_rating,
)

__version__ = "0.1.0"
