"""Error type shared by every layer of the engine.

Each failure carries a stable string code (``E_DIM_MISMATCH``, ``E_SCORE_RANGE``
...) so that callers and the CLI can branch on the kind of problem without
parsing messages.
"""

from __future__ import annotations

E_DIM_MISMATCH = "E_DIM_MISMATCH"
E_EMPTY = "E_EMPTY"
E_RANGE = "E_RANGE"
E_SCORE_RANGE = "E_SCORE_RANGE"
E_NO_RESPONSES = "E_NO_RESPONSES"
E_GRADE_INDEX = "E_GRADE_INDEX"
E_NO_SOURCES = "E_NO_SOURCES"
E_UNKNOWN_ROLE = "E_UNKNOWN_ROLE"
E_UNKNOWN_ID = "E_UNKNOWN_ID"
E_BAND_GAP = "E_BAND_GAP"
E_BAND_OVERLAP = "E_BAND_OVERLAP"
E_PARSE = "E_PARSE"
E_SCHEMA = "E_SCHEMA"
E_IO = "E_IO"

# codes that mean "the input files are malformed" rather than "the data is incomplete"
INPUT_FORMAT_CODES = frozenset(
    {E_PARSE, E_SCHEMA, E_BAND_GAP, E_BAND_OVERLAP, E_SCORE_RANGE, E_UNKNOWN_ID, E_UNKNOWN_ROLE}
)


class AppraisalError(ValueError):
    """Raised for any contract violation inside the appraisal engine."""

    def __init__(self, code: str, message: str, location: str | None = None):
        self.code = code
        self.message = message
        self.location = location
        where = f" ({location})" if location else ""
        super().__init__(f"{code}: {message}{where}")
