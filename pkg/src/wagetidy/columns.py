"""Column-name grammar for the wide NLSY79 survey extract.

Every header in the downloaded CSV encodes three things: the question
family, an optional job slot (families asked once per job), and either a
survey year or the cross-round marker ``XRND``.  The grammar is driven by
a small declarative registry so that a new survey round only needs a new
year added here, not new parsing code.

Examples of the three suffix styles:

    HRP3_1980                                   slot 3, year 1980
    QES-52A.01_1993                             slot 1, year 1993
    SAMPLE_RACE_78SCRN                          fixed label, maps to 1979
    HGC_EVER_XRND                               cross-round, no year
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

__all__ = [
    "QuestionFamily",
    "RawColumnDescriptor",
    "ColumnNameError",
    "parse_column_name",
    "render_column_name",
    "SURVEY_YEARS",
    "PER_JOB_FAMILIES",
    "XRND_FAMILIES",
    "MAX_JOB_SLOT",
]

# Annual rounds 1979-1994, biennial 1996-2018 (rounds 1-28).
SURVEY_YEARS: tuple[int, ...] = tuple(range(1979, 1995)) + tuple(range(1996, 2019, 2))

MAX_JOB_SLOT = 5


class ColumnNameError(ValueError):
    """A header did not parse under the column-name grammar."""


class QuestionFamily(enum.Enum):
    CASEID = "CASEID"
    HRP = "HRP"                  # hourly wage per job, stored in cents
    QES_52A = "QES-52A"          # hours worked per week, per job
    QES_52D = "QES-52D"          # total hours incl. work from home, per job
    WKSWK = "WKSWK"              # weeks worked since last interview
    HGC = "HGC"                  # highest grade completed, per round
    HGCREV = "HGCREV"            # revised highest grade completed, per round
    Q3_4 = "Q3-4"                # highest grade attended, per round
    Q3_8A = "Q3-8A"              # diploma / GED status, per round
    Q1_3_Y = "Q1-3-Y"            # birth year (recorded 1979 and 1981)
    Q1_3_M = "Q1-3-M"            # birth month (recorded 1979 and 1981)
    SAMPLE_SEX = "SAMPLE_SEX"
    SAMPLE_RACE = "SAMPLE_RACE"
    HGC_EVER = "HGC_EVER"        # highest grade ever completed, cross-round
    STARTDATE = "STARTDATE"      # year the first job started, cross-round


class _SlotStyle(enum.Enum):
    NONE = "none"
    INLINE = "inline"      # HRP3
    DOTTED = "dotted"      # QES-52A.03


class _YearStyle(enum.Enum):
    STANDARD = "standard"  # _1984
    FIXED = "fixed"        # _78SCRN (fixed label standing for one round)
    XRND = "xrnd"          # _XRND


@dataclass(frozen=True)
class _FamilySpec:
    family: QuestionFamily
    token: str
    slot_style: _SlotStyle = _SlotStyle.NONE
    year_style: _YearStyle = _YearStyle.STANDARD
    fixed_suffix: str | None = None
    fixed_year: int | None = None


# Tokens are the literal header prefixes as emitted by the survey download
# (after the provider's conversion script renames reference numbers to
# question names).  The race screener suffix "78SCRN" is a label for the
# 1978 screening attached to the 1979 round; the registry pins it to 1979
# so that every non-cross-round descriptor carries a survey year.
_REGISTRY: tuple[_FamilySpec, ...] = (
    _FamilySpec(QuestionFamily.CASEID, "CASEID"),
    _FamilySpec(QuestionFamily.HRP, "HRP", slot_style=_SlotStyle.INLINE),
    _FamilySpec(QuestionFamily.QES_52A, "QES-52A", slot_style=_SlotStyle.DOTTED),
    _FamilySpec(QuestionFamily.QES_52D, "QES-52D", slot_style=_SlotStyle.DOTTED),
    _FamilySpec(QuestionFamily.WKSWK, "WKSWK"),
    _FamilySpec(QuestionFamily.HGCREV, "HGCREV"),
    _FamilySpec(QuestionFamily.HGC, "HGC"),
    _FamilySpec(QuestionFamily.Q3_4, "Q3-4"),
    _FamilySpec(QuestionFamily.Q3_8A, "Q3-8A"),
    _FamilySpec(QuestionFamily.Q1_3_Y, "Q1-3_A~Y"),
    _FamilySpec(QuestionFamily.Q1_3_M, "Q1-3_A~M"),
    _FamilySpec(QuestionFamily.SAMPLE_SEX, "SAMPLE_SEX"),
    _FamilySpec(
        QuestionFamily.SAMPLE_RACE,
        "SAMPLE_RACE",
        year_style=_YearStyle.FIXED,
        fixed_suffix="78SCRN",
        fixed_year=1979,
    ),
    _FamilySpec(QuestionFamily.HGC_EVER, "HGC_EVER", year_style=_YearStyle.XRND),
    _FamilySpec(
        QuestionFamily.STARTDATE,
        "EMPLOYERS_ALL_STARTDATE_ORIGINAL.01~Y",
        year_style=_YearStyle.XRND,
    ),
)

_BY_FAMILY: dict[QuestionFamily, _FamilySpec] = {spec.family: spec for spec in _REGISTRY}
_SLOTLESS_TOKENS: dict[str, _FamilySpec] = {
    spec.token: spec for spec in _REGISTRY if spec.slot_style is _SlotStyle.NONE
}
_SLOTTED_SPECS: tuple[_FamilySpec, ...] = tuple(
    spec for spec in _REGISTRY if spec.slot_style is not _SlotStyle.NONE
)

PER_JOB_FAMILIES = frozenset(spec.family for spec in _SLOTTED_SPECS)
XRND_FAMILIES = frozenset(
    spec.family for spec in _REGISTRY if spec.year_style is _YearStyle.XRND
)


@dataclass(frozen=True)
class RawColumnDescriptor:
    """Decoded identity of one wide-table column."""

    family: QuestionFamily
    job_slot: int | None = None
    year: int | None = None

    def __post_init__(self) -> None:
        if (self.job_slot is not None) != (self.family in PER_JOB_FAMILIES):
            raise ColumnNameError(
                f"job slot is {'required' if self.family in PER_JOB_FAMILIES else 'not allowed'}"
                f" for family {self.family.value}"
            )
        if self.job_slot is not None and not 1 <= self.job_slot <= MAX_JOB_SLOT:
            raise ColumnNameError(
                f"job slot {self.job_slot} out of range 1..{MAX_JOB_SLOT}"
            )
        if (self.year is None) != (self.family in XRND_FAMILIES):
            raise ColumnNameError(
                f"year is {'not allowed' if self.family in XRND_FAMILIES else 'required'}"
                f" for family {self.family.value}"
            )
        if self.year is not None and self.year not in _SURVEY_YEAR_SET:
            raise ColumnNameError(f"{self.year} is not a survey year")


_SURVEY_YEAR_SET = frozenset(SURVEY_YEARS)


def _parse_year(suffix: str, name: str) -> int:
    if not (len(suffix) == 4 and suffix.isdigit()):
        raise ColumnNameError(f"malformed year suffix {suffix!r} in column {name!r}")
    year = int(suffix)
    if year not in _SURVEY_YEAR_SET:
        raise ColumnNameError(f"{year} in column {name!r} is not a survey year")
    return year


def _match_head(head: str, name: str) -> tuple[_FamilySpec, int | None]:
    spec = _SLOTLESS_TOKENS.get(head)
    if spec is not None:
        return spec, None
    for spec in _SLOTTED_SPECS:
        if spec.slot_style is _SlotStyle.INLINE:
            if head.startswith(spec.token) and head[len(spec.token):].isdigit():
                digits = head[len(spec.token):]
                if len(digits) != 1:
                    raise ColumnNameError(f"malformed job slot in column {name!r}")
                slot = int(digits)
                if not 1 <= slot <= MAX_JOB_SLOT:
                    raise ColumnNameError(
                        f"job slot {slot} out of range 1..{MAX_JOB_SLOT} in column {name!r}"
                    )
                return spec, slot
        elif head.startswith(spec.token + "."):
            digits = head[len(spec.token) + 1:]
            if len(digits) != 2 or not digits.isdigit():
                raise ColumnNameError(f"malformed job slot in column {name!r}")
            slot = int(digits)
            if not 1 <= slot <= MAX_JOB_SLOT:
                raise ColumnNameError(
                    f"job slot {slot} out of range 1..{MAX_JOB_SLOT} in column {name!r}"
                )
            return spec, slot
    raise ColumnNameError(f"unknown question family in column {name!r}")


def parse_column_name(name: str) -> RawColumnDescriptor:
    """Decode a wide-table header into (family, job slot, year).

    Raises ColumnNameError for unknown families and malformed slot or
    year suffixes; rendering the result with render_column_name gives
    back the original header.
    """
    if not name:
        raise ColumnNameError("empty column name")
    head, sep, suffix = name.rpartition("_")
    if not sep or not head or not suffix:
        raise ColumnNameError(f"column {name!r} has no year suffix")
    spec, slot = _match_head(head, name)
    if spec.year_style is _YearStyle.XRND:
        if suffix != "XRND":
            raise ColumnNameError(
                f"family {spec.family.value} expects XRND suffix, got {suffix!r}"
            )
        year = None
    elif spec.year_style is _YearStyle.FIXED:
        if suffix != spec.fixed_suffix:
            raise ColumnNameError(
                f"family {spec.family.value} expects suffix {spec.fixed_suffix!r},"
                f" got {suffix!r}"
            )
        year = spec.fixed_year
    else:
        year = _parse_year(suffix, name)
    return RawColumnDescriptor(family=spec.family, job_slot=slot, year=year)


def render_column_name(descriptor: RawColumnDescriptor) -> str:
    """Inverse of parse_column_name."""
    spec = _BY_FAMILY[descriptor.family]
    if spec.slot_style is _SlotStyle.NONE:
        head = spec.token
    elif spec.slot_style is _SlotStyle.INLINE:
        head = f"{spec.token}{descriptor.job_slot}"
    else:
        head = f"{spec.token}.{descriptor.job_slot:02d}"
    if spec.year_style is _YearStyle.XRND:
        suffix = "XRND"
    elif spec.year_style is _YearStyle.FIXED:
        suffix = spec.fixed_suffix or ""
    else:
        suffix = str(descriptor.year)
    return f"{head}_{suffix}"
