"""Derivation of the cross-sectional demographic table.

One row per respondent: sex, race, age in 1979 (from the birth year
recorded in both 1979 and 1981), the highest-grade variables, and the
latest diploma/GED status.
"""

from __future__ import annotations

from dataclasses import dataclass

from .columns import QuestionFamily
from .employment import derive_grade_table
from .flags import Flag
from .ingest import Missing, RawTable
from .tables import PersonDemographics

__all__ = [
    "DemographicsError",
    "GRADE_LABELS",
    "BirthYear",
    "derive_birth_year",
    "derive_age_1979",
    "decode_sex",
    "decode_race",
    "derive_hgc_ever",
    "derive_ged",
    "build_demog_table",
    "DemogResult",
]


class DemographicsError(ValueError):
    """A demographic code fell outside its registry."""


SEX_CODES = {1: "m", 2: "f"}

# Screener race codes: 1 Hispanic, 2 Black, 3 Non-Black Non-Hispanic.
RACE_CODES = {1: "H", 2: "B", 3: "NBH"}

_ORDINALS = {1: "1ST", 2: "2ND", 3: "3RD"}


def _ordinal(n: int) -> str:
    return _ORDINALS.get(n, f"{n}TH")


# Grade labels 0..20; 13-20 are college years, capped at "8TH YEAR
# COLLEGE OR MORE".  Frozen: the label<->integer pairing is a bijection
# relied on downstream.
GRADE_LABELS: dict[int, str] = {0: "NONE"}
for _g in range(1, 13):
    GRADE_LABELS[_g] = f"{_ordinal(_g)} GRADE"
for _g in range(13, 20):
    GRADE_LABELS[_g] = f"{_ordinal(_g - 12)} YEAR COLLEGE"
GRADE_LABELS[20] = "8TH YEAR COLLEGE OR MORE"

BIRTH_YEAR_RANGE = (1955, 1966)

GED_CODES = (1, 2, 3)  # 1 diploma, 2 GED, 3 both


@dataclass(frozen=True)
class BirthYear:
    year: int | None
    consistent: bool


def derive_birth_year(y1979: int | None, y1981: int | None) -> BirthYear:
    """Reconcile the two recorded birth years, preferring the 1979 one.

    Both sources missing yields no year; disagreement keeps the 1979
    report and marks the person inconsistent.
    """
    if y1979 is None and y1981 is None:
        return BirthYear(year=None, consistent=True)
    if y1979 is None:
        return BirthYear(year=y1981, consistent=True)
    if y1981 is None or y1979 == y1981:
        return BirthYear(year=y1979, consistent=True)
    return BirthYear(year=y1979, consistent=False)


def derive_age_1979(birth_year: int) -> int:
    """Age at the first round; birth years outside 1955-1966 are
    implausible for this cohort and rejected."""
    low, high = BIRTH_YEAR_RANGE
    if not low <= birth_year <= high:
        raise DemographicsError(f"birth year {birth_year} outside {low}..{high}")
    return 1979 - birth_year


def decode_sex(raw: int) -> str:
    try:
        return SEX_CODES[raw]
    except KeyError:
        raise DemographicsError(f"unknown sex code {raw}") from None


def decode_race(raw: int) -> str:
    try:
        return RACE_CODES[raw]
    except KeyError:
        raise DemographicsError(f"unknown race code {raw}") from None


def derive_hgc_ever(raw: int) -> tuple[str, int]:
    """Highest grade ever completed as (label, integer)."""
    label = GRADE_LABELS.get(raw)
    if label is None:
        raise DemographicsError(f"grade {raw} outside label registry 0..20")
    return label, raw


def derive_ged(statuses_by_year: dict[int, int | None]) -> int | None:
    """Latest non-missing diploma/GED status, or missing if never
    reported.  Codes outside {1,2,3} are ignored."""
    latest: int | None = None
    for year in sorted(statuses_by_year):
        status = statuses_by_year[year]
        if status in GED_CODES:
            latest = status
    return latest


@dataclass(frozen=True)
class DemogResult:
    rows: list[PersonDemographics]
    flags: list[Flag]


def _decoded_or_none(raw: RawTable, case_id: int, family, year=None) -> int | None:
    col = raw.find(family, year=year)
    if col is None:
        return None
    value = raw.decoded(case_id, col)
    return None if isinstance(value, Missing) else int(value)


def build_demog_table(raw: RawTable) -> DemogResult:
    """Derive one demographic row per case id, in id order.

    Per-person problems (missing or conflicting birth years, unknown
    codes, out-of-registry grades) are flagged and leave the affected
    field missing; they never abort the build.
    """
    flags: list[Flag] = []
    grades = derive_grade_table(raw)
    ged_cols = raw.family_columns(QuestionFamily.Q3_8A)

    rows: list[PersonDemographics] = []
    for case_id in sorted(raw.case_ids):
        y79 = _decoded_or_none(raw, case_id, QuestionFamily.Q1_3_Y, 1979)
        y81 = _decoded_or_none(raw, case_id, QuestionFamily.Q1_3_Y, 1981)
        birth = derive_birth_year(y79, y81)
        if not birth.consistent:
            flags.append(
                Flag("birth_year_conflict", case_id, {"y1979": y79, "y1981": y81})
            )
        age: int | None = None
        if birth.year is None:
            flags.append(Flag("birth_year_missing", case_id))
        else:
            try:
                age = derive_age_1979(birth.year)
            except DemographicsError:
                flags.append(
                    Flag("birth_year_out_of_range", case_id, {"birth_year": birth.year})
                )

        sex: str | None = None
        raw_sex = _decoded_or_none(raw, case_id, QuestionFamily.SAMPLE_SEX, 1979)
        if raw_sex is not None:
            try:
                sex = decode_sex(raw_sex)
            except DemographicsError:
                flags.append(Flag("unknown_sex_code", case_id, {"code": raw_sex}))

        race: str | None = None
        raw_race = _decoded_or_none(raw, case_id, QuestionFamily.SAMPLE_RACE, 1979)
        if raw_race is not None:
            try:
                race = decode_race(raw_race)
            except DemographicsError:
                flags.append(Flag("unknown_race_code", case_id, {"code": raw_race}))

        hgc_label: str | None = None
        hgc_i: int | None = None
        raw_hgc = _decoded_or_none(raw, case_id, QuestionFamily.HGC_EVER)
        if raw_hgc is not None:
            try:
                hgc_label, hgc_i = derive_hgc_ever(raw_hgc)
            except DemographicsError:
                flags.append(Flag("hgc_outside_registry", case_id, {"value": raw_hgc}))

        statuses: dict[int, int | None] = {}
        for col in ged_cols:
            value = raw.decoded(case_id, col)
            statuses[col.descriptor.year] = (
                None if isinstance(value, Missing) else int(value)
            )
        ged = derive_ged(statuses)

        rows.append(
            PersonDemographics(
                id=case_id,
                age_1979=age,
                sex=sex,
                race=race,
                hgc=hgc_label,
                hgc_i=hgc_i,
                hgc_1979=grades.get(case_id, {}).get(1979),
                ged=ged,
            )
        )
    return DemogResult(rows=rows, flags=flags)
