"""Tidy row types and their CSV serialization.

The CSV conventions are part of the output contract: booleans serialize
as TRUE/FALSE, missing values as empty fields, and floats with Python's
shortest round-tripping repr so that re-reading a stage output recovers
bit-identical values and re-running a stage reproduces identical bytes.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

__all__ = [
    "PersonDemographics",
    "JobObservation",
    "WageRow",
    "DEMOG_FIELDS",
    "WAGES_FIELDS",
    "demog_to_csv",
    "wages_to_csv",
    "read_demog_csv",
    "read_wages_csv",
]

DEMOG_FIELDS = ("id", "age_1979", "sex", "race", "hgc", "hgc_i", "hgc_1979", "ged")

WAGES_FIELDS = (
    "id",
    "year",
    "wage",
    "age_1979",
    "sex",
    "race",
    "grade",
    "hgc",
    "hgc_i",
    "hgc_1979",
    "ged",
    "njobs",
    "hours",
    "stwork",
    "yr_wforce",
    "exp",
    "is_wm",
    "is_pred",
)


@dataclass(frozen=True)
class PersonDemographics:
    """One cross-sectional row per respondent."""

    id: int
    age_1979: int | None
    sex: str | None          # "f" / "m"
    race: str | None         # "NBH" / "H" / "B"
    hgc: str | None          # grade label, e.g. "10TH GRADE"
    hgc_i: int | None
    hgc_1979: int | None
    ged: int | None          # 1 diploma, 2 GED, 3 both


@dataclass(frozen=True)
class JobObservation:
    """One (person, year, job slot) wage/hours record."""

    id: int
    year: int
    job_slot: int
    wage: float | None       # dollars per hour
    hours: int | None        # hours per week


@dataclass(frozen=True)
class WageRow:
    """One tidy (person, year) row of the wages table."""

    id: int
    year: int
    wage: float
    age_1979: int | None
    sex: str | None
    race: str | None
    grade: int | None
    hgc: str | None
    hgc_i: int | None
    hgc_1979: int | None
    ged: int | None
    njobs: int
    hours: int | None
    stwork: int | None
    yr_wforce: int | None
    exp: float
    is_wm: bool
    is_pred: bool


def _fmt(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "TRUE" if value else "FALSE"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _rows_to_csv(fields: tuple[str, ...], rows: Iterable[object]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([_fmt(getattr(row, name)) for name in fields])
    return buf.getvalue()


def demog_to_csv(rows: Iterable[PersonDemographics]) -> str:
    return _rows_to_csv(DEMOG_FIELDS, rows)


def wages_to_csv(rows: Iterable[WageRow]) -> str:
    return _rows_to_csv(WAGES_FIELDS, rows)


def _opt_int(cell: str) -> int | None:
    return None if cell == "" else int(cell)


def _opt_str(cell: str) -> str | None:
    return None if cell == "" else cell


def _bool(cell: str) -> bool:
    if cell == "TRUE":
        return True
    if cell == "FALSE":
        return False
    raise ValueError(f"expected TRUE/FALSE, got {cell!r}")


def _read_rows(path: str | Path, fields: tuple[str, ...]) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if tuple(header) != fields:
            raise ValueError(
                f"{path}: expected columns {list(fields)}, found {header}"
            )
        return [dict(zip(fields, row)) for row in reader]


def read_demog_csv(path: str | Path) -> list[PersonDemographics]:
    rows = []
    for rec in _read_rows(path, DEMOG_FIELDS):
        rows.append(
            PersonDemographics(
                id=int(rec["id"]),
                age_1979=_opt_int(rec["age_1979"]),
                sex=_opt_str(rec["sex"]),
                race=_opt_str(rec["race"]),
                hgc=_opt_str(rec["hgc"]),
                hgc_i=_opt_int(rec["hgc_i"]),
                hgc_1979=_opt_int(rec["hgc_1979"]),
                ged=_opt_int(rec["ged"]),
            )
        )
    return rows


def read_wages_csv(path: str | Path) -> list[WageRow]:
    rows = []
    for rec in _read_rows(path, WAGES_FIELDS):
        rows.append(
            WageRow(
                id=int(rec["id"]),
                year=int(rec["year"]),
                wage=float(rec["wage"]),
                age_1979=_opt_int(rec["age_1979"]),
                sex=_opt_str(rec["sex"]),
                race=_opt_str(rec["race"]),
                grade=_opt_int(rec["grade"]),
                hgc=_opt_str(rec["hgc"]),
                hgc_i=_opt_int(rec["hgc_i"]),
                hgc_1979=_opt_int(rec["hgc_1979"]),
                ged=_opt_int(rec["ged"]),
                njobs=int(rec["njobs"]),
                hours=_opt_int(rec["hours"]),
                stwork=_opt_int(rec["stwork"]),
                yr_wforce=_opt_int(rec["yr_wforce"]),
                exp=float(rec["exp"]),
                is_wm=_bool(rec["is_wm"]),
                is_pred=_bool(rec["is_pred"]),
            )
        )
    return rows
