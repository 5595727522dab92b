"""High-school-dropout subsetting, reconciliation against the original
textbook ids, two-sample comparison summaries, and CPI adjustment.

A male is a dropout when his highest grade is below 12, or at least 12
with a GED (codes 2 and 3) or with no diploma/GED record at all; a
diploma alone (code 1) excludes him.  Age never excludes anyone by
default; an optional filter restores the narrower published age window.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .flags import Flag
from .tables import PersonDemographics, WageRow

__all__ = [
    "DropoutRule",
    "DropoutDecision",
    "CohortError",
    "classify_dropout",
    "build_dropout_subset",
    "DropoutSubset",
    "reconcile_with_original",
    "ReconciliationReport",
    "OriginalRecord",
    "read_original_csv",
    "read_cpi_csv",
    "adjust_inflation",
    "undo_inflation_adjustment",
    "compare_summaries",
    "ComparisonBundle",
    "EXPERIENCE_BINS",
    "LOG_WAGE_BINS",
]


class CohortError(ValueError):
    """Cohort inputs violated a contract."""


class DropoutRule(enum.Enum):
    HGC_BELOW_12 = "HgcBelow12"
    GED_EQUIVALENCY = "GedEquivalency"
    GED_BOTH = "GedBoth"
    GED_MISSING = "GedMissing"
    EXCLUDED_DIPLOMA = "ExcludedDiploma"
    EXCLUDED_FEW_ROUNDS = "ExcludedFewRounds"
    # Not part of the published taxonomy: needed so that classification
    # is total over the mixed-sex demographic table.
    EXCLUDED_FEMALE = "ExcludedFemale"


@dataclass(frozen=True)
class DropoutDecision:
    id: int
    included: bool
    rule: DropoutRule


_GED_ONLY = 2
_DIPLOMA_ONLY = 1
_GED_AND_DIPLOMA = 3


def classify_dropout(
    person: PersonDemographics, include_females: bool = False
) -> DropoutDecision | None:
    """Evaluate the dropout criteria for one person.

    Returns None when the highest grade is missing (decision deferred,
    reported by the caller).  Diploma exclusion is checked before the
    inclusion rules.
    """
    if person.sex != "m" and not include_females:
        return DropoutDecision(person.id, False, DropoutRule.EXCLUDED_FEMALE)
    if person.hgc_i is None:
        return None
    if person.hgc_i >= 12 and person.ged == _DIPLOMA_ONLY:
        return DropoutDecision(person.id, False, DropoutRule.EXCLUDED_DIPLOMA)
    if person.hgc_i < 12:
        return DropoutDecision(person.id, True, DropoutRule.HGC_BELOW_12)
    if person.ged == _GED_ONLY:
        return DropoutDecision(person.id, True, DropoutRule.GED_EQUIVALENCY)
    if person.ged == _GED_AND_DIPLOMA:
        return DropoutDecision(person.id, True, DropoutRule.GED_BOTH)
    return DropoutDecision(person.id, True, DropoutRule.GED_MISSING)


@dataclass(frozen=True)
class DropoutSubset:
    rows: list[WageRow]
    decisions: dict[int, DropoutDecision]
    deferred_ids: tuple[int, ...]
    flags: tuple[Flag, ...]

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(sorted({row.id for row in self.rows}))


def build_dropout_subset(
    wages: Sequence[WageRow],
    demog: Sequence[PersonDemographics],
    include_females: bool = False,
    age_filter: tuple[int, int] | None = None,
) -> DropoutSubset:
    """Wage rows of the dropout cohort, schema identical to the input.

    Criteria-included persons missing from the wages table (they did
    not survive the minimum-rounds filter) are re-classified as
    ExcludedFewRounds.  age_filter optionally restricts to the published
    first-interview age window.
    """
    wage_ids = {row.id for row in wages}
    decisions: dict[int, DropoutDecision] = {}
    deferred: list[int] = []
    for person in demog:
        decision = classify_dropout(person, include_females=include_females)
        if decision is None:
            deferred.append(person.id)
            continue
        if decision.included and age_filter is not None:
            low, high = age_filter
            if person.age_1979 is None or not low <= person.age_1979 <= high:
                continue  # silently outside the optional window
        if decision.included and person.id not in wage_ids:
            decision = DropoutDecision(
                person.id, False, DropoutRule.EXCLUDED_FEW_ROUNDS
            )
        decisions[person.id] = decision
    included = {cid for cid, d in decisions.items() if d.included}
    rows = [row for row in wages if row.id in included]
    flags = tuple(
        Flag("dropout_decision_deferred_hgc_missing", cid) for cid in sorted(deferred)
    )
    return DropoutSubset(
        rows=rows,
        decisions=decisions,
        deferred_ids=tuple(sorted(deferred)),
        flags=flags,
    )


@dataclass(frozen=True)
class ReconciliationReport:
    """Partition of the symmetric difference between a refreshed subset
    and the original id list, mirroring the published matching taxonomy."""

    matched: int
    categories: dict[str, list[int]]

    def counts(self) -> dict[str, int]:
        return {name: len(ids) for name, ids in self.categories.items()}

    def to_json(self) -> dict[str, Any]:
        return {
            "matched": self.matched,
            "counts": self.counts(),
            "categories": {k: sorted(v) for k, v in self.categories.items()},
        }


_RECONCILE_CATEGORIES = (
    "older_than_17",
    "diploma_excluded",
    "ged_missing",
    "ged_both",
    "fewer_than_3_rounds",
    "unexplained_missing",
    "new_in_refreshed",
)


def reconcile_with_original(
    subset_ids: Iterable[int],
    original_ids: Iterable[int],
    demog: Sequence[PersonDemographics],
    wage_ids: Iterable[int],
) -> ReconciliationReport:
    """Categorize why ids differ between a refreshed subset and the
    original list.

    Original-only ids are attributed, in order of precedence, to: being
    older than 17 in 1979, holding a diploma, having no GED record,
    holding both credentials, or missing the minimum-rounds cut; the
    remainder is unexplained.  Refreshed-only ids land in
    new_in_refreshed.  The categories exactly partition the symmetric
    difference.
    """
    subset = list(subset_ids)
    original = list(original_ids)
    if len(set(subset)) != len(subset):
        raise CohortError("duplicate ids in refreshed subset list")
    if len(set(original)) != len(original):
        raise CohortError("duplicate ids in original id list")
    subset_set = set(subset)
    original_set = set(original)
    wages = set(wage_ids)
    by_id = {person.id: person for person in demog}

    categories: dict[str, list[int]] = {name: [] for name in _RECONCILE_CATEGORIES}
    for cid in sorted(original_set - subset_set):
        person = by_id.get(cid)
        if person is None:
            categories["unexplained_missing"].append(cid)
        elif person.age_1979 is not None and person.age_1979 > 17:
            categories["older_than_17"].append(cid)
        elif person.hgc_i is not None and person.hgc_i >= 12 and person.ged == _DIPLOMA_ONLY:
            categories["diploma_excluded"].append(cid)
        elif person.hgc_i is not None and person.hgc_i >= 12 and person.ged is None:
            categories["ged_missing"].append(cid)
        elif person.ged == _GED_AND_DIPLOMA:
            categories["ged_both"].append(cid)
        elif cid not in wages:
            categories["fewer_than_3_rounds"].append(cid)
        else:
            categories["unexplained_missing"].append(cid)
    categories["new_in_refreshed"] = sorted(subset_set - original_set)
    return ReconciliationReport(
        matched=len(subset_set & original_set), categories=categories
    )


@dataclass(frozen=True)
class OriginalRecord:
    id: int
    lnw: float
    exper: float
    hgc: int | None


def read_original_csv(path: str | Path) -> list[OriginalRecord]:
    """Read the published textbook subset; extra columns (race flags,
    unemployment rate) are ignored."""
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise CohortError(f"{path} has no header")
        names = {name.lower(): name for name in reader.fieldnames}
        for required in ("id", "lnw", "exper", "hgc"):
            if required not in names:
                raise CohortError(f"{path} is missing column {required!r}")
        records = []
        for rec in reader:
            hgc_cell = rec[names["hgc"]].strip()
            records.append(
                OriginalRecord(
                    id=int(rec[names["id"]]),
                    lnw=float(rec[names["lnw"]]),
                    exper=float(rec[names["exper"]]),
                    hgc=int(hgc_cell) if hgc_cell else None,
                )
            )
    return records


def read_cpi_csv(path: str | Path) -> dict[int, float]:
    """Two-column (year, index) table; indices must be positive."""
    cpi: dict[int, float] = {}
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [cell.strip().lower() for cell in header[:2]] != ["year", "index"]:
            raise CohortError(f"{path}: expected header 'year,index'")
        for line_no, row in enumerate(reader, start=2):
            year = int(row[0])
            index = float(row[1])
            if index <= 0:
                raise CohortError(f"{path} line {line_no}: index must be positive")
            if year in cpi:
                raise CohortError(f"{path}: duplicate year {year}")
            cpi[year] = index
    return cpi


def _scale_wages(
    rows: Sequence[WageRow],
    cpi: Mapping[int, float],
    base_year: int,
    invert: bool,
) -> list[WageRow]:
    needed = sorted({row.year for row in rows} | {base_year})
    missing = [year for year in needed if year not in cpi]
    if missing:
        raise CohortError(f"CPI table is missing year(s): {missing}")
    base = cpi[base_year]
    adjusted = []
    for row in rows:
        factor = cpi[row.year] / base if invert else base / cpi[row.year]
        adjusted.append(
            WageRow(
                id=row.id,
                year=row.year,
                wage=row.wage * factor,
                age_1979=row.age_1979,
                sex=row.sex,
                race=row.race,
                grade=row.grade,
                hgc=row.hgc,
                hgc_i=row.hgc_i,
                hgc_1979=row.hgc_1979,
                ged=row.ged,
                njobs=row.njobs,
                hours=row.hours,
                stwork=row.stwork,
                yr_wforce=row.yr_wforce,
                exp=row.exp,
                is_wm=row.is_wm,
                is_pred=row.is_pred,
            )
        )
    return adjusted


def adjust_inflation(
    rows: Sequence[WageRow], cpi: Mapping[int, float], base_year: int
) -> list[WageRow]:
    """Express every wage in base-year money: wage * cpi(base)/cpi(year).

    Every survey year present (and the base year) must be covered, and
    the provenance flags are left untouched.  undo_inflation_adjustment
    is the exact inverse back to per-row-year money.
    """
    return _scale_wages(rows, cpi, base_year, invert=False)


def undo_inflation_adjustment(
    rows: Sequence[WageRow], cpi: Mapping[int, float], base_year: int
) -> list[WageRow]:
    """Convert a table in constant base-year money back to nominal
    per-row-year money: wage * cpi(year)/cpi(base)."""
    return _scale_wages(rows, cpi, base_year, invert=True)


# Fixed bin specs keep the comparison reproducible run to run.
EXPERIENCE_BINS = (0.0, 45.0, 1.0)   # lo, hi, width
LOG_WAGE_BINS = (0.0, 8.0, 0.25)


def _bin_counts(
    values: Sequence[float], spec: tuple[float, float, float]
) -> tuple[list[int], int]:
    lo, hi, width = spec
    n_bins = int(round((hi - lo) / width))
    counts = [0] * n_bins
    out_of_range = 0
    for value in values:
        if value < lo or value >= hi:
            out_of_range += 1
            continue
        idx = int((value - lo) / width)
        if idx >= n_bins:  # guard the hi boundary against float edge
            idx = n_bins - 1
        counts[idx] += 1
    return counts, out_of_range


@dataclass(frozen=True)
class DensityTable:
    spec: tuple[float, float, float]
    refreshed_counts: list[int]
    original_counts: list[int]
    refreshed_out_of_range: int
    original_out_of_range: int

    def bin_edges(self) -> list[float]:
        lo, hi, width = self.spec
        n_bins = int(round((hi - lo) / width))
        return [lo + i * width for i in range(n_bins + 1)]


@dataclass(frozen=True)
class ComparisonBundle:
    hgc_counts: dict[int, dict[str, int]]   # grade -> {refreshed, original}
    experience: DensityTable
    log_wage: DensityTable
    nonpositive_wages_excluded: int


def compare_summaries(
    refreshed: Sequence[WageRow], original: Sequence[OriginalRecord]
) -> ComparisonBundle:
    """Two-sample comparison of the refreshed dropout subset with the
    published textbook table (no id matching: the original carries no
    survey year)."""
    refreshed_hgc: dict[int, int] = {}
    seen: set[int] = set()
    for row in refreshed:
        if row.id not in seen and row.hgc_i is not None:
            seen.add(row.id)
            refreshed_hgc[row.hgc_i] = refreshed_hgc.get(row.hgc_i, 0) + 1
    original_hgc: dict[int, int] = {}
    seen_original: set[int] = set()
    for rec in original:
        if rec.id not in seen_original and rec.hgc is not None:
            seen_original.add(rec.id)
            original_hgc[rec.hgc] = original_hgc.get(rec.hgc, 0) + 1
    grades = sorted(set(refreshed_hgc) | set(original_hgc))
    hgc_counts = {
        grade: {
            "refreshed": refreshed_hgc.get(grade, 0),
            "original": original_hgc.get(grade, 0),
        }
        for grade in grades
    }

    refreshed_exp = [row.exp for row in refreshed]
    original_exp = [rec.exper for rec in original]
    exp_refreshed, exp_refreshed_out = _bin_counts(refreshed_exp, EXPERIENCE_BINS)
    exp_original, exp_original_out = _bin_counts(original_exp, EXPERIENCE_BINS)

    nonpositive = sum(1 for row in refreshed if row.wage <= 0)
    refreshed_lnw = [math.log(row.wage) for row in refreshed if row.wage > 0]
    original_lnw = [rec.lnw for rec in original]
    lnw_refreshed, lnw_refreshed_out = _bin_counts(refreshed_lnw, LOG_WAGE_BINS)
    lnw_original, lnw_original_out = _bin_counts(original_lnw, LOG_WAGE_BINS)

    return ComparisonBundle(
        hgc_counts=hgc_counts,
        experience=DensityTable(
            spec=EXPERIENCE_BINS,
            refreshed_counts=exp_refreshed,
            original_counts=exp_original,
            refreshed_out_of_range=exp_refreshed_out,
            original_out_of_range=exp_original_out,
        ),
        log_wage=DensityTable(
            spec=LOG_WAGE_BINS,
            refreshed_counts=lnw_refreshed,
            original_counts=lnw_original,
            refreshed_out_of_range=lnw_refreshed_out,
            original_out_of_range=lnw_original_out,
        ),
        nonpositive_wages_excluded=nonpositive,
    )
