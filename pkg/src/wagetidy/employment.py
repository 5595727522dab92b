"""Tidying of the employment variables.

Turns the per-job wide columns into long job observations, applies the
wage-cleaning rules, aggregates to one row per (person, year), derives
the grade series, start-of-work and cumulative experience, and applies
the minimum-three-rounds filter.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .columns import MAX_JOB_SLOT, SURVEY_YEARS, QuestionFamily
from .flags import Flag
from .ingest import Missing, RawTable
from .tables import JobObservation, PersonDemographics, WageRow

__all__ = [
    "MeanWage",
    "EmploymentStats",
    "EmploymentResult",
    "select_hours_variable",
    "pivot_jobs_long",
    "widen_jobs",
    "clean_job_observation",
    "mean_hourly_wage",
    "grade_source_family",
    "derive_grade_table",
    "derive_stwork_yrwforce",
    "cumulate_experience",
    "derive_experience_table",
    "derive_stwork_table",
    "assemble_wages_table",
    "build_wages_table",
    "MIN_ROUNDS",
]

# Persons with fewer tidy rows than this are dropped from the wages table.
MIN_ROUNDS = 3

# Weekly hours above this make both wage and hours implausible.
MAX_WEEKLY_HOURS = 84

# Revised grade values exist through 2010; later rounds only report the
# unrevised series.
_UNREVISED_GRADE_YEARS = frozenset({2012, 2014, 2016, 2018})

WEEKS_PER_YEAR = 52


def select_hours_variable(year: int, job_slot: int) -> QuestionFamily | None:
    """Which hours family feeds a given (year, job slot).

    Early rounds only carry one hours version; from 1988 the total-hours
    variant (including work from home) takes over, except that the 1993
    file lacks it for the first and last job and the 2008 file has no
    fifth-job source at all.
    """
    if year <= 1987:
        return QuestionFamily.QES_52A
    if year == 1993 and job_slot in (1, MAX_JOB_SLOT):
        return QuestionFamily.QES_52A
    if year == 2008 and job_slot == MAX_JOB_SLOT:
        return None
    return QuestionFamily.QES_52D


def pivot_jobs_long(raw: RawTable) -> tuple[list[JobObservation], list[Flag]]:
    """Wide per-job columns to long (id, year, slot) observations.

    An observation exists wherever the wage or the selected hours cell
    decodes to a value.  Hours cells that exist only in the unselected
    pre-1988 variable for a post-1988 round are ignored and flagged.
    """
    observations: list[JobObservation] = []
    alternate_only: dict[int, list[list[int]]] = {}

    def present_mask(col):
        return ~col.blank & (col.values >= 0)

    for year in SURVEY_YEARS:
        for slot in range(1, MAX_JOB_SLOT + 1):
            wage_col = raw.find(QuestionFamily.HRP, job_slot=slot, year=year)
            hours_family = select_hours_variable(year, slot)
            hours_col = (
                raw.find(hours_family, job_slot=slot, year=year)
                if hours_family is not None
                else None
            )
            if wage_col is None and hours_col is None:
                continue
            has_wage = present_mask(wage_col) if wage_col is not None else None
            has_hours = present_mask(hours_col) if hours_col is not None else None
            if hours_family is QuestionFamily.QES_52D:
                alt_col = raw.find(QuestionFamily.QES_52A, job_slot=slot, year=year)
                if alt_col is not None:
                    no_hours = ~has_hours if has_hours is not None else None
                    alt_only = (
                        present_mask(alt_col) & no_hours
                        if no_hours is not None
                        else present_mask(alt_col)
                    )
                    for idx in alt_only.nonzero()[0]:
                        case_id = raw.case_ids[int(idx)]
                        alternate_only.setdefault(case_id, []).append([year, slot])
            if has_wage is None:
                occupied = has_hours
            elif has_hours is None:
                occupied = has_wage
            else:
                occupied = has_wage | has_hours
            for idx in occupied.nonzero()[0]:
                i = int(idx)
                wage_val = (
                    int(wage_col.values[i]) / 100.0
                    if has_wage is not None and has_wage[i]
                    else None
                )
                hours_val = (
                    int(hours_col.values[i])
                    if has_hours is not None and has_hours[i]
                    else None
                )
                observations.append(
                    JobObservation(
                        id=raw.case_ids[i], year=year, job_slot=slot,
                        wage=wage_val, hours=hours_val,
                    )
                )
    flags = [
        Flag("hours_only_in_unselected_variable", case_id, {"cells": cells})
        for case_id, cells in sorted(alternate_only.items())
    ]
    return observations, flags


def widen_jobs(
    observations: Sequence[JobObservation],
) -> dict[tuple[str, int, int, int], int]:
    """Inverse of the pivot, for round-trip checking.

    Maps (family value, id, year, slot) back to the raw integer cell:
    wages return to cents, hours stay as-is.
    """
    cells: dict[tuple[str, int, int, int], int] = {}
    for obs in observations:
        if obs.wage is not None:
            key = (QuestionFamily.HRP.value, obs.id, obs.year, obs.job_slot)
            cells[key] = round(obs.wage * 100)
        if obs.hours is not None:
            family = select_hours_variable(obs.year, obs.job_slot)
            assert family is not None
            cells[(family.value, obs.id, obs.year, obs.job_slot)] = obs.hours
    return cells


def clean_job_observation(obs: JobObservation) -> JobObservation:
    """Apply the implausible-value rules to one job.

    A recorded hourly rate of zero becomes missing; more than 84 weekly
    hours wipes both the wage and the hours (84 exactly is kept).
    """
    wage, hours = obs.wage, obs.hours
    if hours is not None and hours > MAX_WEEKLY_HOURS:
        wage = None
        hours = None
    if wage is not None and wage == 0.0:
        wage = None
    if wage is obs.wage and hours is obs.hours:
        return obs
    return JobObservation(
        id=obs.id, year=obs.year, job_slot=obs.job_slot, wage=wage, hours=hours
    )


@dataclass(frozen=True)
class MeanWage:
    wage: float
    njobs: int
    hours: int | None
    is_wm: bool


def mean_hourly_wage(jobs: Sequence[JobObservation]) -> MeanWage | None:
    """Collapse one (person, year)'s cleaned jobs to a single mean wage.

    The mean is hours-weighted when every wage-bearing job reports hours,
    otherwise a plain average of the available wages.  njobs counts jobs
    with a wage (hours alone never tally); total hours sums whatever
    hours exist across the jobs.  Returns None when no job has a wage.
    Jobs must be ordered by slot: summation order is part of the
    reproducibility contract.
    """
    wage_jobs = [j for j in jobs if j.wage is not None]
    njobs = len(wage_jobs)
    if njobs == 0:
        return None
    hours_present = [j.hours for j in jobs if j.hours is not None]
    total_hours = sum(hours_present) if hours_present else None

    if njobs == 1:
        return MeanWage(wage=wage_jobs[0].wage, njobs=1, hours=total_hours, is_wm=False)

    weighted = all(j.hours is not None for j in wage_jobs)
    weight_sum = sum(j.hours for j in wage_jobs) if weighted else 0
    if weighted and weight_sum > 0:
        numerator = 0.0
        for j in wage_jobs:
            numerator += j.wage * j.hours
        return MeanWage(
            wage=numerator / weight_sum, njobs=njobs, hours=total_hours, is_wm=True
        )
    simple = 0.0
    for j in wage_jobs:
        simple += j.wage
    return MeanWage(wage=simple / njobs, njobs=njobs, hours=total_hours, is_wm=False)


def grade_source_family(year: int) -> QuestionFamily:
    """Revised grade series where it exists, unrevised for 2012-2018."""
    if year in _UNREVISED_GRADE_YEARS:
        return QuestionFamily.HGC
    return QuestionFamily.HGCREV


def derive_grade_table(raw: RawTable) -> dict[int, dict[int, int]]:
    """Per-person, per-year highest grade completed."""
    grades: dict[int, dict[int, int]] = {cid: {} for cid in raw.case_ids}
    for year in SURVEY_YEARS:
        col = raw.find(grade_source_family(year), year=year)
        if col is None:
            continue
        for case_id in raw.case_ids:
            value = raw.decoded(case_id, col)
            if not isinstance(value, Missing):
                grades[case_id][year] = int(value)
    return grades


def derive_stwork_yrwforce(
    start_year: int | None, survey_year: int
) -> tuple[int | None, bool]:
    """Years in the workforce at a survey year; flagged when the start
    year postdates the survey."""
    if start_year is None:
        return None, False
    if start_year > survey_year:
        return None, True
    return survey_year - start_year, False


def cumulate_experience(
    weeks_by_round: Sequence[int | None],
) -> tuple[list[float], list[int]]:
    """Running work experience in fractional years.

    Weeks worked since the last interview accumulate across rounds and
    divide by 52 once per round, so the series is exactly representable
    as (integer weeks)/52.  Missing or negative rounds contribute zero
    and their indices are returned for flagging.
    """
    exps: list[float] = []
    flagged: list[int] = []
    total_weeks = 0
    for idx, weeks in enumerate(weeks_by_round):
        if weeks is None or weeks < 0:
            flagged.append(idx)
        else:
            total_weeks += weeks
        exps.append(total_weeks / WEEKS_PER_YEAR)
    return exps, flagged


def derive_experience_table(
    raw: RawTable,
) -> tuple[dict[int, dict[int, float]], list[Flag]]:
    """Cumulative experience per person per round, with gap flags."""
    year_cols = []
    for year in SURVEY_YEARS:
        col = raw.find(QuestionFamily.WKSWK, year=year)
        if col is not None:
            year_cols.append((year, col))
    table: dict[int, dict[int, float]] = {}
    flags: list[Flag] = []
    for case_id in raw.case_ids:
        weeks: list[int | None] = []
        for _, col in year_cols:
            value = raw.decoded(case_id, col)
            weeks.append(None if isinstance(value, Missing) else int(value))
        exps, flagged = cumulate_experience(weeks)
        table[case_id] = {year_cols[i][0]: exp for i, exp in enumerate(exps)}
        if flagged:
            flags.append(
                Flag(
                    "weeks_worked_missing_rounds",
                    case_id,
                    {"years": [year_cols[i][0] for i in flagged]},
                )
            )
    return table, flags


def derive_stwork_table(raw: RawTable) -> dict[int, int | None]:
    """Year each person started working (cross-round, may be missing)."""
    col = raw.find(QuestionFamily.STARTDATE)
    stwork: dict[int, int | None] = {}
    for case_id in raw.case_ids:
        if col is None:
            stwork[case_id] = None
            continue
        value = raw.decoded(case_id, col)
        stwork[case_id] = None if isinstance(value, Missing) else int(value)
    return stwork


@dataclass(frozen=True)
class EmploymentStats:
    job_observations: int
    individuals_with_wages: int
    rows_before_filter: int
    individuals_kept: int
    rows_kept: int


@dataclass(frozen=True)
class EmploymentResult:
    rows: list[WageRow]
    flags: list[Flag]
    stats: EmploymentStats


def assemble_wages_table(
    means: Mapping[tuple[int, int], MeanWage],
    demog: Sequence[PersonDemographics],
    grades: Mapping[int, Mapping[int, int]],
    experience: Mapping[int, Mapping[int, float]],
    stwork: Mapping[int, int | None],
) -> EmploymentResult:
    """Join the per-(person, year) means with the derived series.

    Wage rows without a demographic row are dropped and flagged; persons
    with fewer than MIN_ROUNDS rows are dropped.  Output is sorted by
    (id, year) with is_pred initialized false.
    """
    demog_by_id = {row.id: row for row in demog}
    flags: list[Flag] = []
    rows_by_id: dict[int, list[WageRow]] = {}
    stwork_flagged: dict[int, list[int]] = {}
    for (case_id, year) in sorted(means):
        mean = means[(case_id, year)]
        person = demog_by_id.get(case_id)
        if person is None:
            flags.append(Flag("wage_row_without_demographics", case_id, {"year": year}))
            continue
        start = stwork.get(case_id)
        yr_wforce, bad_start = derive_stwork_yrwforce(start, year)
        if bad_start:
            stwork_flagged.setdefault(case_id, []).append(year)
        row = WageRow(
            id=case_id,
            year=year,
            wage=mean.wage,
            age_1979=person.age_1979,
            sex=person.sex,
            race=person.race,
            grade=grades.get(case_id, {}).get(year),
            hgc=person.hgc,
            hgc_i=person.hgc_i,
            hgc_1979=person.hgc_1979,
            ged=person.ged,
            njobs=mean.njobs,
            hours=mean.hours,
            stwork=start,
            yr_wforce=yr_wforce,
            exp=experience.get(case_id, {}).get(year, 0.0),
            is_wm=mean.is_wm,
            is_pred=False,
        )
        rows_by_id.setdefault(case_id, []).append(row)
    for case_id, years in sorted(stwork_flagged.items()):
        flags.append(Flag("stwork_after_survey_year", case_id, {"years": years}))

    rows_before = sum(len(rows) for rows in rows_by_id.values())
    kept: list[WageRow] = []
    dropped_ids = []
    for case_id in sorted(rows_by_id):
        person_rows = rows_by_id[case_id]
        if len(person_rows) < MIN_ROUNDS:
            dropped_ids.append(case_id)
            continue
        kept.extend(person_rows)
    if dropped_ids:
        flags.append(
            Flag(
                "fewer_than_min_rounds",
                None,
                {"min_rounds": MIN_ROUNDS, "ids": dropped_ids},
            )
        )
    stats = EmploymentStats(
        job_observations=-1,  # filled by build_wages_table
        individuals_with_wages=len(rows_by_id),
        rows_before_filter=rows_before,
        individuals_kept=len({row.id for row in kept}),
        rows_kept=len(kept),
    )
    return EmploymentResult(rows=kept, flags=flags, stats=stats)


def build_wages_table(
    raw: RawTable, demog: Sequence[PersonDemographics]
) -> EmploymentResult:
    """Full employment tidying: pivot, clean, aggregate, join, filter."""
    observations, flags = pivot_jobs_long(raw)
    cleaned = [clean_job_observation(obs) for obs in observations]
    grouped: dict[tuple[int, int], list[JobObservation]] = {}
    for obs in cleaned:
        grouped.setdefault((obs.id, obs.year), []).append(obs)
    means: dict[tuple[int, int], MeanWage] = {}
    for key, jobs in grouped.items():
        jobs.sort(key=lambda j: j.job_slot)
        mean = mean_hourly_wage(jobs)
        if mean is not None:
            means[key] = mean
    grades = derive_grade_table(raw)
    experience, exp_flags = derive_experience_table(raw)
    stwork = derive_stwork_table(raw)
    result = assemble_wages_table(means, demog, grades, experience, stwork)
    stats = EmploymentStats(
        job_observations=len(observations),
        individuals_with_wages=result.stats.individuals_with_wages,
        rows_before_filter=result.stats.rows_before_filter,
        individuals_kept=result.stats.individuals_kept,
        rows_kept=result.stats.rows_kept,
    )
    return EmploymentResult(
        rows=result.rows, flags=flags + exp_flags + result.flags, stats=stats
    )
