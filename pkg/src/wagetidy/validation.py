"""Initial-data-analysis checks over the tidied tables.

Every check produces a machine-readable result (expected vs observed
plus affected ids) so the emitted report alone reproduces the pass/fail
decision.  Checks against published totals are keyed by data vintage
and soft-skip (warn) when the configured vintage does not match the
expectations file.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

from .flags import Flag
from .sampling import sample_ids
from .tables import PersonDemographics, WageRow

__all__ = [
    "CheckResult",
    "ValidationReport",
    "ProfileSummary",
    "check_age_range",
    "tabulate_age",
    "tabulate_sex_race",
    "profile_summaries",
    "sample_profiles",
    "load_expectations",
    "run_validation",
    "AGE_RANGE",
]

# Widest first-interview age range stated for the cohort.
AGE_RANGE = (12, 22)

_SEX_ORDER = ("f", "m")
_RACE_ORDER = ("H", "B", "NBH")


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str  # "pass" | "fail" | "warn"
    expected: Any
    observed: Any
    affected_ids: tuple[int, ...] = ()

    def to_json(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "status": self.status,
            "expected": self.expected,
            "observed": self.observed,
            "affected_ids": list(self.affected_ids),
        }


@dataclass
class ValidationReport:
    checks: list[CheckResult] = field(default_factory=list)
    generated_at: str = ""
    input_digest: str = ""

    @property
    def failed(self) -> bool:
        return any(check.status == "fail" for check in self.checks)

    def to_json(self) -> dict[str, Any]:
        return {
            "generated_at": self.generated_at,
            "input_digest": self.input_digest,
            "failed": self.failed,
            "checks": [check.to_json() for check in self.checks],
        }

    def to_text(self) -> str:
        lines = [
            f"validation report  (input {self.input_digest[:12]},"
            f" generated {self.generated_at})",
            "",
        ]
        for check in self.checks:
            lines.append(f"[{check.status.upper():>4}] {check.name}")
            lines.append(f"       expected: {check.expected}")
            lines.append(f"       observed: {check.observed}")
            if check.affected_ids:
                shown = ", ".join(str(i) for i in check.affected_ids[:20])
                more = len(check.affected_ids) - 20
                if more > 0:
                    shown += f" (+{more} more)"
                lines.append(f"       ids: {shown}")
        lines.append("")
        lines.append("RESULT: " + ("FAIL" if self.failed else "PASS"))
        return "\n".join(lines) + "\n"


def check_age_range(demog: Sequence[PersonDemographics]) -> CheckResult:
    """All first-interview ages must fall in the documented range."""
    low, high = AGE_RANGE
    ages = [row.age_1979 for row in demog if row.age_1979 is not None]
    if not ages:
        return CheckResult(
            name="age_range_1979",
            status="warn",
            expected=list(AGE_RANGE),
            observed="no ages present (vacuous pass)",
        )
    offenders = tuple(
        row.id
        for row in demog
        if row.age_1979 is not None and not low <= row.age_1979 <= high
    )
    return CheckResult(
        name="age_range_1979",
        status="fail" if offenders else "pass",
        expected=list(AGE_RANGE),
        observed=[min(ages), max(ages)],
        affected_ids=offenders,
    )


def tabulate_age(demog: Sequence[PersonDemographics]) -> dict[int, int]:
    counts: dict[int, int] = {}
    for row in demog:
        if row.age_1979 is not None:
            counts[row.age_1979] = counts.get(row.age_1979, 0) + 1
    return dict(sorted(counts.items()))


def _round_percent(part: int, total: int) -> int:
    if total == 0:
        return 0
    # Half-up rounding, pinned for cross-platform stability.
    return int(part * 100 / total + 0.5)


def tabulate_sex_race(demog: Sequence[PersonDemographics]) -> dict[str, Any]:
    """2x3 sex-by-race contingency table with margins and row percents."""
    counts = {sex: {race: 0 for race in _RACE_ORDER} for sex in _SEX_ORDER}
    for row in demog:
        if row.sex in counts and row.race in counts[row.sex]:
            counts[row.sex][row.race] += 1
    table: dict[str, Any] = {"rows": {}, "column_totals": {}, "total": 0}
    for sex in _SEX_ORDER:
        row_total = sum(counts[sex].values())
        table["rows"][sex] = {
            "counts": dict(counts[sex]),
            "total": row_total,
            "percent": {
                race: _round_percent(counts[sex][race], row_total)
                for race in _RACE_ORDER
            },
        }
    for race in _RACE_ORDER:
        table["column_totals"][race] = sum(counts[sex][race] for sex in _SEX_ORDER)
    table["total"] = sum(table["column_totals"].values())
    return table


@dataclass(frozen=True)
class ProfileSummary:
    id: int
    n_obs: int
    wage_min: float
    wage_median: float
    wage_max: float
    first_year: int
    last_year: int


def profile_summaries(rows: Sequence[WageRow]) -> list[ProfileSummary]:
    """Per-person minimum/median/maximum wage and observation span."""
    by_id: dict[int, list[WageRow]] = {}
    for row in rows:
        by_id.setdefault(row.id, []).append(row)
    summaries = []
    for case_id in sorted(by_id):
        wages = [row.wage for row in by_id[case_id]]
        years = [row.year for row in by_id[case_id]]
        summaries.append(
            ProfileSummary(
                id=case_id,
                n_obs=len(wages),
                wage_min=min(wages),
                wage_median=float(statistics.median(wages)),
                wage_max=max(wages),
                first_year=min(years),
                last_year=max(years),
            )
        )
    return summaries


def sample_profiles(
    rows: Sequence[WageRow], n: int, seed: int
) -> list[tuple[int, list[WageRow]]]:
    """Seeded uniform sample of persons with their wage series."""
    by_id: dict[int, list[WageRow]] = {}
    for row in rows:
        by_id.setdefault(row.id, []).append(row)
    chosen = sample_ids(sorted(by_id), n, seed)
    return [
        (case_id, sorted(by_id[case_id], key=lambda r: r.year)) for case_id in chosen
    ]


def load_expectations(path: str | Path) -> dict[str, Any]:
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


def _published_check(
    name: str, expected: Any, observed: Any, vintage_matches: bool
) -> CheckResult:
    if not vintage_matches:
        return CheckResult(
            name=name,
            status="warn",
            expected=expected,
            observed="skipped: expectations are for a different data vintage",
        )
    return CheckResult(
        name=name,
        status="pass" if expected == observed else "fail",
        expected=expected,
        observed=observed,
    )


def run_validation(
    demog: Sequence[PersonDemographics],
    wages: Sequence[WageRow],
    expectations: dict[str, Any] | None,
    vintage: str,
    derivation_flags: Sequence[Flag] = (),
    input_digest: str = "",
    generated_at: str | None = None,
) -> ValidationReport:
    """Run the registered checks in order and assemble the report."""
    report = ValidationReport(
        generated_at=generated_at
        or datetime.now(timezone.utc).isoformat(timespec="seconds"),
        input_digest=input_digest,
    )
    checks = report.checks

    ids = [row.id for row in demog]
    dupes = tuple(sorted({i for i in ids if ids.count(i) > 1})) if len(set(ids)) != len(ids) else ()
    checks.append(
        CheckResult(
            name="one_demographic_row_per_person",
            status="fail" if dupes else "pass",
            expected="unique ids",
            observed=f"{len(ids)} rows, {len(set(ids))} distinct ids",
            affected_ids=dupes,
        )
    )

    checks.append(check_age_range(demog))

    vintage_matches = bool(expectations) and expectations.get("vintage") == vintage
    exp = expectations or {}

    checks.append(
        _published_check(
            "row_count_vs_published",
            exp.get("row_count"),
            len(demog),
            vintage_matches,
        )
    )
    observed_sex = {
        "m": sum(1 for row in demog if row.sex == "m"),
        "f": sum(1 for row in demog if row.sex == "f"),
    }
    checks.append(
        _published_check(
            "sex_counts_vs_published", exp.get("sex_counts"), observed_sex, vintage_matches
        )
    )
    observed_age = {str(age): count for age, count in tabulate_age(demog).items()}
    checks.append(
        _published_check(
            "age_tabulation_vs_published", exp.get("age_counts"), observed_age, vintage_matches
        )
    )
    table = tabulate_sex_race(demog)
    observed_sex_race = {
        sex.upper(): table["rows"][sex]["counts"] for sex in _SEX_ORDER
    }
    checks.append(
        _published_check(
            "sex_race_table_vs_published",
            exp.get("sex_race"),
            observed_sex_race,
            vintage_matches,
        )
    )

    # Structural: tabulation margins must re-add to the row count.
    margin_ok = table["total"] == sum(
        1 for row in demog if row.sex in _SEX_ORDER and row.race in _RACE_ORDER
    )
    checks.append(
        CheckResult(
            name="sex_race_margins_consistent",
            status="pass" if margin_ok else "fail",
            expected="cell sum equals classified-person count",
            observed=table["total"],
        )
    )

    # Grade should never decrease within a person; offenders are flagged,
    # not corrected.
    offenders = []
    by_id: dict[int, list[WageRow]] = {}
    for row in wages:
        by_id.setdefault(row.id, []).append(row)
    for case_id, person_rows in sorted(by_id.items()):
        grades = [
            row.grade
            for row in sorted(person_rows, key=lambda r: r.year)
            if row.grade is not None
        ]
        if any(b < a for a, b in zip(grades, grades[1:])):
            offenders.append(case_id)
    checks.append(
        CheckResult(
            name="grade_non_decreasing",
            status="warn" if offenders else "pass",
            expected="grade never decreases within a person",
            observed=f"{len(offenders)} person(s) with a decrease",
            affected_ids=tuple(offenders),
        )
    )

    # Profile ordering sanity over the wages table.
    summaries = profile_summaries(wages)
    bad = tuple(
        s.id
        for s in summaries
        if not (s.wage_min <= s.wage_median <= s.wage_max)
    )
    checks.append(
        CheckResult(
            name="profile_summary_ordering",
            status="fail" if bad else "pass",
            expected="min <= median <= max per person",
            observed=f"{len(summaries)} profiles",
            affected_ids=bad,
        )
    )

    # Surface tidying flags as warnings, grouped by category.
    by_category: dict[str, list[Flag]] = {}
    for flag in derivation_flags:
        by_category.setdefault(flag.category, []).append(flag)
    for category in sorted(by_category):
        group = by_category[category]
        affected = tuple(
            sorted({f.case_id for f in group if f.case_id is not None})
        )
        checks.append(
            CheckResult(
                name=f"flagged:{category}",
                status="warn",
                expected="no flags",
                observed=f"{len(group)} flag(s)",
                affected_ids=affected,
            )
        )
    return report
