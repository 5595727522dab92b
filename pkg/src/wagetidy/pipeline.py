"""Staged pipeline: raw -> input -> valid data, with an auditable manifest.

Each stage reads the previous stage's files from the output directory,
writes its own outputs atomically (temp file + rename), and records
input/output digests and row counts in run_manifest.json.  Outputs are
deterministic: re-running a stage with unchanged inputs and config
reproduces identical bytes (the validation report's timestamp is the
one documented exception).
"""

from __future__ import annotations

import contextlib
import csv
import hashlib
import io
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterator

from . import cohorts, demographics, employment, validation
from .config import PipelineConfig, config_digest
from .flags import Flag
from .ingest import RawTable, load_raw_table
from .repair import repair_all
from .tables import (
    demog_to_csv,
    read_demog_csv,
    read_wages_csv,
    wages_to_csv,
)

__all__ = [
    "StageError",
    "StageResult",
    "run_ingest",
    "run_tidy",
    "run_validate",
    "run_repair",
    "run_subset",
    "run_compare",
    "run_adjust",
    "run_all",
    "config_lock",
    "atomic_write_text",
    "sha256_file",
    "RAW_TABLE",
    "DEMOG",
    "WAGES_PRE_REPAIR",
    "WAGES",
    "WAGES_HS_DO",
]

RAW_TABLE = "raw_table.csv"
DEMOG = "demog_nlsy79.csv"
WAGES_PRE_REPAIR = "wages_pre_repair.csv"
TIDY_FLAGS = "tidy_flags.json"
VALIDATION_JSON = "validation_report.json"
VALIDATION_TEXT = "validation_report.txt"
WAGES = "wages.csv"
REPAIR_REPORT = "repair_report.json"
WAGES_HS_DO = "wages_hs_do.csv"
DROPOUT_DECISIONS = "dropout_decisions.json"
RECONCILIATION = "reconciliation.json"
COMPARE_HGC = "compare_hgc.csv"
COMPARE_EXP = "compare_experience_density.csv"
COMPARE_LNW = "compare_log_wage_density.csv"
WAGES_ADJUSTED = "wages_adjusted.csv"
MANIFEST = "run_manifest.json"


class StageError(RuntimeError):
    """A stage could not run (missing prerequisite, bad input)."""


@dataclass(frozen=True)
class StageResult:
    stage: str
    outputs: dict[str, str]   # filename -> digest
    counts: dict[str, Any]


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)


def _json_dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


@contextlib.contextmanager
def config_lock(cfg: PipelineConfig) -> Iterator[None]:
    """Advisory lock marking the config as owned by a running stage;
    the explorer's threshold commit refuses while it is held."""
    if cfg.config_path is None:
        yield
        return
    lock_path = Path(cfg.config_path + ".lock")
    try:
        fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise StageError(
            f"config is locked by another running stage ({lock_path})"
        ) from None
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield
    finally:
        with contextlib.suppress(FileNotFoundError):
            lock_path.unlink()


def _out(cfg: PipelineConfig, name: str) -> Path:
    return Path(cfg.out_dir) / name


def _require(cfg: PipelineConfig, name: str, produced_by: str) -> Path:
    path = _out(cfg, name)
    if not path.exists():
        raise StageError(
            f"missing stage output {name}; run the {produced_by!r} stage first"
        )
    return path


def _update_manifest(cfg: PipelineConfig, stage: str, entry: dict[str, Any]) -> None:
    manifest_path = _out(cfg, MANIFEST)
    manifest: dict[str, Any] = {"stages": {}}
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        manifest.setdefault("stages", {})
    manifest["vintage"] = cfg.vintage
    entry["config_digest"] = config_digest(cfg)
    manifest["stages"][stage] = entry
    atomic_write_text(manifest_path, _json_dumps(manifest))


def _finish_stage(
    cfg: PipelineConfig,
    stage: str,
    inputs: dict[str, Path],
    outputs: dict[str, str],
    counts: dict[str, Any],
    digest_overrides: dict[str, str] | None = None,
) -> StageResult:
    digests = {}
    for filename, text in outputs.items():
        path = _out(cfg, filename)
        atomic_write_text(path, text)
        digests[filename] = (digest_overrides or {}).get(filename) or sha256_file(path)
    _update_manifest(
        cfg,
        stage,
        {
            "inputs": {name: sha256_file(p) for name, p in inputs.items()},
            "outputs": digests,
            "counts": counts,
        },
    )
    return StageResult(stage=stage, outputs=digests, counts=counts)


def _raw_table_to_csv(raw: RawTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([col.name for col in raw.columns])
    for i in range(raw.n_rows):
        writer.writerow(
            ["" if col.blank[i] else str(int(col.values[i])) for col in raw.columns]
        )
    return buf.getvalue()


def run_ingest(cfg: PipelineConfig) -> StageResult:
    """Load the raw extract and write its normalized copy."""
    if cfg.raw_csv is None:
        raise StageError("no raw_csv configured")
    source = Path(cfg.raw_csv)
    if not source.exists():
        raise StageError(f"raw csv not found: {source}")
    raw = load_raw_table(source)
    return _finish_stage(
        cfg,
        "ingest",
        inputs={"raw_csv": source},
        outputs={RAW_TABLE: _raw_table_to_csv(raw)},
        counts={
            "rows": raw.n_rows,
            "columns": raw.n_columns,
            "sentinels": raw.sentinel_counts(),
        },
    )


def run_tidy(cfg: PipelineConfig) -> StageResult:
    """Demographic and employment tidying into the two input tables."""
    raw_path = _require(cfg, RAW_TABLE, "ingest")
    raw = load_raw_table(raw_path)
    demog = demographics.build_demog_table(raw)
    emp = employment.build_wages_table(raw, demog.rows)
    flags = [flag.to_json() for flag in demog.flags + emp.flags]
    return _finish_stage(
        cfg,
        "tidy",
        inputs={RAW_TABLE: raw_path},
        outputs={
            DEMOG: demog_to_csv(demog.rows),
            WAGES_PRE_REPAIR: wages_to_csv(emp.rows),
            TIDY_FLAGS: _json_dumps(flags),
        },
        counts={
            "demog_rows": len(demog.rows),
            "job_observations": emp.stats.job_observations,
            "individuals_with_wages": emp.stats.individuals_with_wages,
            "wage_rows_before_round_filter": emp.stats.rows_before_filter,
            "individuals": emp.stats.individuals_kept,
            "observations": emp.stats.rows_kept,
        },
    )


def run_validate(cfg: PipelineConfig) -> tuple[StageResult, validation.ValidationReport]:
    """IDA checks; the CLI exits nonzero when any check fails."""
    demog_path = _require(cfg, DEMOG, "tidy")
    wages_path = _require(cfg, WAGES_PRE_REPAIR, "tidy")
    flags_path = _require(cfg, TIDY_FLAGS, "tidy")
    demog = read_demog_csv(demog_path)
    wages = read_wages_csv(wages_path)
    flags = [
        Flag.from_json(obj)
        for obj in json.loads(flags_path.read_text(encoding="utf-8"))
    ]
    expectations = None
    if cfg.expectations_file:
        exp_path = Path(cfg.expectations_file)
        if not exp_path.exists():
            raise StageError(f"expectations file not found: {exp_path}")
        expectations = validation.load_expectations(exp_path)
    digest = hashlib.sha256(
        (sha256_file(demog_path) + sha256_file(wages_path)).encode()
    ).hexdigest()
    report = validation.run_validation(
        demog,
        wages,
        expectations,
        cfg.vintage,
        derivation_flags=flags,
        input_digest=digest,
    )
    inputs = {DEMOG: demog_path, WAGES_PRE_REPAIR: wages_path, TIDY_FLAGS: flags_path}
    # The reports carry a real timestamp; the manifest records digests of
    # the timestamp-normalized content so reruns stay byte-identical.
    canonical = validation.ValidationReport(
        checks=report.checks, generated_at="", input_digest=report.input_digest
    )
    result = _finish_stage(
        cfg,
        "validate",
        inputs=inputs,
        outputs={
            VALIDATION_JSON: _json_dumps(report.to_json()),
            VALIDATION_TEXT: report.to_text(),
        },
        counts={
            "checks": len(report.checks),
            "failed": sum(1 for c in report.checks if c.status == "fail"),
            "warned": sum(1 for c in report.checks if c.status == "warn"),
        },
        digest_overrides={
            VALIDATION_JSON: hashlib.sha256(
                _json_dumps(canonical.to_json()).encode()
            ).hexdigest(),
            VALIDATION_TEXT: hashlib.sha256(
                canonical.to_text().encode()
            ).hexdigest(),
        },
    )
    return result, report


def run_repair(cfg: PipelineConfig) -> StageResult:
    """Robust repair of extreme wages at the configured threshold."""
    wages_path = _require(cfg, WAGES_PRE_REPAIR, "tidy")
    rows = read_wages_csv(wages_path)
    repaired, report = repair_all(rows, cfg.repair_config())
    return _finish_stage(
        cfg,
        "repair",
        inputs={WAGES_PRE_REPAIR: wages_path},
        outputs={
            WAGES: wages_to_csv(repaired),
            REPAIR_REPORT: _json_dumps(report.to_json()),
        },
        counts={
            "individuals": len({row.id for row in repaired}),
            "observations": len(repaired),
            "replacements": report.n_replaced,
            "series_skipped": sum(1 for r in report.series if r.skipped_reason),
        },
    )


def run_subset(cfg: PipelineConfig) -> StageResult:
    """Dropout cohort extraction (and reconciliation when the original
    id list is available)."""
    wages_path = _require(cfg, WAGES, "repair")
    demog_path = _require(cfg, DEMOG, "tidy")
    wages = read_wages_csv(wages_path)
    demog = read_demog_csv(demog_path)
    subset = cohorts.build_dropout_subset(
        wages,
        demog,
        include_females=cfg.dropout_include_females,
        age_filter=(14, 17) if cfg.age_filter else None,
    )
    decisions = {
        str(cid): {"included": d.included, "rule": d.rule.value}
        for cid, d in sorted(subset.decisions.items())
    }
    outputs = {
        WAGES_HS_DO: wages_to_csv(subset.rows),
        DROPOUT_DECISIONS: _json_dumps(
            {
                "decisions": decisions,
                "deferred_hgc_missing": list(subset.deferred_ids),
            }
        ),
    }
    counts: dict[str, Any] = {
        "individuals": len(subset.ids),
        "observations": len(subset.rows),
        "deferred": len(subset.deferred_ids),
    }
    inputs = {WAGES: wages_path, DEMOG: demog_path}
    if cfg.original_csv:
        original_path = Path(cfg.original_csv)
        if not original_path.exists():
            raise StageError(f"original csv not found: {original_path}")
        original = cohorts.read_original_csv(original_path)
        original_ids = sorted({rec.id for rec in original})
        # The published matching compared the strict age-capped subset,
        # so the taxonomy is computed against that view.
        strict = cohorts.build_dropout_subset(
            wages, demog, include_females=False, age_filter=(14, 17)
        )
        strict_ids = [
            cid
            for cid in strict.ids
            if strict.decisions[cid].rule
            in (cohorts.DropoutRule.HGC_BELOW_12, cohorts.DropoutRule.GED_EQUIVALENCY)
        ]
        reconciliation = cohorts.reconcile_with_original(
            strict_ids, original_ids, demog, {row.id for row in wages}
        )
        outputs[RECONCILIATION] = _json_dumps(
            {
                "refreshed_subset_ids": len(subset.ids),
                "strict_subset_ids": len(strict_ids),
                "original_ids": len(original_ids),
                "reconciliation": reconciliation.to_json(),
            }
        )
        counts["reconciliation"] = reconciliation.counts()
        inputs["original_csv"] = original_path
    return _finish_stage(cfg, "subset", inputs=inputs, outputs=outputs, counts=counts)


def _density_csv(table: cohorts.DensityTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["bin_left", "bin_right", "refreshed_count", "original_count"]
    )
    edges = table.bin_edges()
    for i, (refreshed, original) in enumerate(
        zip(table.refreshed_counts, table.original_counts)
    ):
        writer.writerow([repr(edges[i]), repr(edges[i + 1]), refreshed, original])
    writer.writerow(["out_of_range", "", table.refreshed_out_of_range, table.original_out_of_range])
    return buf.getvalue()


def run_compare(cfg: PipelineConfig) -> StageResult:
    """Two-sample summaries of the refreshed dropouts vs the original."""
    subset_path = _require(cfg, WAGES_HS_DO, "subset")
    if not cfg.original_csv:
        raise StageError("no original_csv configured; nothing to compare against")
    original_path = Path(cfg.original_csv)
    if not original_path.exists():
        raise StageError(f"original csv not found: {original_path}")
    refreshed = read_wages_csv(subset_path)
    original = cohorts.read_original_csv(original_path)
    bundle = cohorts.compare_summaries(refreshed, original)

    hgc_buf = io.StringIO()
    writer = csv.writer(hgc_buf, lineterminator="\n")
    writer.writerow(["hgc", "refreshed_count", "original_count"])
    for grade, counts in sorted(bundle.hgc_counts.items()):
        writer.writerow([grade, counts["refreshed"], counts["original"]])

    return _finish_stage(
        cfg,
        "compare",
        inputs={WAGES_HS_DO: subset_path, "original_csv": original_path},
        outputs={
            COMPARE_HGC: hgc_buf.getvalue(),
            COMPARE_EXP: _density_csv(bundle.experience),
            COMPARE_LNW: _density_csv(bundle.log_wage),
        },
        counts={
            "refreshed_rows": len(refreshed),
            "original_rows": len(original),
            "nonpositive_wages_excluded": bundle.nonpositive_wages_excluded,
        },
    )


def run_adjust(cfg: PipelineConfig) -> StageResult:
    """Inflation-adjust the wages table to the configured base year."""
    wages_path = _require(cfg, WAGES, "repair")
    if not cfg.cpi_csv:
        raise StageError("no cpi_csv configured")
    if cfg.base_year is None:
        raise StageError("no base_year configured")
    cpi_path = Path(cfg.cpi_csv)
    if not cpi_path.exists():
        raise StageError(f"cpi csv not found: {cpi_path}")
    rows = read_wages_csv(wages_path)
    cpi = cohorts.read_cpi_csv(cpi_path)
    adjusted = cohorts.adjust_inflation(rows, cpi, cfg.base_year)
    return _finish_stage(
        cfg,
        "adjust",
        inputs={WAGES: wages_path, "cpi_csv": cpi_path},
        outputs={WAGES_ADJUSTED: wages_to_csv(adjusted)},
        counts={"observations": len(adjusted), "base_year": cfg.base_year},
    )


def run_all(cfg: PipelineConfig) -> tuple[list[StageResult], validation.ValidationReport]:
    """The whole value chain; compare/adjust run only when their inputs
    are configured."""
    results = [run_ingest(cfg), run_tidy(cfg)]
    validate_result, report = run_validate(cfg)
    results.append(validate_result)
    if report.failed:
        return results, report
    results.append(run_repair(cfg))
    results.append(run_subset(cfg))
    if cfg.original_csv:
        results.append(run_compare(cfg))
    if cfg.cpi_csv and cfg.base_year is not None:
        results.append(run_adjust(cfg))
    return results, report
