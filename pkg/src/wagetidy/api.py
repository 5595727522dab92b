"""Read-only HTTP API powering the threshold-tuning explorer.

Serves the tidied (pre-repair) wages table: sampling of individuals,
on-the-fly repairs at any requested threshold, sweep statistics, and
persistence of the analyst's committed threshold into the config file.
Money travels as decimal strings (never re-parsed floats) so the UI can
diff values bit-stably; missing values are explicit nulls.

Every GET is a pure read over an immutable snapshot; the per-person fit
is threshold-independent and cached.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .config import PipelineConfig, update_config_key
from .pipeline import WAGES_PRE_REPAIR, StageError, sha256_file
from .repair import RepairConfig, RepairedSeries, repair_series
from .sampling import sample_ids
from .tables import WageRow, read_wages_csv

__all__ = ["build_app", "ExplorerDataset"]


@dataclass(frozen=True)
class ExplorerDataset:
    digest: str
    series_by_id: dict[int, list[tuple[int, float]]]
    n_rows: int

    @property
    def ids(self) -> list[int]:
        return sorted(self.series_by_id)


def _load_dataset(cfg: PipelineConfig) -> ExplorerDataset:
    path = Path(cfg.out_dir) / WAGES_PRE_REPAIR
    if not path.exists():
        raise StageError(
            f"missing stage output {WAGES_PRE_REPAIR}; run the 'tidy' stage first"
        )
    rows: list[WageRow] = read_wages_csv(path)
    series: dict[int, list[tuple[int, float]]] = {}
    for row in rows:
        series.setdefault(row.id, []).append((row.year, row.wage))
    for person_series in series.values():
        person_series.sort()
    return ExplorerDataset(
        digest=sha256_file(path), series_by_id=series, n_rows=len(rows)
    )


class _FitCache:
    """Threshold-independent per-person repair state, safe to populate
    from concurrent requests."""

    def __init__(self, dataset: ExplorerDataset, config: RepairConfig) -> None:
        self._dataset = dataset
        self._config = config
        self._cache: dict[int, RepairedSeries] = {}
        self._lock = threading.Lock()

    def get(self, case_id: int) -> RepairedSeries:
        with self._lock:
            cached = self._cache.get(case_id)
        if cached is not None:
            return cached
        computed = repair_series(
            case_id, self._dataset.series_by_id[case_id], self._config
        )
        with self._lock:
            return self._cache.setdefault(case_id, computed)


def _money(value: float | None) -> str | None:
    return None if value is None else repr(value)


def _profile_payload(repaired: RepairedSeries, threshold: float) -> dict[str, Any]:
    fit = repaired.fit
    series = []
    for i, year in enumerate(repaired.years):
        weight = fit.weights[i] if fit is not None else None
        fitted = fit.fitted[i] if fit is not None else None
        replaced = weight is not None and weight < threshold
        series.append(
            {
                "year": year,
                "wage": _money(repaired.original[i]),
                "fitted": _money(fitted),
                "weight": weight,
                "replaced": replaced,
                "final": _money(fitted if replaced else repaired.original[i]),
            }
        )
    return {
        "id": repaired.id,
        "threshold": threshold,
        "eligible": fit is not None,
        "skipped_reason": repaired.skipped_reason,
        "converged": None if fit is None else fit.converged,
        "series": series,
    }


def build_app(cfg: PipelineConfig, ui_dir: str | None = None) -> FastAPI:
    """Explorer app over the tidied wages table in cfg.out_dir."""
    dataset = _load_dataset(cfg)
    repair_cfg = cfg.repair_config()
    cache = _FitCache(dataset, repair_cfg)
    state = {"threshold": cfg.weight_threshold}
    commit_lock = threading.Lock()

    app = FastAPI(title="wage repair threshold explorer")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    async def _bad_params(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    def _error(status: int, message: str) -> JSONResponse:
        return JSONResponse(status_code=status, content={"detail": message})

    @app.get("/meta")
    def meta() -> dict[str, Any]:
        return {
            "dataset_digest": dataset.digest,
            "individuals": len(dataset.series_by_id),
            "observations": dataset.n_rows,
            "threshold": state["threshold"],
            "repair_config": {
                "huber_c": repair_cfg.huber_c,
                "max_iterations": repair_cfg.max_iterations,
                "convergence_tol": repair_cfg.convergence_tol,
                "scale_floor": repair_cfg.scale_floor,
                "min_points_for_repair": repair_cfg.min_points_for_repair,
            },
        }

    @app.get("/sample")
    def sample(n: int, seed: int):
        population = dataset.ids
        if n < 0 or n > len(population):
            return _error(400, f"n must be in [0, {len(population)}]")
        chosen = sample_ids(population, n, seed)
        threshold = state["threshold"]
        return {
            "seed": seed,
            "threshold": threshold,
            "profiles": [
                _profile_payload(cache.get(case_id), threshold) for case_id in chosen
            ],
        }

    @app.get("/repair")
    def repair(id: int, threshold: float):
        if not 0.0 <= threshold <= 1.0:
            return _error(400, "threshold must be in [0, 1]")
        if id not in dataset.series_by_id:
            return _error(404, f"unknown id {id}")
        return _profile_payload(cache.get(id), threshold)

    @app.get("/sweep")
    def sweep(id: int, steps: int):
        if id not in dataset.series_by_id:
            return _error(404, f"unknown id {id}")
        if steps < 1 or steps > 1000:
            return _error(400, "steps must be in [1, 1000]")
        repaired = cache.get(id)
        points = []
        for i in range(steps + 1):
            threshold = i / steps
            if repaired.fit is None:
                replaced: tuple[int, ...] = ()
            else:
                replaced = tuple(
                    year
                    for year, weight in zip(repaired.years, repaired.fit.weights)
                    if weight < threshold
                )
            points.append(
                {
                    "threshold": threshold,
                    "count": len(replaced),
                    "replaced_years": list(replaced),
                }
            )
        return {"id": id, "points": points}

    @app.post("/threshold")
    def commit_threshold(body: dict):
        value = body.get("value")
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            return _error(400, "body must be {\"value\": <number>}")
        value = float(value)
        if not 0.0 <= value <= 1.0:
            return _error(400, "threshold must be in [0, 1]")
        if cfg.config_path is None:
            return _error(
                400, "server was started without a config file; nothing to persist"
            )
        with commit_lock:
            lock_path = Path(cfg.config_path + ".lock")
            if lock_path.exists():
                return _error(409, "config is locked by a running pipeline stage")
            update_config_key(cfg.config_path, "weight_threshold", value)
            state["threshold"] = value
        return {"stored": value}

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
