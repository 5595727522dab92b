"""Robust repair of implausible wage values.

For each person, a simple linear regression of wage on survey year is
fit by Huber M-estimation (iteratively reweighted least squares with a
MAD residual scale).  Observations whose robustness weight falls below
a threshold are replaced by their fitted value and flagged is_pred; the
threshold is the analyst's knob and the explorer exists to choose it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .flags import Flag
from .tables import WageRow

__all__ = [
    "RepairConfig",
    "RobustFitResult",
    "RepairedSeries",
    "RepairReport",
    "RobustFitError",
    "fit_huber_line",
    "repair_series",
    "threshold_sweep",
    "repair_all",
]

# MAD / 0.6745 estimates the Gaussian standard deviation.
MAD_CONSISTENCY = 0.6745


class RobustFitError(ValueError):
    """The series cannot support a line fit."""


@dataclass(frozen=True)
class RepairConfig:
    """Tuning of the per-person fit and of the replacement rule.

    weight_threshold is deliberately conservative by default; it was
    chosen by eye with the explorer and is the documented tunable.
    min_points_for_repair is 4 because a two-parameter line fit on three
    points cannot tell an outlier from a trend.  convergence_tol is
    relative to each series' wage spread; scale_floor is in dollars.
    """

    weight_threshold: float = 0.1
    huber_c: float = 1.345
    max_iterations: int = 50
    convergence_tol: float = 1e-8
    scale_floor: float = 1e-8
    min_points_for_repair: int = 4

    def validate(self) -> None:
        if not 0.0 <= self.weight_threshold <= 1.0:
            raise ValueError("weight_threshold must be in [0, 1]")
        if self.huber_c <= 0:
            raise ValueError("huber_c must be positive")
        if self.max_iterations <= 0:
            raise ValueError("max_iterations must be positive")
        if self.convergence_tol <= 0:
            raise ValueError("convergence_tol must be positive")
        if self.scale_floor <= 0:
            raise ValueError("scale_floor must be positive")
        if self.min_points_for_repair < 3:
            raise ValueError("min_points_for_repair must be at least 3")


@dataclass(frozen=True)
class RobustFitResult:
    intercept: float
    slope: float
    scale: float
    weights: tuple[float, ...]
    fitted: tuple[float, ...]
    converged: bool
    iterations: int


def _weighted_line(
    x: np.ndarray, y: np.ndarray, w: np.ndarray
) -> tuple[float, float]:
    """Exact weighted least squares for a simple line, on centered x for
    conditioning (years are ~2000, so raw normal equations would lose
    digits)."""
    sw = float(w.sum())
    xbar = float((w * x).sum()) / sw
    ybar = float((w * y).sum()) / sw
    dx = x - xbar
    sxx = float((w * dx * dx).sum())
    if sxx <= 0.0:
        raise RobustFitError("degenerate design: no spread in x")
    slope = float((w * dx * (y - ybar)).sum()) / sxx
    return ybar - slope * xbar, slope


def _huber_weights(residuals: np.ndarray, c: float, scale: float) -> np.ndarray:
    absr = np.abs(residuals)
    with np.errstate(divide="ignore"):
        ratio = np.where(absr > 0.0, (c * scale) / np.where(absr > 0.0, absr, 1.0), np.inf)
    return np.minimum(1.0, ratio)


def _mad_scale(residuals: np.ndarray) -> float:
    # Median absolute residual about zero (the line's intercept already
    # centers the residuals): immune to a majority of identical
    # residuals collapsing the scale while an outlier remains.
    return float(np.median(np.abs(residuals))) / MAD_CONSISTENCY


def fit_huber_line(
    points: Sequence[tuple[float, float]],
    config: RepairConfig | None = None,
) -> RobustFitResult:
    """Huber M-estimate of wage = intercept + slope * year, by IRLS.

    Starts from ordinary least squares; each iteration re-estimates the
    residual scale as median(|r|)/0.6745, computes Huber weights
    min(1, c*scale/|r|) (weight 1 at zero residual), and solves the
    weighted least-squares line, stopping when the largest coefficient
    change drops below the tolerance.  Coefficient change is measured in
    the x-centered parameterization (level at the mean year, slope) and
    the tolerance is relative to the series' wage spread, which keeps
    the stopping rule invariant under affine rescaling of the wages and
    off the extrapolated year-zero intercept.  The scale is floored at scale_floor so that an
    essentially exact fit (zero MAD) keeps unit weights on its
    zero-residual points while still downweighting any remaining
    outlier.  Reported weights are recomputed from the final residuals.
    """
    cfg = config or RepairConfig()
    cfg.validate()
    x_in = np.asarray([p[0] for p in points], dtype=np.float64)
    y_in = np.asarray([p[1] for p in points], dtype=np.float64)
    if x_in.size < 2:
        raise RobustFitError("need at least 2 points")
    if not (np.isfinite(x_in).all() and np.isfinite(y_in).all()):
        raise RobustFitError("non-finite input")
    if np.unique(x_in).size < 2:
        raise RobustFitError("need at least 2 distinct years")

    # Canonical evaluation order makes the result bit-identical under
    # any permutation of the input observations.
    order = np.lexsort((y_in, x_in))
    x = x_in[order]
    y = y_in[order]

    ones = np.ones_like(x)
    # Sequential sum: the independent reference computes the same value.
    center = sum(float(v) for v in x) / x.size
    spread = float(y.max() - y.min())
    intercept, slope = _weighted_line(x, y, ones)
    converged = False
    iterations = 0
    scale = 0.0
    for iterations in range(1, cfg.max_iterations + 1):
        residuals = y - (intercept + slope * x)
        scale = _mad_scale(residuals)
        weights = _huber_weights(residuals, cfg.huber_c, max(scale, cfg.scale_floor))
        new_intercept, new_slope = _weighted_line(x, y, weights)
        delta = max(
            abs((new_intercept + new_slope * center) - (intercept + slope * center)),
            abs(new_slope - slope),
        )
        intercept, slope = new_intercept, new_slope
        if delta == 0.0 or delta < cfg.convergence_tol * spread:
            converged = True
            break

    fitted = intercept + slope * x
    final_residuals = y - fitted
    scale = _mad_scale(final_residuals)
    final_weights = _huber_weights(
        final_residuals, cfg.huber_c, max(scale, cfg.scale_floor)
    )
    inverse = np.empty_like(order)
    inverse[order] = np.arange(order.size)
    return RobustFitResult(
        intercept=float(intercept),
        slope=float(slope),
        scale=float(scale),
        weights=tuple(float(w) for w in final_weights[inverse]),
        fitted=tuple(float(f) for f in fitted[inverse]),
        converged=converged,
        iterations=iterations,
    )


@dataclass(frozen=True)
class RepairedSeries:
    id: int
    years: tuple[int, ...]
    original: tuple[float, ...]
    final: tuple[float, ...]
    is_pred: tuple[bool, ...]
    fit: RobustFitResult | None
    skipped_reason: str | None = None

    @property
    def replaced_years(self) -> tuple[int, ...]:
        return tuple(y for y, p in zip(self.years, self.is_pred) if p)


def repair_series(
    case_id: int,
    series: Sequence[tuple[int, float]],
    config: RepairConfig | None = None,
) -> RepairedSeries:
    """Repair one person's wage-by-year series.

    Fits once and replaces exactly the observations whose weight is
    strictly below the threshold; everything else is passed through
    bit-identically.  Series shorter than min_points_for_repair are
    returned unchanged, as are series the fit rejects (skipped_reason
    set); there is no refit after substitution.
    """
    cfg = config or RepairConfig()
    cfg.validate()
    years = tuple(int(y) for y, _ in series)
    original = tuple(float(w) for _, w in series)
    untouched = RepairedSeries(
        id=case_id,
        years=years,
        original=original,
        final=original,
        is_pred=tuple(False for _ in original),
        fit=None,
    )
    if len(series) < cfg.min_points_for_repair:
        return untouched
    try:
        fit = fit_huber_line([(float(y), w) for y, w in series], cfg)
    except RobustFitError as exc:
        return RepairedSeries(
            id=case_id,
            years=years,
            original=original,
            final=original,
            is_pred=tuple(False for _ in original),
            fit=None,
            skipped_reason=str(exc),
        )
    is_pred = tuple(w < cfg.weight_threshold for w in fit.weights)
    final = tuple(
        fit.fitted[i] if is_pred[i] else original[i] for i in range(len(original))
    )
    return RepairedSeries(
        id=case_id,
        years=years,
        original=original,
        final=final,
        is_pred=is_pred,
        fit=fit,
    )


def threshold_sweep(
    case_id: int,
    series: Sequence[tuple[int, float]],
    thresholds: Sequence[float],
    config: RepairConfig | None = None,
) -> list[tuple[float, tuple[int, ...]]]:
    """Replacement sets over a list of thresholds, from a single fit.

    The sets are nested: a larger threshold replaces a superset of
    the years replaced by a smaller one.
    """
    cfg = config or RepairConfig()
    base = repair_series(case_id, series, cfg)
    out: list[tuple[float, tuple[int, ...]]] = []
    for tau in thresholds:
        if base.fit is None:
            out.append((tau, ()))
            continue
        replaced = tuple(
            year
            for year, weight in zip(base.years, base.fit.weights)
            if weight < tau
        )
        out.append((tau, replaced))
    return out


@dataclass(frozen=True)
class SeriesRepairRecord:
    id: int
    n_obs: int
    replaced_years: tuple[int, ...]
    replaced_weights: tuple[float, ...]
    converged: bool | None
    skipped_reason: str | None


@dataclass(frozen=True)
class RepairReport:
    config: RepairConfig
    series: tuple[SeriesRepairRecord, ...]
    flags: tuple[Flag, ...] = field(default_factory=tuple)

    @property
    def n_replaced(self) -> int:
        return sum(len(rec.replaced_years) for rec in self.series)

    def to_json(self) -> dict:
        return {
            "config": {
                "weight_threshold": self.config.weight_threshold,
                "huber_c": self.config.huber_c,
                "max_iterations": self.config.max_iterations,
                "convergence_tol": self.config.convergence_tol,
                "scale_floor": self.config.scale_floor,
                "min_points_for_repair": self.config.min_points_for_repair,
            },
            "totals": {
                "series": len(self.series),
                "replacements": self.n_replaced,
                "skipped": sum(1 for rec in self.series if rec.skipped_reason),
            },
            "series": [
                {
                    "id": rec.id,
                    "n": rec.n_obs,
                    "replaced_years": list(rec.replaced_years),
                    "replaced_weights": list(rec.replaced_weights),
                    "converged": rec.converged,
                    "skipped": rec.skipped_reason,
                }
                for rec in self.series
            ],
        }


def repair_all(
    rows: Sequence[WageRow], config: RepairConfig | None = None
) -> tuple[list[WageRow], RepairReport]:
    """Repair every person's series independently.

    Row order is preserved; untouched rows are passed through as-is and
    per-series skips are recorded rather than aborting the batch.
    """
    cfg = config or RepairConfig()
    cfg.validate()
    by_id: dict[int, list[int]] = {}
    for idx, row in enumerate(rows):
        by_id.setdefault(row.id, []).append(idx)

    new_rows: list[WageRow] = list(rows)
    records: list[SeriesRepairRecord] = []
    for case_id in sorted(by_id):
        indices = sorted(by_id[case_id], key=lambda i: rows[i].year)
        series = [(rows[i].year, rows[i].wage) for i in indices]
        repaired = repair_series(case_id, series, cfg)
        replaced_weights = tuple(
            repaired.fit.weights[pos]
            for pos, p in enumerate(repaired.is_pred)
            if p and repaired.fit is not None
        )
        records.append(
            SeriesRepairRecord(
                id=case_id,
                n_obs=len(series),
                replaced_years=repaired.replaced_years,
                replaced_weights=replaced_weights,
                converged=None if repaired.fit is None else repaired.fit.converged,
                skipped_reason=repaired.skipped_reason,
            )
        )
        for pos, idx in enumerate(indices):
            if repaired.is_pred[pos]:
                old = rows[idx]
                new_rows[idx] = WageRow(
                    id=old.id,
                    year=old.year,
                    wage=repaired.final[pos],
                    age_1979=old.age_1979,
                    sex=old.sex,
                    race=old.race,
                    grade=old.grade,
                    hgc=old.hgc,
                    hgc_i=old.hgc_i,
                    hgc_1979=old.hgc_1979,
                    ged=old.ged,
                    njobs=old.njobs,
                    hours=old.hours,
                    stwork=old.stwork,
                    yr_wforce=old.yr_wforce,
                    exp=old.exp,
                    is_wm=old.is_wm,
                    is_pred=True,
                )
    flags = tuple(
        Flag("repair_series_skipped", rec.id, {"reason": rec.skipped_reason})
        for rec in records
        if rec.skipped_reason
    )
    report = RepairReport(config=cfg, series=tuple(records), flags=flags)
    return new_rows, report
