import random

import pytest

from reference_irls import reference_huber_fit
from wagetidy.repair import (
    RepairConfig,
    RobustFitError,
    fit_huber_line,
    repair_all,
    repair_series,
    threshold_sweep,
)
from wagetidy.tables import read_wages_csv


def _spike_series():
    return [(float(x), 5.0 if x != 4 else 500.0) for x in range(1, 8)]


def _random_series(rnd: random.Random, with_spike: bool | None = None):
    n = rnd.randint(5, 24)
    years = sorted(rnd.sample(range(1979, 2019), n))
    base = rnd.uniform(2.0, 25.0)
    slope = rnd.uniform(-0.4, 1.2)
    wages = [
        max(base + slope * (y - 1979) + rnd.uniform(-1.5, 1.5), 0.5) for y in years
    ]
    spiked = rnd.random() < 0.5 if with_spike is None else with_spike
    if spiked:
        wages[rnd.randrange(n)] *= rnd.uniform(8.0, 60.0)
    return list(zip(map(float, years), wages))


# --- fit ---------------------------------------------------------------------

def test_exact_line_all_weights_one():
    points = [(float(x), 2.0 * x + 1.0) for x in range(1, 6)]
    fit = fit_huber_line(points)
    assert fit.converged
    assert abs(fit.slope - 2.0) < 1e-9
    assert abs(fit.intercept - 1.0) < 1e-9
    for weight in fit.weights:
        assert abs(weight - 1.0) < 1e-9


def test_two_points_interpolate():
    fit = fit_huber_line([(1.0, 3.0), (2.0, 7.0)])
    assert fit.converged
    assert abs(fit.intercept - (-1.0)) < 1e-9 and abs(fit.slope - 4.0) < 1e-9
    assert fit.weights == (1.0, 1.0)


def test_spike_downweighted_and_fit_resists():
    fit = fit_huber_line(_spike_series())
    assert fit.weights[3] < 0.05
    assert all(w > 0.9 for i, w in enumerate(fit.weights) if i != 3)
    assert abs(fit.fitted[3] - 5.0) / 5.0 < 0.05


def test_spike_agrees_with_reference():
    series = _spike_series()
    fit = fit_huber_line(series)
    ref = reference_huber_fit([x for x, _ in series], [y for _, y in series])
    for a, b in zip(fit.weights, ref["weights"]):
        assert abs(a - b) <= 1e-8
    for a, b in zip(fit.fitted, ref["fitted"]):
        assert abs(a - b) <= 1e-8


def test_random_series_agree_with_reference():
    rnd = random.Random(7321)
    for _ in range(100):
        series = _random_series(rnd)
        fit = fit_huber_line(series)
        ref = reference_huber_fit([x for x, _ in series], [y for _, y in series])
        for a, b in zip(fit.weights, ref["weights"]):
            assert abs(a - b) <= 1e-8
        for a, b in zip(fit.fitted, ref["fitted"]):
            assert abs(a - b) <= 1e-8


def test_weights_in_unit_interval():
    rnd = random.Random(15)
    for _ in range(50):
        fit = fit_huber_line(_random_series(rnd))
        for weight in fit.weights:
            assert 0.0 < weight <= 1.0


def test_affine_equivariance():
    rnd = random.Random(2202)
    for _ in range(50):
        series = _random_series(rnd)
        a = rnd.uniform(0.5, 40.0)
        b = rnd.uniform(-10.0, 10.0)
        scaled = [(x, a * y + b) for x, y in series]
        fit = fit_huber_line(series)
        fit_scaled = fit_huber_line(scaled)
        for w1, w2 in zip(fit.weights, fit_scaled.weights):
            assert abs(w1 - w2) <= 1e-9 * max(1.0, abs(w1))
        for f1, f2 in zip(fit.fitted, fit_scaled.fitted):
            expected = a * f1 + b
            assert abs(f2 - expected) <= 1e-9 * max(1.0, abs(expected))


def test_order_invariance():
    rnd = random.Random(88)
    series = _random_series(rnd, with_spike=True)
    fit = fit_huber_line(series)
    order = list(range(len(series)))
    rnd.shuffle(order)
    permuted = [series[i] for i in order]
    fit_permuted = fit_huber_line(permuted)
    for pos, original_index in enumerate(order):
        assert fit_permuted.weights[pos] == fit.weights[original_index]
        assert fit_permuted.fitted[pos] == fit.fitted[original_index]
    assert fit_permuted.intercept == fit.intercept
    assert fit_permuted.slope == fit.slope


def test_fit_determinism():
    series = _spike_series()
    first = fit_huber_line(series)
    second = fit_huber_line(series)
    assert first == second


@pytest.mark.parametrize(
    "points",
    [
        [(1.0, 5.0)],
        [],
        [(3.0, 5.0), (3.0, 6.0), (3.0, 7.0)],  # no spread in x
        [(1.0, float("nan")), (2.0, 3.0)],
        [(1.0, float("inf")), (2.0, 3.0)],
    ],
)
def test_fit_rejects_degenerate_input(points):
    with pytest.raises(RobustFitError):
        fit_huber_line(points)


def test_config_validation():
    with pytest.raises(ValueError):
        RepairConfig(weight_threshold=1.5).validate()
    with pytest.raises(ValueError):
        RepairConfig(huber_c=0).validate()
    with pytest.raises(ValueError):
        RepairConfig(min_points_for_repair=2).validate()


# --- repair_series -------------------------------------------------------------

def test_threshold_zero_is_bit_exact_identity():
    series = [(1979 + i, w) for i, (_, w) in enumerate(_spike_series())]
    repaired = repair_series(9, series, RepairConfig(weight_threshold=0.0))
    assert repaired.final == tuple(w for _, w in series)
    assert not any(repaired.is_pred)
    assert repaired.fit is not None


def test_spike_replaced_at_default_threshold():
    series = [(1979 + i, w) for i, (_, w) in enumerate(_spike_series())]
    repaired = repair_series(9, series, RepairConfig())
    assert repaired.is_pred == (False, False, False, True, False, False, False)
    assert abs(repaired.final[3] - 5.0) / 5.0 < 0.05
    assert repaired.replaced_years == (1982,)
    # Untouched points are bit-identical to the input.
    for i in range(7):
        if i != 3:
            assert repaired.final[i] == series[i][1]


def test_short_series_untouched():
    series = [(1979, 5.0), (1980, 6.0), (1981, 500.0)]
    repaired = repair_series(1, series, RepairConfig(min_points_for_repair=4))
    assert repaired.final == (5.0, 6.0, 500.0)
    assert repaired.fit is None
    assert repaired.skipped_reason is None


def test_unfittable_series_skipped_with_reason():
    series = [(1980, 5.0), (1980, 6.0), (1980, 7.0), (1980, 8.0)]
    repaired = repair_series(1, series, RepairConfig())
    assert repaired.skipped_reason is not None
    assert repaired.final == repaired.original


# --- threshold sweep ------------------------------------------------------------

def test_sweep_sets_are_nested():
    series = [(1979 + i, w) for i, (_, w) in enumerate(_spike_series())]
    sweep = threshold_sweep(9, series, [0.0, 0.05, 0.2, 0.2, 1.0])
    sets = [set(replaced) for _, replaced in sweep]
    assert sets[0] == set()
    for smaller, larger in zip(sets, sets[1:]):
        assert smaller <= larger
    assert sets[2] == sets[3]  # duplicate thresholds agree
    fit = fit_huber_line([(float(y), w) for y, w in series])
    expected_at_one = {y for (y, _), w in zip(series, fit.weights) if w < 1.0}
    assert sets[-1] == expected_at_one


def test_sweep_monotone_on_random_series():
    """200 random series x 20-step sweeps: replacement sets only grow."""
    rnd = random.Random(5150)
    for _ in range(200):
        series_f = _random_series(rnd)
        series = [(int(x), y) for x, y in series_f]
        thresholds = [i / 20 for i in range(21)]
        sweep = threshold_sweep(1, series, thresholds)
        previous: set[int] = set()
        for tau, replaced in sweep:
            current = set(replaced)
            assert previous <= current
            previous = current
        assert set(sweep[0][1]) == set()


# --- repair_all -------------------------------------------------------------------

def test_repair_all_fixture_spikes(pipeline_out, manifest):
    rows = read_wages_csv(pipeline_out / "wages_pre_repair.csv")
    repaired, report = repair_all(rows, RepairConfig())
    flagged = [(row.id, row.year) for row in repaired if row.is_pred]
    expected = [(c["id"], c["year"]) for c in manifest["replaced_cells"]]
    assert flagged == expected
    assert report.n_replaced == len(expected)
    by_id = {rec.id: rec for rec in report.series}
    for cell in manifest["replaced_cells"]:
        record = by_id[cell["id"]]
        assert record.replaced_years == (cell["year"],)
        assert record.converged
        assert all(w < 0.1 for w in record.replaced_weights)


def test_repair_all_threshold_zero_identity(pipeline_out):
    rows = read_wages_csv(pipeline_out / "wages_pre_repair.csv")
    repaired, report = repair_all(rows, RepairConfig(weight_threshold=0.0))
    assert repaired == rows
    assert report.n_replaced == 0


def test_repair_all_preserves_order_and_untouched_rows(pipeline_out):
    rows = read_wages_csv(pipeline_out / "wages_pre_repair.csv")
    repaired, _ = repair_all(rows, RepairConfig())
    assert [(r.id, r.year) for r in repaired] == [(r.id, r.year) for r in rows]
    for old, new in zip(rows, repaired):
        if not new.is_pred:
            assert old == new


def test_repair_all_determinism(pipeline_out):
    rows = read_wages_csv(pipeline_out / "wages_pre_repair.csv")
    first, _ = repair_all(rows, RepairConfig())
    second, _ = repair_all(rows, RepairConfig())
    assert first == second


def test_repair_report_json_shape(pipeline_out):
    rows = read_wages_csv(pipeline_out / "wages_pre_repair.csv")
    _, report = repair_all(rows, RepairConfig())
    payload = report.to_json()
    assert payload["totals"]["replacements"] == report.n_replaced
    assert payload["config"]["weight_threshold"] == 0.1
    assert {entry["id"] for entry in payload["series"]} == {row.id for row in rows}
