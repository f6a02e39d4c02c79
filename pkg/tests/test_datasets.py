import calendar
import datetime as dt

import numpy as np
import pytest

from arhlstm.datasets import (
    HourlyRecord,
    aggregate_hourly_to_daily,
    load_curve_matrix_csv,
    read_hourly_csv,
    reshape_to_annual,
    write_curve_matrix_csv,
)
from arhlstm.errors import DataError, GapError
from arhlstm.simulate import SimConfig, simulate_arh, write_simulation


def test_load_small_matrix(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("1,2\n3,4\n")
    ds = load_curve_matrix_csv(p, "rows")
    np.testing.assert_array_equal(ds.values, [[1, 2], [3, 4]])
    ds = load_curve_matrix_csv(p, "columns")
    np.testing.assert_array_equal(ds.values[0], [1, 3])


def test_load_69x12_with_header(tmp_path, rng):
    X = rng.normal(25, 2, (69, 12))
    p = tmp_path / "nino.csv"
    p.write_text(",".join(f"m{j}" for j in range(1, 13)) + "\n" + "\n".join(",".join(repr(float(v)) for v in r) for r in X))
    ds = load_curve_matrix_csv(p)
    assert (ds.n, ds.num_points) == (69, 12)
    np.testing.assert_array_equal(ds.values, X)


def test_load_errors(tmp_path):
    p = tmp_path / "ragged.csv"
    p.write_text("1,2,3\n4,5\n")
    with pytest.raises(DataError, match=":2"):
        load_curve_matrix_csv(p)
    p.write_text("1,2\n3,abc\n")
    with pytest.raises(DataError, match="column 2"):
        load_curve_matrix_csv(p)


def test_simulation_export_roundtrip(tmp_path):
    sim = simulate_arh(SimConfig(harmonics=10, n=1000, num_points=500, seed=2))
    write_simulation(sim, tmp_path / "sim.csv")
    back = load_curve_matrix_csv(tmp_path / "sim.csv", "columns")
    assert (back.n, back.num_points) == (1000, 500)
    assert np.array_equal(back.values, sim.dataset.values)
    write_curve_matrix_csv(back, tmp_path / "again.csv")
    assert (tmp_path / "again.csv").read_bytes() == (tmp_path / "sim.csv").read_bytes()


def _hourly(day, values):
    start = dt.datetime.combine(day, dt.time())
    return [HourlyRecord(start + dt.timedelta(hours=h), v) for h, v in enumerate(values)]


def test_daily_means():
    d = dt.date(2001, 3, 4)
    assert aggregate_hourly_to_daily(_hourly(d, [5.0] * 24)) == [(d, 5.0)]
    assert aggregate_hourly_to_daily(_hourly(d, [0.0, 10.0])) == [(d, 5.0)]


def test_daily_means_sinusoid():
    start = dt.datetime(2010, 6, 1)
    recs = [HourlyRecord(start + dt.timedelta(hours=h), np.sin(h / 5.0) + h / 100.0) for h in range(72)]
    out = aggregate_hourly_to_daily(recs)
    assert [d for d, _ in out] == [dt.date(2010, 6, k) for k in (1, 2, 3)]
    for k, (_, v) in enumerate(out):
        hand = sum(np.sin(h / 5.0) + h / 100.0 for h in range(24 * k, 24 * k + 24)) / 24
        assert v == pytest.approx(hand, abs=1e-12)


def test_daily_mean_permutation_invariant(rng):
    d = dt.date(2001, 1, 1)
    vals = rng.normal(size=24)
    base = aggregate_hourly_to_daily(_hourly(d, vals))[0][1]
    perm = aggregate_hourly_to_daily(_hourly(d, vals[rng.permutation(24)]))[0][1]
    assert perm == pytest.approx(base, abs=1e-12)


def _daily_series(first_year, last_year):
    day, out = dt.date(first_year, 1, 1), []
    while day.year <= last_year:
        out.append((day, float(day.toordinal())))
        day += dt.timedelta(days=1)
    return out


def test_annual_reshape_single_years():
    assert reshape_to_annual(_daily_series(2001, 2001)).values.shape == (1, 365)
    leap = reshape_to_annual(_daily_series(2004, 2004))
    assert leap.values.shape == (1, 365)
    assert dt.date(2004, 2, 29).toordinal() not in leap.values


def test_annual_reshape_calendar_oracle():
    daily = _daily_series(1985, 2020)
    ds = reshape_to_annual(daily)
    assert ds.values.shape == (36, 365)
    assert ds.labels == tuple(range(1985, 2021))
    leap_years = [y for y in range(1985, 2021) if calendar.isleap(y)]
    assert leap_years[0] == 1988 and leap_years[-1] == 2020
    feb29 = {dt.date(y, 2, 29).toordinal() for y in leap_years}
    assert not feb29.intersection(ds.values.ravel().tolist())
    for row, y in zip(ds.values, ds.labels):
        assert row[59] == dt.date(y, 3, 1).toordinal()


def test_annual_reshape_gap_reported():
    daily = [(d, v) for d, v in _daily_series(2001, 2002) if d != dt.date(2002, 7, 4)]
    with pytest.raises(GapError) as info:
        reshape_to_annual(daily)
    assert dt.date(2002, 7, 4) in info.value.missing
    with pytest.raises(GapError):
        reshape_to_annual(_daily_series(2001, 2001), year_range=(2001, 2002))


def test_read_hourly_csv(tmp_path):
    p = tmp_path / "h.csv"
    p.write_text("timestamp,temperature\n2001-01-01T00:00,1.5\n2001-01-01T01:00,2.5\n")
    recs = read_hourly_csv(p, value_column="temperature")
    assert [r.value for r in recs] == [1.5, 2.5]
    p.write_text("timestamp,temperature\n2001-01-01T01:00,1.5\n2001-01-01T00:00,2.5\n")
    with pytest.raises(DataError, match="increasing"):
        read_hourly_csv(p, value_column="temperature")
    with pytest.raises(DataError, match="expected columns"):
        read_hourly_csv(p, value_column="value")
