import datetime as dt
import math

import numpy as np
import pytest

from mfhier.data import (
    AlignedPanel,
    MFDataset,
    RawSeries,
    align_fixed_m,
    apply_tcode,
    assemble,
    monthly_period,
    simulate_pooled_rumidas,
)
from mfhier.errors import DataError


def series(values, label="s", start=dt.date(2000, 1, 1)):
    ts = [start + dt.timedelta(days=i) for i in range(len(values))]
    return RawSeries(tuple(ts), np.array(values, dtype=float), label)


class TestTCodes:
    def test_identity(self):
        out = apply_tcode(series([1, 2, 3]), 1)
        np.testing.assert_array_equal(out.values, [1, 2, 3])

    def test_first_difference(self):
        out = apply_tcode(series([1, 3, 6]), 2)
        assert math.isnan(out.values[0])
        np.testing.assert_allclose(out.values[1:], [2, 3])

    def test_second_difference(self):
        out = apply_tcode(series([1, 3, 6, 10]), 3)
        assert np.isnan(out.values[:2]).all()
        np.testing.assert_allclose(out.values[2:], [1, 1])

    def test_log(self):
        out = apply_tcode(series([1, math.e]), 4)
        np.testing.assert_allclose(out.values, [0, 1])

    def test_dlog(self):
        out = apply_tcode(series([1, math.e, math.e**2]), 5)
        assert math.isnan(out.values[0])
        np.testing.assert_allclose(out.values[1:], [1, 1])

    def test_d2log(self):
        out = apply_tcode(series([1, math.e, math.e**3, math.e**6]), 6)
        assert np.isnan(out.values[:2]).all()
        np.testing.assert_allclose(out.values[2:], [1, 1])

    def test_log_rejects_nonpositive(self):
        with pytest.raises(DataError, match="index 1"):
            apply_tcode(series([1.0, -2.0, 3.0]), 5)

    def test_unknown_code(self):
        with pytest.raises(DataError, match="code 7"):
            apply_tcode(series([1, 2]), 7)

    def test_difference_roundtrip(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=50)
        d = apply_tcode(series(x), 2).values
        rebuilt = np.concatenate([[x[0]], x[0] + np.cumsum(d[1:])])
        np.testing.assert_allclose(rebuilt, x, atol=1e-12)


class TestAlign:
    def test_exact_period_unchanged(self):
        s = series(np.arange(40.0))
        keys = ["a"] * 20 + ["b"] * 20
        panel = align_fixed_m(s, 20, keys)
        assert panel.values.shape == (2, 20)
        np.testing.assert_array_equal(panel.values.reshape(-1), np.arange(40.0))
        assert panel.log == ()

    def test_excess_dropped_from_beginning(self):
        s = series(np.arange(41.0))
        keys = ["a"] * 21 + ["b"] * 20
        panel = align_fixed_m(s, 20, keys)
        np.testing.assert_array_equal(panel.values[0], np.arange(1.0, 21.0))
        assert panel.log[0] == {"period": "a", "action": "delete", "position": 0, "value": 0.0}

    def test_short_period_interpolated_midpoint(self):
        # previous period ends at 9, short period starts at 12: insert 10.5
        values = list(range(10)) + [12.0, 13, 14, 15, 16, 17, 18, 19, 20]
        keys = ["a"] * 10 + ["b"] * 9
        panel = align_fixed_m(series(values), 10, keys)
        assert panel.values[1, 0] == pytest.approx((9 + 12) / 2)
        ins = [e for e in panel.log if e["action"] == "insert"]
        assert ins == [{"period": "b", "action": "insert", "position": 0, "value": 10.5}]

    def test_multiple_insertions_linear(self):
        values = list(range(5)) + [10.0, 11.0, 12.0]
        keys = ["a"] * 5 + ["b"] * 3
        panel = align_fixed_m(series(values), 5, keys)
        np.testing.assert_allclose(panel.values[1], [6.0, 8.0, 10.0, 11.0, 12.0])

    def test_first_period_short_repeats_first_value(self, caplog):
        values = [5.0, 6.0] + list(range(4))
        keys = ["a"] * 2 + ["b"] * 4
        with caplog.at_level("WARNING"):
            panel = align_fixed_m(series(values), 4, keys)
        np.testing.assert_allclose(panel.values[0], [5.0, 5.0, 5.0, 6.0])
        assert "no predecessor" in caplog.text

    def test_count_outside_bound_raises(self):
        values = np.arange(30.0)
        keys = ["a"] * 10 + ["b"] * 20
        with pytest.raises(DataError, match="sanity bound"):
            align_fixed_m(series(values), 20, keys, max_deviation=5)

    def test_noncontiguous_period_raises(self):
        keys = ["a", "b", "a", "b"]
        with pytest.raises(DataError, match="contiguous"):
            align_fixed_m(series([1.0, 2, 3, 4]), 2, keys)

    def test_insertions_minus_deletions_balance(self):
        rng = np.random.default_rng(7)
        m = 10
        counts = [10, 12, 8, 9, 11, 10]
        values = rng.normal(size=sum(counts))
        keys = [f"p{k}" for k, c in enumerate(counts) for _ in range(c)]
        panel = align_fixed_m(series(values), m, keys, max_deviation=5)
        assert panel.values.shape == (len(counts), m)
        ins = sum(1 for e in panel.log if e["action"] == "insert")
        dels = sum(1 for e in panel.log if e["action"] == "delete")
        assert ins - dels == len(counts) * m - sum(counts)

    def test_monthly_calendar(self):
        start = dt.date(2001, 3, 1)
        ts = [start + dt.timedelta(days=i) for i in range(62)]
        keys = {monthly_period(t) for t in ts}
        assert keys == {"2001-03", "2001-04", "2001-05"}


class TestAssemble:
    def make_panel(self, T, m, start=0.0):
        vals = np.arange(start, start + T * m).reshape(T, m)
        return AlignedPanel(tuple(f"p{t}" for t in range(T)), vals)

    def lf_series(self, label, first, count, values=None):
        ts = [dt.date(2000, 1, 1) + dt.timedelta(days=30 * i) for i in range(count)]
        vals = np.arange(count, dtype=float) if values is None else np.asarray(values, float)
        keyed = [f"p{first + i}" for i in range(count)]
        s = RawSeries(tuple(ts), vals, label)
        return s, keyed

    def test_counts(self):
        panel = self.make_panel(12, 4)
        s, keys = self.lf_series("a", 0, 12)
        ds = assemble(panel, [s], 4, calendar_from(keys, s))
        assert ds.T == 12 and ds.n_hf == 48

    def test_intersection_trims_both_sides(self):
        panel = self.make_panel(10, 4)
        s, keys = self.lf_series("a", 2, 6)
        ds = assemble(panel, [s], 4, calendar_from(keys, s))
        assert ds.T == 6
        assert ds.periods == tuple(f"p{t}" for t in range(2, 8))
        np.testing.assert_array_equal(ds.hf, panel.values[2:8].reshape(-1))

    def test_leading_nans_dropped_for_all(self):
        panel = self.make_panel(8, 4)
        s1, k1 = self.lf_series("a", 0, 8, [np.nan, np.nan] + list(range(6)))
        s2, k2 = self.lf_series("b", 0, 8)
        ds = assemble(panel, [s1, s2], 4, calendar_from(k1 + k2, s1, s2))
        assert ds.T == 6
        assert ds.labels == ("a", "b")

    def test_empty_intersection_raises(self):
        panel = self.make_panel(4, 4)
        s, keys = self.lf_series("a", 10, 4)
        with pytest.raises(DataError, match="no common periods"):
            assemble(panel, [s], 4, calendar_from(keys, s))

    def test_interior_gap_raises(self):
        panel = self.make_panel(6, 4)
        vals = [0.0, 1.0, np.nan, 3.0, 4.0, 5.0]
        s, keys = self.lf_series("a", 0, 6, vals)
        with pytest.raises(DataError, match="interior"):
            assemble(panel, [s], 4, calendar_from(keys, s))

    def test_period_index_bijection(self):
        panel = self.make_panel(5, 3)
        s, keys = self.lf_series("a", 0, 5)
        ds = assemble(panel, [s], 3, calendar_from(keys, s))
        pairs = {tuple(row) for row in ds.period_index()}
        assert pairs == {(t, i) for t in range(1, 6) for i in range(1, 4)}
        # time order preserved
        np.testing.assert_array_equal(ds.hf, np.sort(ds.hf))


def calendar_from(keys, *series_objs):
    """Map the synthetic LF timestamps used above onto panel period keys."""
    mapping = {}
    for s in series_objs:
        for ts, key in zip(s.timestamps, keys[: len(s.timestamps)]):
            mapping[ts] = key
        keys = keys[len(s.timestamps):]
    return lambda ts: mapping[ts]


class TestSimulate:
    def test_deterministic(self):
        a, ta = simulate_pooled_rumidas(4, 30, np.zeros(4), [0.3, 0, 0, 0], seed=5)
        b, tb = simulate_pooled_rumidas(4, 30, np.zeros(4), [0.3, 0, 0, 0], seed=5)
        np.testing.assert_array_equal(a.hf, b.hf)
        np.testing.assert_array_equal(a.lf, b.lf)
        assert ta == tb

    def test_white_noise_when_all_zero(self):
        ds, _ = simulate_pooled_rumidas(5, 4000, np.zeros(5), np.zeros(5), seed=1)
        x = ds.hf
        r1 = np.corrcoef(x[1:], x[:-1])[0, 1]
        assert abs(r1) < 0.02
        assert abs(x.std() - 1.0) < 0.02

    def test_ar1_autocorrelation(self):
        # beta = (0.5, 0...), alpha = 0: x is AR(1) with coefficient 0.5
        m, T = 20, 5000  # T*m = 1e5
        beta = np.zeros(m)
        beta[0] = 0.5
        ds, _ = simulate_pooled_rumidas(m, T, np.zeros(m), beta, seed=11)
        x = ds.hf
        r1 = np.corrcoef(x[1:], x[:-1])[0, 1]
        assert abs(r1 - 0.5) < 0.02

    def test_noiseless_recursion_exact(self):
        m, T, K = 4, 12, 2
        alpha = np.array([[0.4, 0.2, 0.0, 0.1], [0.0, 0.3, 0.0, 0.0]])
        beta = np.array([0.4, 0.1, 0.05, 0.0])
        ds, _ = simulate_pooled_rumidas(
            m, T, alpha, beta, noise_scale=0.0, seed=2, burn_in=3
        )
        x, lf = ds.hf, ds.lf
        # every HF index from the second period onwards has all lags in sample
        for n in range(m, ds.n_hf):
            tau, i = divmod(n, m)
            mean = float(alpha[:, i] @ lf[tau - 1])
            mean += sum(beta[j - 1] * x[n - j] for j in range(1, m + 1))
            assert x[n] == pytest.approx(mean, abs=1e-12)

    def test_unstable_beta_rejected(self):
        with pytest.raises(DataError, match="unstable"):
            simulate_pooled_rumidas(3, 10, np.zeros(3), [0.6, 0.5, 0.0])

    def test_same_seed_same_dataset_object_fields(self):
        ds, truth = simulate_pooled_rumidas(
            3, 8, [[0.1, 0.0, 0.2]], [0.2, 0.1, 0.0], seed=9, labels=["u"]
        )
        assert ds.labels == ("u",)
        assert truth["beta"] == [0.2, 0.1, 0.0]
        assert truth["alpha"] == [[0.1, 0.0, 0.2]]
