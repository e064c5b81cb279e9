import numpy as np
import pytest

import oracle
from pmbsi.errors import WindowError
from pmbsi.invariant import StringParams, compute_C
from pmbsi.predictor import (Substitution, forecast_segment, iterated_predict, naive_forecast,
                             naive_segment, predict_one, predict_range, resolve_fallbacks)
from pmbsi.series import TimeSeries, shift_positive, unshift


class TestPredictOne:
    @pytest.mark.parametrize("c", [0.37, 1.0, 3.5, 1234.5678])
    @pytest.mark.parametrize("l_s,l_pr", [(2, 1), (5, 2), (9, 4), (12, 11)])
    def test_constant_series_exact(self, c, l_s, l_pr):
        f = predict_one([c] * 20, 15, StringParams(l_s, l_pr, 0.4, -0.3, 2.7))
        assert f.value == c
        assert f.substituted is Substitution.NONE

    def test_constant_without_eta2_undefined(self):
        f = predict_one([2.0] * 20, 10, StringParams(4, 1, 0.5, 0.0, 1.0))
        assert f.value is None and not f.defined

    def test_matches_oracle(self):
        rng = np.random.default_rng(2024)
        p = rng.uniform(0.5, 2.0, 20)
        par = StringParams(5, 2, 0.4, 0.2, 1.3)
        checked = 0
        for tau0 in range(5, 18):
            expected = oracle.forecast(list(p), tau0, 5, 2, 0.4, 0.2, 1.3)
            got = predict_one(p, tau0, par).value
            assert (got is None) == (expected is None)
            if got is not None:
                checked += 1
                assert got == pytest.approx(expected, rel=1e-12)
        assert checked > 5

    def test_round_trip_invariance(self, rng):
        par = StringParams(6, 2, -0.2, 0.5, 0.9)
        p = rng.uniform(0.5, 2.0, 30)
        for tau0 in range(6, 27):
            f = predict_one(p, tau0, par)
            if f.value is None:
                continue
            tp = tau0 - par.lam
            q = p.copy()
            q[tp + par.l_s] = f.value
            target = compute_C(p, tau0 - par.l_s, par)
            assert compute_C(q, tp, par) == pytest.approx(target, rel=1e-9, abs=1e-12)

    def test_no_lookahead(self, rng):
        par = StringParams(5, 3, 0.3, 0.6, 1.7)
        p = rng.uniform(0.5, 2.0, 25)
        tau0 = 12
        base = predict_one(p, tau0, par)
        for _ in range(20):
            q = p.copy()
            q[tau0 + 1:] = rng.uniform(0.01, 100.0, len(q) - tau0 - 1)
            assert predict_one(q, tau0, par) == base

    def test_homogeneity(self, rng):
        par = StringParams(4, 1, 0.0, 0.0, 1.0)
        p = rng.uniform(0.5, 2.0, 20)
        for tau0 in range(4, 19):
            f = predict_one(p, tau0, par)
            if f.value is None:
                continue
            for k in (0.01, 3.0, 250.0):
                assert predict_one(p * k, tau0, par).value == pytest.approx(k * f.value, rel=1e-9)

    def test_window_errors(self):
        with pytest.raises(WindowError, match="window out of bounds"):
            predict_one([1.0] * 10, 3, StringParams(4, 1))
        with pytest.raises(WindowError):
            predict_one([1.0] * 10, 10, StringParams(4, 1))


class TestRange:
    def test_no_undefined_equals_pointwise(self, rng):
        par = StringParams(4, 2, 0.1, 0.5, 1.1)
        p = rng.uniform(0.5, 2.0, 40)
        run = predict_range(p, par, range(4, 38))
        for f in run:
            single = predict_one(p, f.tau0, par)
            if single.defined:
                assert f.value == single.value and f.substituted is Substitution.NONE

    def test_horizon_one_fallback_is_latest_input(self):
        # constant window with eta2 = 0 has no solution
        p = [9.0] * 5 + [2.0] * 8
        run = predict_range(p, StringParams(3, 1, 0.0, 0.0, 1.0), [12])
        assert run[0].substituted is Substitution.NAIVE
        assert run[0].raw is None
        assert run[0].value == 2.0

    def test_longer_horizon_uses_last_valid(self):
        raw = np.array([1.5, np.nan, 2.5, np.nan, np.nan])
        run = resolve_fallbacks(raw, np.array([9.0, 8.0, 7.0, 6.0, 5.0]), range(5), 4)
        assert run.values.tolist() == [1.5, 1.5, 2.5, 2.5, 2.5]
        assert [f.substituted for f in run] == [
            Substitution.NONE, Substitution.LAST_VALID, Substitution.NONE,
            Substitution.LAST_VALID, Substitution.LAST_VALID]
        assert run.substitution_rate == pytest.approx(0.6)

    def test_longer_horizon_without_history_uses_input(self):
        run = resolve_fallbacks(np.array([np.nan, 3.0]), np.array([9.0, 8.0]), [0, 1], 4)
        assert run.values.tolist() == [9.0, 3.0]
        assert run[0].substituted is Substitution.NAIVE

    def test_flags_iff_undefined(self, rng):
        par = StringParams(6, 3, 0.8, -0.9, 25.0)
        p = rng.uniform(0.2, 5.0, 60)
        run = predict_range(p, par, range(6, 57))
        for f in run:
            raw = predict_one(p, f.tau0, par)
            assert (f.substituted is not Substitution.NONE) == (not raw.defined)
            assert np.isfinite(f.value)


class TestIterated:
    def test_single_step_equals_direct(self, rng):
        par = StringParams(4, 1, 0.3, 0.3, 1.2)
        p = rng.uniform(0.5, 2.0, 20)
        for tau0 in range(4, 20):
            d = predict_one(p, tau0, par)
            it = iterated_predict(p, par, tau0, 1)
            if d.defined:
                assert it.value == d.value

    @pytest.mark.parametrize("steps", [1, 2, 5, 17])
    def test_constant_fixed_point(self, steps):
        f = iterated_predict([0.81] * 15, StringParams(6, 1, -0.5, 0.7, 3.3), 10, steps)
        assert f.value == 0.81

    def test_matches_manual_chain(self, rng):
        par = StringParams(3, 1, 0.2, 0.4, 0.7)
        p = list(rng.uniform(0.5, 2.0, 12))
        work = p[:9]
        for _ in range(3):
            f = predict_one(work, len(work) - 1, par)
            work.append(f.value if f.defined else work[-1])
        assert iterated_predict(p, par, 8, 3).value == work[-1]

    def test_needs_one_step_model(self):
        with pytest.raises(ValueError):
            iterated_predict([1.0] * 10, StringParams(4, 2), 6, 2)


class TestNaive:
    def test_value(self):
        assert naive_forecast([1.0, 5.0, 2.0], 1, 3) == 5.0

    def test_constant_zero_error(self):
        seg = naive_segment([4.0] * 20, 10, 20, 3)
        assert np.all(seg.actual == seg.forecast)

    def test_bounds(self):
        with pytest.raises(WindowError):
            naive_forecast([1.0], 1)


class TestSegment:
    def test_targets_and_history(self, rng):
        p = rng.uniform(0.5, 2.0, 30)
        par = StringParams(4, 2, 0.1, 0.2, 1.0)
        seg = forecast_segment(p, par, 20, 30)
        assert seg.targets.tolist() == list(range(20, 30))
        np.testing.assert_array_equal(seg.actual, p[20:30])
        np.testing.assert_array_equal(seg.run.tau0, np.arange(18, 28))

    def test_early_targets_dropped(self, rng):
        p = rng.uniform(0.5, 2.0, 30)
        seg = forecast_segment(p, StringParams(8, 3), 5, 15)
        assert seg.targets.tolist() == list(range(11, 15))

    def test_constant_series_iterated(self):
        seg = forecast_segment([2.0] * 30, StringParams(3, 1, 0.1, 0.5, 2.0), 20, 30,
                               mode="iterated", steps=4)
        assert np.all(seg.forecast == 2.0)

    def test_shift_predict_unshift_round_trip(self):
        # a constant negative series is shifted, predicted exactly, and unshifted
        ts = shift_positive(TimeSeries([-0.75] * 20))
        f = predict_one(ts, 12, StringParams(5, 2, 0.3, 0.4, 1.5))
        assert unshift(f.value, ts) == pytest.approx(-0.75, abs=1e-15)
