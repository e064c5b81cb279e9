import math

import numpy as np
import pytest

import oracle
from pmbsi.errors import ParameterError, WindowError
from pmbsi.invariant import (StringParams, compute_aux, compute_C, invariant_drift, weight,
                             weight_sum, weights)
from pmbsi.stringmap import p2_q_map


def test_params_validation():
    with pytest.raises(ParameterError):
        StringParams(2, 2)
    with pytest.raises(ParameterError):
        StringParams(3, 1, eta1=1.0)
    with pytest.raises(ParameterError):
        StringParams(3, 1, Q=0.0)
    assert StringParams(5, 2).lam == 3


class TestWeight:
    def test_three_term_sum(self):
        p = StringParams(2, 1)
        w0 = 1.0 / (1.0 + math.exp(-1.0) + math.exp(-2.0))
        assert w0 == pytest.approx(0.6652, abs=1e-4)
        assert weight(0, p) == pytest.approx(1.0 - w0, rel=1e-15)
        assert weight(0, p) == pytest.approx(0.3348, abs=1e-4)
        assert weight(1, p) == pytest.approx(1.0 - w0, rel=1e-15)  # 1 <= 2/2

    def test_branch_boundary(self):
        p = StringParams(4, 1)
        w = weights(p)
        assert w[3] != w[2]
        assert w[2] == w[0]
        assert weight(3, p) < 0.5

    def test_odd_string_splits_on_real_half(self):
        w = weights(StringParams(5, 1))
        assert len(set(w[:3])) == 1 and w[3] != w[2]

    @pytest.mark.parametrize("l_s", range(2, 14))
    def test_distinct_values(self, l_s):
        for l_pr in range(1, l_s):
            p = StringParams(l_s, l_pr)
            n_distinct = len(set(weights(p).tolist()))
            assert n_distinct == (2 if p.lam > l_s / 2 else 1)
            assert weight_sum(p) == pytest.approx(sum(oracle.bimodal_weights(l_s, l_pr)), rel=1e-15)

    def test_out_of_range(self):
        with pytest.raises(WindowError):
            weight(2, StringParams(3, 2))


class TestC:
    def test_constant_series(self):
        assert compute_C([2.5] * 12, 3, StringParams(6, 2, 0.3, -0.4, 1.7)) == 0.0

    def test_eta_zero_is_weighted_p2(self, rng):
        p = rng.uniform(0.5, 2.0, 12)
        par = StringParams(5, 2, 0.0, 0.0, 1.4)
        expected = sum(weight(h, par) * p2_q_map(p, 3, h, 5, 1.4) for h in range(par.lam + 1))
        assert compute_C(p, 3, par) == pytest.approx(expected, rel=1e-13)

    def test_matches_oracle(self):
        rng = np.random.default_rng(7)
        p = rng.uniform(0.5, 3.0, 10)
        par = StringParams(4, 1, 0.3, -0.2, 1.5)
        for tau in range(0, 10 - 4):
            expected = oracle.invariant(list(p), tau, 4, 1, 0.3, -0.2, 1.5)
            assert compute_C(p, tau, par) == pytest.approx(expected, rel=1e-12, abs=1e-15)

    def test_bounds(self):
        with pytest.raises(WindowError):
            compute_C([1.0, 2.0, 3.0], 1, StringParams(2, 1))


class TestAux:
    def test_constant_series(self):
        c, par = 1.7, StringParams(6, 2, 0.35, -0.45, 2.2)
        a = compute_aux([c] * 20, 5, par)
        assert a.a1 == 0 and a.a2 == 0 and a.a3 == 0
        assert a.a4 == pytest.approx(-0.45 * weight_sum(par), rel=1e-15)
        assert a.a5 == pytest.approx(0.45 * weight_sum(par) * c ** 2.2, rel=1e-14)

    def test_eta_zero(self, rng):
        a = compute_aux(rng.uniform(0.5, 2, 15), 4, StringParams(5, 1, 0.0, 0.0, 0.8))
        assert a.a3 == 0 and a.a4 == 0 and a.a5 == 0

    def test_eta2_zero_kills_a4_a5(self, rng):
        a = compute_aux(rng.uniform(0.5, 2, 15), 4, StringParams(5, 1, 0.5, 0.0, 0.8))
        assert a.a4 == 0 and a.a5 == 0

    def test_matches_oracle(self, rng):
        p = rng.uniform(0.5, 2, 20)
        par = StringParams(6, 2, -0.3, 0.6, 1.9)
        a = compute_aux(p, 5, par)
        ref = oracle.auxiliaries(list(p), 5, 6, 2, -0.3, 0.6, 1.9)
        np.testing.assert_allclose([a.a1, a.a2, a.a3, a.a4, a.a5], ref, rtol=1e-12)
        assert a.c_hist == pytest.approx(oracle.invariant(list(p), 3, 6, 2, -0.3, 0.6, 1.9),
                                         rel=1e-12)

    def test_reconstruction_identity(self):
        rng = np.random.default_rng(99)
        for _ in range(300):
            l_s = int(rng.integers(2, 10))
            l_pr = int(rng.integers(1, l_s))
            par = StringParams(l_s, l_pr, *rng.uniform(-0.9, 0.9, 2), float(rng.uniform(0.1, 4)))
            p = rng.uniform(0.3, 3.0, l_s + l_pr + 5)
            tp = int(rng.integers(l_pr, len(p) - l_s))
            a = compute_aux(p, tp, par)
            x = p[tp + l_s]
            rebuilt = a.a1 + a.a3 + a.a4 + (a.a2 + a.a5) / x ** par.Q
            c = compute_C(p, tp, par)
            scale = max(abs(c), abs(a.a1) + abs(a.a3) + abs(a.a4))
            assert abs(rebuilt - c) <= 1e-9 * scale

    def test_never_reads_forecast_sample(self, rng):
        par = StringParams(5, 2, 0.2, 0.3, 1.1)
        p = rng.uniform(0.5, 2, 14)
        tp = 4
        before = compute_aux(p, tp, par)
        guarded = p.copy()
        guarded[tp + par.lam + 1:] = np.nan  # everything after tau0 = tp + lam
        assert compute_aux(guarded, tp, par) == before

    def test_bounds(self):
        with pytest.raises(WindowError):
            compute_aux([1.0] * 10, 1, StringParams(4, 2))


class TestDrift:
    def test_constant(self):
        d = invariant_drift([3.0] * 30, StringParams(5, 2, 0.1, 0.4, 1.0), range(0, 20))
        assert d.mean == 0 and d.max == 0

    def test_periodic_with_period_lpr(self):
        p = np.tile([1.0, 2.0, 1.5], 12)
        d = invariant_drift(p, StringParams(7, 3, 0.2, -0.3, 1.3), range(0, 20))
        assert d.max == 0

    def test_noisy(self, rng):
        d = invariant_drift(rng.uniform(1, 2, 50), StringParams(6, 1, 0.1, 0.1, 1.0), range(30))
        assert d.mean > 0 and d.max >= d.mean and d.n == 30

    def test_empty(self):
        with pytest.raises(ValueError):
            invariant_drift([1.0] * 10, StringParams(3, 1), [])
