import math

import numpy as np
import pytest
from scipy.integrate import quad

from chaosrates.benchmarks import (
    HullWhiteParams, LfmParams, RatLogParams, SvenssonParams, hw_caplet, hw_swaption,
    hw_zero_bond_put, integrated_vol_product, lfm_caplet, lfm_caplet_vol, lfm_swaption,
    lognormal_positive_part, ratlog_caplet, ratlog_swaption, rebonato_swaption_vol,
    sc_correlation, svensson_discount,
)
from chaosrates.errors import DomainError, SpecificationError
from chaosrates.pricing import SwapSchedule, atm_caplet_strike, black, forward_libor, implied_vol

from oracles import hw_mc_caplet, hw_mc_swaption, ratlog_caplet_quad

SV = SvenssonParams(0.035, -0.01, 0.015, 0.008, 0.7, 0.3)


class TestSvensson:
    def test_flat_curve(self):
        p = SvenssonParams(0.04, 0.0, 0.0, 0.0, 1.0, 1.0)
        assert svensson_discount(p, 3.0) == pytest.approx(math.exp(-0.12), rel=1e-15)

    def test_at_zero(self):
        assert svensson_discount(SV, 0.0) == 1.0

    def test_generic_against_quadrature(self):
        val, _ = quad(SV.forward, 0.0, 5.0, epsabs=1e-15, epsrel=1e-13)
        assert svensson_discount(SV, 5.0) == pytest.approx(math.exp(-val), rel=1e-12)

    def test_positive_decays_required(self):
        with pytest.raises(SpecificationError):
            SvenssonParams(0.03, 0.0, 0.0, 0.0, -1.0, 1.0)

    def test_forwards_positive_check(self):
        assert SV.forwards_positive_on(np.linspace(0.0, 30.0, 61))
        inverted = SvenssonParams(0.01, -0.05, 0.0, 0.0, 0.5, 1.0)
        assert not inverted.forwards_positive_on(np.linspace(0.0, 30.0, 61))


class TestHullWhite:
    def test_vanishing_vol_gives_intrinsic(self):
        p = HullWhiteParams(0.1, 0.0, SV)
        t, T = 1.0, 1.5
        K = 0.995
        intrinsic = max(K * SV.discount(t) - SV.discount(T), 0.0)
        assert hw_zero_bond_put(p, t, T, K) == intrinsic
        p_small = HullWhiteParams(0.1, 1e-12, SV)
        assert hw_zero_bond_put(p_small, t, T, K) == pytest.approx(intrinsic, abs=1e-12)

    def test_caplet_is_transformed_bond_put(self):
        p = HullWhiteParams(0.1, 0.01, SV)
        t, T, K, notional = 1.0, 1.25, 0.04, 100.0
        factor = 1.0 + K * (T - t)
        assert hw_caplet(p, t, T, notional, K) == pytest.approx(
            notional * factor * hw_zero_bond_put(p, t, T, 1.0 / factor), rel=1e-15)

    def test_caplet_against_monte_carlo(self):
        p = HullWhiteParams(0.1, 0.01, SV)
        t, T = 1.0, 1.5
        K = atm_caplet_strike(SV.discount, t, T)
        price = hw_caplet(p, t, T, 1.0, K)
        mc, stderr = hw_mc_caplet(0.1, 0.01, SV.discount, SV.forward, t, T, 1.0, K,
                                  n_paths=200_000, seed=4)
        assert price == pytest.approx(mc, abs=4.0 * stderr)
        assert abs(price - mc) / price < 0.015

    def test_swaption_against_decomposed_puts(self):
        # one-period swaption must equal the transformed caplet exactly
        p = HullWhiteParams(0.15, 0.012, SV)
        t, T, K = 1.0, 2.0, 0.04
        sched = SwapSchedule(t, (T,), 1.0, K)
        swp = hw_swaption(p, sched)
        cpl = hw_caplet(p, t, T, 1.0, K)
        assert swp == pytest.approx(cpl, rel=1e-10)

    def test_swaption_against_monte_carlo(self):
        from chaosrates.pricing import atm_swaption_strike
        p = HullWhiteParams(0.1, 0.012, SV)
        dates = (2.0, 3.0, 4.0)
        K = atm_swaption_strike(SV.discount, 1.0, dates)
        sched = SwapSchedule(1.0, dates, 1.0, K)
        price = hw_swaption(p, sched)
        mc, stderr = hw_mc_swaption(0.1, 0.012, SV.discount, sched, n_paths=400_000, seed=8)
        assert price == pytest.approx(mc, abs=4.0 * stderr)
        assert abs(price - mc) / price < 0.01

    def test_swaption_zero_vol_intrinsic(self):
        p = HullWhiteParams(0.1, 0.0, SV)
        sched = SwapSchedule(1.0, (2.0, 3.0), 1.0, 0.02)
        value = SV.discount(1.0) - SV.discount(3.0) - 0.02 * (SV.discount(2.0) + SV.discount(3.0))
        assert hw_swaption(p, sched) == pytest.approx(max(value, 0.0), rel=1e-12)

    def test_initial_curve_reproduced(self):
        p = HullWhiteParams(0.2, 0.015, SV)
        for T in (0.5, 3.0, 11.0):
            assert p.discount(T) == pytest.approx(SV.discount(T), rel=1e-12)

    def test_parameter_validation(self):
        with pytest.raises(SpecificationError):
            HullWhiteParams(0.0, 0.01, SV)
        with pytest.raises(SpecificationError):
            HullWhiteParams(0.1, -0.01, SV)


class TestRationalLognormal:
    def test_vanishing_vol_gives_intrinsic(self):
        p = RatLogParams(0.5, 1.0, 0.0, SV)
        t, T = 1.0, 1.25
        K = atm_caplet_strike(SV.discount, t, T)
        assert ratlog_caplet(p, t, T, 1.0, K) == pytest.approx(0.0, abs=1e-15)

    def test_zero_k1_degenerates(self):
        p = RatLogParams(0.0, 1.0, 0.4, SV)
        t, T = 1.0, 1.25
        K = atm_caplet_strike(SV.discount, t, T)
        # G1 == 0, so the martingale carries no weight and prices are intrinsic
        assert p.g1_integral(2.0) == 0.0
        assert ratlog_caplet(p, t, T, 1.0, K) == pytest.approx(0.0, abs=1e-15)

    def test_caplet_against_lognormal_quadrature(self):
        p = RatLogParams(0.5, 1.0, 0.2, SV)
        t, T = 1.0, 1.25
        K = atm_caplet_strike(SV.discount, t, T)
        price = ratlog_caplet(p, t, T, 1.0, K)
        assert price == pytest.approx(ratlog_caplet_quad(p, t, T, 1.0, K), rel=1e-9)

    def test_swaption_against_lognormal_quadrature(self):
        from oracles import positive_part_gaussian_quadrature
        p = RatLogParams(0.4, 0.5, 0.25, SV)
        sched = SwapSchedule(1.0, (2.0, 3.0), 1.0, 0.035)
        s = p.eta * math.sqrt(sched.expiry)
        x = p.g1_integral(1.0) - p.g1_integral(3.0)
        y = p.g2_integral(1.0) - p.g2_integral(3.0)
        for tau, Ti in zip(sched.accruals, sched.payment_dates):
            x -= sched.strike * tau * p.g1_integral(Ti)
            y -= sched.strike * tau * p.g2_integral(Ti)
        oracle = positive_part_gaussian_quadrature(
            lambda z: x * math.exp(s * z - 0.5 * s * s) + y)
        assert ratlog_swaption(p, sched) == pytest.approx(oracle, rel=1e-9)

    def test_initial_curve_is_svensson(self):
        p = RatLogParams(0.5, 1.0, 0.2, SV)
        for T in (1.0, 6.0):
            assert p.g1_integral(T) + p.g2_integral(T) == pytest.approx(SV.discount(T), rel=1e-12)

    def test_bond_price_bounds(self):
        p = RatLogParams(0.5, 1.0, 0.2, SV)
        t, T = 1.0, 4.0
        lo_hi = sorted([p.g1_integral(T) / p.g1_integral(t), p.g2_integral(T) / p.g2_integral(t)])
        for m in (0.05, 0.3, 1.0, 4.0, 40.0):
            price = p.bond_price(t, T, m)
            assert lo_hi[0] - 1e-12 <= price <= lo_hi[1] + 1e-12

    def test_negative_weight_parameters_rejected(self):
        with pytest.raises(SpecificationError):
            RatLogParams(-0.2, 1.0, 0.2, SV)  # g1 < 0
        with pytest.raises(SpecificationError):
            RatLogParams(1.5, 0.0, 0.2, SV)  # k1 P^k2 > 1 near t = 0 makes g2 < 0

    def test_lognormal_positive_part_cases(self):
        assert lognormal_positive_part(0.5, 0.2, 0.04) == pytest.approx(0.7, rel=1e-15)
        assert lognormal_positive_part(-0.5, -0.2, 0.04) == 0.0
        assert lognormal_positive_part(0.3, -0.2, 0.0) == pytest.approx(0.1, rel=1e-15)
        # call/put parity: E[(xM+y)+] - E[(-xM-y)+] = x + y
        for x, y in ((0.4, -0.3), (-0.4, 0.3)):
            call = lognormal_positive_part(x, y, 0.09)
            put = lognormal_positive_part(-x, -y, 0.09)
            assert call - put == pytest.approx(x + y, rel=1e-12)


LFM_GRID = tuple(0.25 * (i + 1) for i in range(24))  # quarterly to 6y


class TestLfm:
    def _params(self, vol=(0.1, 0.08, 0.05, 1.2), corr=(0.6, 0.05, 0.1)):
        return LfmParams(vol=vol, svensson=SV, tenor=LFM_GRID, corr=corr)

    def test_flat_vol_reduction(self):
        p = self._params(vol=(0.15, 0.0, 0.0, 1.0))
        i = 8  # fixing at 2y
        assert lfm_caplet_vol(p, i) == pytest.approx(0.15, rel=1e-13)
        fixing, pay = LFM_GRID[i - 1], LFM_GRID[i]
        F = forward_libor(SV.discount, fixing, pay)
        expected = SV.discount(pay) * 0.25 * black(F, F, 0.15 * math.sqrt(fixing))
        assert lfm_caplet(p, i) == pytest.approx(expected, rel=1e-13)

    def test_caplet_vol_against_quadrature(self):
        p = self._params()
        i = 8
        fixing = LFM_GRID[i - 1]
        val, _ = quad(lambda s: p.sigma(i, s) ** 2, 0.0, fixing, epsabs=1e-15, epsrel=1e-13)
        assert lfm_caplet_vol(p, i) == pytest.approx(math.sqrt(val / fixing), rel=1e-11)

    def test_integrated_product_against_quadrature(self):
        p = self._params()
        val, _ = quad(lambda s: p.sigma(4, s) * p.sigma(9, s), 0.0, 1.0, epsabs=1e-15, epsrel=1e-13)
        assert integrated_vol_product(p, 4, 9, 1.0) == pytest.approx(val, rel=1e-11)

    def test_single_period_swaption_vol_is_caplet_vol(self):
        p = self._params()
        sched = SwapSchedule(1.0, (1.25,), 1.0, 0.04)
        # forward 4 spans (1.0, 1.25] on the quarterly grid
        assert rebonato_swaption_vol(p, sched) == pytest.approx(lfm_caplet_vol(p, 4), rel=1e-12)

    def test_rebonato_against_quadrature(self):
        p = self._params()
        sched = SwapSchedule(1.0, (2.0, 3.0), 1.0, 0.04)
        # independent recomputation of the frozen-weight formula
        from chaosrates.pricing import annuity
        idx = range(4, 12)  # forwards spanning (1y, 3y] quarterly (1-based)
        ann = annuity(SV.discount, 1.0, sched.payment_dates)
        S = (SV.discount(1.0) - SV.discount(3.0)) / ann
        var = 0.0
        for a in idx:
            for b in idx:
                wa = 0.25 * SV.discount(LFM_GRID[a]) / ann
                wb = 0.25 * SV.discount(LFM_GRID[b]) / ann
                Fa = forward_libor(SV.discount, LFM_GRID[a - 1], LFM_GRID[a])
                Fb = forward_libor(SV.discount, LFM_GRID[b - 1], LFM_GRID[b])
                rho = sc_correlation(p, a, b, p.n_forwards)
                integral, _ = quad(lambda s: p.sigma(a, s) * p.sigma(b, s), 0.0, 1.0,
                                   epsabs=1e-15, epsrel=1e-12)
                var += wa * wb * Fa * Fb * rho * integral
        expected = math.sqrt(var / (S * S * 1.0))
        assert rebonato_swaption_vol(p, sched) == pytest.approx(expected, rel=1e-10)

    def test_swaption_is_black_on_swap_rate(self):
        from chaosrates.pricing import annuity, swap_rate
        p = self._params()
        sched = SwapSchedule(1.0, (2.0, 3.0), 1.0, 0.04)
        v = rebonato_swaption_vol(p, sched)
        S = swap_rate(SV.discount, 1.0, sched.payment_dates)
        ann = annuity(SV.discount, 1.0, sched.payment_dates)
        assert lfm_swaption(p, sched) == pytest.approx(ann * black(0.04, S, v), rel=1e-13)

    def test_caplet_implied_vol_round_trip(self):
        p = self._params()
        for i in (2, 8, 16):
            fixing, pay = LFM_GRID[i - 1], LFM_GRID[i]
            F = forward_libor(SV.discount, fixing, pay)
            price = lfm_caplet(p, i)
            ann = SV.discount(pay) * 0.25
            v = implied_vol(price, F, F, ann, math.sqrt(fixing))
            assert v == pytest.approx(lfm_caplet_vol(p, i), abs=1e-10)

    def test_initial_curve_reproduced(self):
        p = self._params()
        for T in (0.5, 2.0, 5.5):
            assert p.discount(T) == pytest.approx(SV.discount(T), rel=1e-15)

    def test_corr_constraints_enforced(self):
        with pytest.raises(SpecificationError):
            self._params(corr=(0.6, 0.1, -0.05))
        with pytest.raises(SpecificationError):
            self._params(corr=(0.6, 0.6, 0.0))  # eta1 + eta2 > -log(rho_inf) = 0.51
        with pytest.raises(SpecificationError):
            self._params(corr=(1.2, 0.05, 0.1))

    def test_off_grid_dates_rejected(self):
        p = self._params()
        with pytest.raises(DomainError):
            rebonato_swaption_vol(p, SwapSchedule(1.1, (2.1,), 1.0, 0.04))


class TestScCorrelation:
    def _params(self, corr):
        return LfmParams(vol=(0.1, 0.05, 0.02, 1.0), svensson=SV, tenor=LFM_GRID, corr=corr)

    def test_unit_diagonal(self):
        p = self._params((0.5, 0.1, 0.2))
        for i in (1, 4, 10):
            assert sc_correlation(p, i, i, 10) == 1.0

    def test_pure_exponential_reduction(self):
        p = self._params((0.5, 0.0, 0.0))
        for i, j, n in ((1, 5, 10), (2, 9, 12)):
            assert sc_correlation(p, i, j, n) == pytest.approx(0.5 ** (abs(j - i) / (n - 1)), rel=1e-14)

    def test_derived_value_independent_formula(self):
        p = self._params((0.5, 0.1, 0.2))
        i, j, n = 1, 5, 10
        denom = (n - 2) * (n - 3)
        t1 = (i * i + j * j + i * j - 3 * n * i - 3 * n * j + 3 * i + 3 * j + 2 * n * n - n - 4) / denom
        t2 = (i * i + j * j + i * j - n * i - n * j - 3 * i - 3 * j + 3 * n + 2) / denom
        expected = math.exp(-abs(j - i) / (n - 1) * (-math.log(0.5) + 0.1 * t1 - 0.2 * t2))
        assert sc_correlation(p, i, j, n) == pytest.approx(expected, rel=1e-15)

    def test_small_grid_rejected(self):
        p = self._params((0.5, 0.1, 0.2))
        with pytest.raises(DomainError):
            sc_correlation(p, 1, 2, 3)

    def test_symmetric_in_unit_interval(self):
        p = self._params((0.4, 0.08, 0.15))
        for n in (5, 12, 20):
            for i in range(1, n + 1):
                for j in range(1, n + 1):
                    rho = sc_correlation(p, i, j, n)
                    assert 0.0 < rho <= 1.0 + 1e-15
                    assert rho == pytest.approx(sc_correlation(p, j, i, n), rel=1e-15)

    def test_positive_semidefinite_grids(self):
        p = self._params((0.4, 0.08, 0.15))
        for n in (4, 8, 14, 20):
            m = np.array([[sc_correlation(p, i, j, n) for j in range(1, n + 1)] for i in range(1, n + 1)])
            eigs = np.linalg.eigvalsh(m)
            assert eigs.min() >= -1e-10
