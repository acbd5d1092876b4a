import math

import numpy as np
import pytest

from chaosrates.errors import DomainError, SpecificationError
from chaosrates.exppoly import ExpPoly, eval_exp_poly, tail_moment

from oracles import exppoly_tail_quad, tail_moment_quad


class TestEval:
    def test_pure_exponential_at_zero(self):
        f = ExpPoly.single((1.0,), 1.0)
        assert eval_exp_poly(f, 0.0) == 1.0

    def test_zero_constant_term_at_zero(self):
        f = ExpPoly.single((0.0, 1.0), 1.0)
        assert eval_exp_poly(f, 0.0) == 0.0

    def test_linear_term_direct_arithmetic(self):
        f = ExpPoly.single((1.0, 2.0), 0.5)
        assert eval_exp_poly(f, 2.0) == pytest.approx((1.0 + 2.0 * 2.0) * math.exp(-0.5 * 2.0), rel=1e-15)

    def test_negative_argument_rejected(self):
        with pytest.raises(DomainError):
            eval_exp_poly(ExpPoly.single((1.0,), 1.0), -0.1)

    def test_sum_of_terms(self):
        f = ExpPoly((((1.0,), 1.0), ((0.0, 3.0), 2.0)))
        s = 1.7
        assert f(s) == pytest.approx(math.exp(-s) + 3.0 * s * math.exp(-2.0 * s), rel=1e-15)


class TestTailMoment:
    def test_gamma_one(self):
        assert tail_moment(0, 1.0, 0.0) == pytest.approx(1.0, rel=1e-15)

    def test_gamma_two(self):
        assert tail_moment(1, 1.0, 0.0) == pytest.approx(1.0, rel=1e-15)

    def test_against_quadrature(self):
        assert tail_moment(2, 2.0, 1.0) == pytest.approx(tail_moment_quad(2, 2.0, 1.0), rel=1e-12)

    @pytest.mark.parametrize("n,c,T", [(8, 0.01, 30.0), (5, 0.3, 0.0), (3, 5.0, 2.5), (8, 5.0, 30.0)])
    def test_corner_cases_against_quadrature(self, n, c, T):
        assert tail_moment(n, c, T) == pytest.approx(tail_moment_quad(n, c, T), rel=1e-11)

    def test_nonpositive_decay_rejected(self):
        with pytest.raises(DomainError):
            tail_moment(2, 0.0, 1.0)
        with pytest.raises(DomainError):
            tail_moment(2, -1.0, 1.0)

    def test_order_out_of_range(self):
        with pytest.raises(DomainError):
            tail_moment(9, 1.0, 0.0)
        with pytest.raises(DomainError):
            tail_moment(-1, 1.0, 0.0)


class TestAlgebra:
    def test_product_matches_pointwise(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            f = ExpPoly.single(tuple(rng.uniform(-1, 1, 3)), rng.uniform(0.1, 3))
            g = ExpPoly.single(tuple(rng.uniform(-1, 1, 2)), rng.uniform(0.1, 3))
            h = f * g
            for s in (0.0, 0.3, 1.7, 4.0):
                assert h(s) == pytest.approx(f(s) * g(s), rel=1e-13, abs=1e-15)

    def test_square_and_scale(self):
        f = ExpPoly.single((0.5, -0.2), 0.7)
        for s in (0.0, 1.0, 2.5):
            assert f.squared()(s) == pytest.approx(f(s) ** 2, rel=1e-14, abs=1e-16)
            assert f.scale(-3.0)(s) == pytest.approx(-3.0 * f(s), rel=1e-14, abs=1e-16)

    def test_times_power(self):
        f = ExpPoly.single((2.0,), 1.3)
        g = f.times_power(2)
        assert g(1.5) == pytest.approx(1.5**2 * f(1.5), rel=1e-14)

    def test_decay_collision_merges(self):
        f = ExpPoly((((1.0,), 1.0), ((2.0,), 1.0 + 1e-10)))
        assert len(f.terms) == 1
        assert f.terms[0][0] == (3.0,)

    def test_cancelling_terms_leave_zero(self):
        f = ExpPoly((((1.0,), 1.0), ((-1.0,), 1.0)))
        assert f.is_zero

    def test_degree_cap(self):
        with pytest.raises(SpecificationError):
            ExpPoly.single((1.0,) * 10, 1.0)

    def test_nonpositive_decay_rejected(self):
        with pytest.raises(SpecificationError):
            ExpPoly.single((1.0,), 0.0)


class TestTailIntegrals:
    def test_tail_exppoly_matches_scalar(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            f = ExpPoly((
                (tuple(rng.uniform(-1, 1, 4)), rng.uniform(0.05, 4)),
                (tuple(rng.uniform(-1, 1, 2)), rng.uniform(0.05, 4)),
            ))
            g = f.tail()
            for T in (0.0, 0.8, 3.0, 12.0):
                assert g(T) == pytest.approx(f.tail_integral(T), rel=1e-12, abs=1e-300)

    def test_tail_against_quadrature(self):
        f = ExpPoly((((0.3, -0.1, 0.05), 0.4), ((1.0, 0.2), 1.1)))
        for T in (0.0, 1.0, 5.0):
            assert f.tail_integral(T) == pytest.approx(exppoly_tail_quad(f, T), rel=1e-10)

    def test_finite_integral(self):
        f = ExpPoly.single((1.0, 1.0), 0.9)
        from scipy.integrate import quad
        val, _ = quad(f, 0.5, 2.5, epsabs=1e-15, epsrel=1e-13)
        assert f.integral(0.5, 2.5) == pytest.approx(val, rel=1e-11)
        with pytest.raises(DomainError):
            f.integral(2.0, 1.0)

    def test_zero_function(self):
        assert ExpPoly.zero().tail_integral(0.0) == 0.0
        assert ExpPoly.zero().is_zero
