"""Wiener-chaos interest-rate models of orders one to three.

A positive-rate model is generated by a terminal variable X with chaos
coefficients phi_1, phi_2, phi_3 (Hughston & Rafailidis 2005). The state
price density is the potential V_t = E[ int_t^inf sigma_s^2 ds | F_t ] and
bond prices are P_tT = Z_tT / Z_tt with Z_tT = E[V_T | F_t].

Supported model classes, by how much of the kernel structure is kept:

* FIRST: sigma_s = phi1(s) deterministic. Rates are deterministic and
  positive; P_0T = int_T phi1^2 / int_0 phi1^2.
* SECOND_FACTORIZABLE: phi1 = alpha, phi2(s,u) = beta(s) gamma(u). The state
  is the Gaussian martingale R_t = int_0^t gamma dW with quadratic variation
  Q_t = int_0^t gamma^2, and

      Z_tT = A(T) + B(T) R_t + C(T) (R_t^2 - Q_t),
      A(T) = int_T [alpha^2 + beta^2 Q_s],  B(T) = int_T 2 alpha beta,
      C(T) = int_T beta^2,

  so bond prices are ratios of quadratics in R_t.
* SECOND_ONE_VAR: gamma == 1, hence R_t = W_t, Q_t = t.
* THIRD_ONE_VAR: additionally delta(s) enters through the third-order kernel
  with inner kernels == 1, giving sigma_s = alpha + beta W_s + delta (W_s^2 - s)/2
  and a Z that is quartic in W_t in the martingale (Hermite) basis:

      Z_tT = At(T) + Bt(T) W_t + Ct(T)(W_t^2 - t) + Dt(T)(W_t^3 - 3 t W_t)
             + Et(T)(W_t^4 - 6 t W_t^2 + 3 t^2),

      At = int_T [alpha^2 + s beta^2 + s^2 delta^2 / 2]
      Bt = int_T [2 beta (alpha + s delta)]
      Ct = int_T [beta^2 + alpha delta + s delta^2]
      Dt = int_T [beta delta]
      Et = int_T [delta^2 / 4].

Every coefficient above is a closed-form tail integral of an
exponential-polynomial function, so evaluation at any maturity costs a few
exponentials. Regardless of the order, the initial curve only sees the
one-dimensional aggregate psi(s) (phi1^2 plus the integrated squares of the
higher kernels): P_0T = int_T psi / int_0 psi.

The market price of risk is determined by the martingale part of V_t but has
no closed form at orders >= 2; it is intentionally not exposed here.
All functions are pure; specs are immutable and safe to share across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

from .errors import DomainError, SpecificationError
from .exppoly import ExpPoly

# Decay-rate window for model-input coefficient functions: lower bound keeps
# the tail recursion well conditioned, upper bound keeps exp() sane. Internal
# products (decays add) may exceed the upper bound; that is fine.
MIN_DECAY = 1e-4
MAX_DECAY = 50.0
# Inputs are restricted to cubics; squares and the s^2 weight then reach the
# degree-8 cap of the tail-moment recursion.
MAX_INPUT_DEGREE = 3


class ChaosOrder(Enum):
    FIRST = "first"
    SECOND_ONE_VAR = "second_one_var"
    SECOND_FACTORIZABLE = "second_factorizable"
    THIRD_ONE_VAR = "third_one_var"


_REQUIRED = {
    ChaosOrder.FIRST: ("alpha",),
    ChaosOrder.SECOND_ONE_VAR: ("alpha", "beta"),
    ChaosOrder.SECOND_FACTORIZABLE: ("alpha", "beta", "gamma"),
    ChaosOrder.THIRD_ONE_VAR: ("alpha", "beta", "delta"),
}


def _validate_input_function(name: str, f: ExpPoly) -> None:
    if f.degree > MAX_INPUT_DEGREE:
        raise SpecificationError(
            f"{name}: polynomial degree {f.degree} exceeds the model-input maximum {MAX_INPUT_DEGREE}"
        )
    for _, decay in f.terms:
        if not MIN_DECAY <= decay <= MAX_DECAY:
            raise SpecificationError(
                f"{name}: decay rate {decay} outside the admissible window [{MIN_DECAY}, {MAX_DECAY}]"
            )


@dataclass(frozen=True)
class ChaosSpec:
    """Order plus coefficient functions; identifies one model.

    For FIRST, ``alpha`` plays the role of phi1. ``gamma`` is only meaningful
    for SECOND_FACTORIZABLE (one-variable models fix it to 1), ``delta`` only
    for THIRD_ONE_VAR. A coefficient function may be the zero ExpPoly (e.g. a
    third-order spec with delta == 0 degenerates to second order), but the
    aggregate psi must not vanish identically.
    """

    order: ChaosOrder
    alpha: ExpPoly
    beta: ExpPoly | None = None
    gamma: ExpPoly | None = None
    delta: ExpPoly | None = None
    registry_id: str | None = None

    def __post_init__(self):
        for name in _REQUIRED[self.order]:
            if getattr(self, name) is None:
                raise SpecificationError(f"{self.order.value} model requires coefficient function '{name}'")
        allowed = set(_REQUIRED[self.order])
        for name in ("beta", "gamma", "delta"):
            if name not in allowed and getattr(self, name) is not None:
                raise SpecificationError(f"{self.order.value} model does not take '{name}'")
        for name in ("alpha", "beta", "gamma", "delta"):
            f = getattr(self, name)
            if f is not None:
                _validate_input_function(name, f)
        if self.order is ChaosOrder.SECOND_FACTORIZABLE and self.gamma.is_zero:
            # gamma == 0 kills the state entirely; the model is first order in
            # disguise but Q_t == 0 breaks the z = R_t/sqrt(Q_t) normalisation.
            raise SpecificationError("factorizable second chaos requires a nonzero gamma")
        if build_psi(self).is_zero:
            raise SpecificationError("degenerate model: psi vanishes identically (V_0 = 0)")


@dataclass(frozen=True)
class ZCoeffs:
    """Maturity-indexed coefficients of Z_tT as a polynomial in the state.

    Stored as tail-integral ExpPolys, so evaluation at any maturity is
    closed-form. ``d`` and ``e`` are zero for second-order models. The state
    variance is Q_t = q_const - q_tail(t) for factorizable models (from gamma)
    and t itself for one-variable models (q_tail is None).
    """

    a: ExpPoly
    b: ExpPoly
    c: ExpPoly
    d: ExpPoly
    e: ExpPoly
    q_const: float = 0.0
    q_tail: ExpPoly | None = None

    @property
    def is_quartic(self) -> bool:
        return not (self.d.is_zero and self.e.is_zero)

    def coeffs_at(self, T: float):
        return (self.a(T), self.b(T), self.c(T), self.d(T), self.e(T))

    def state_variance(self, t: float) -> float:
        if t < 0.0:
            raise DomainError(f"time must be nonnegative, got {t}")
        if self.q_tail is None:
            return t
        return self.q_const - self.q_tail(t)


@lru_cache(maxsize=512)
def build_psi(spec: ChaosSpec) -> ExpPoly:
    """The initial-curve aggregate psi.

    psi = phi1^2 (first) | alpha^2 + beta^2 Q_s (second, Q_s = int_0^s gamma^2,
    = s for one-variable) | alpha^2 + s beta^2 + s^2 delta^2 / 2 (third).
    For factorizable models, beta^2 Q_s stays in the exponential-polynomial
    family because the tail of gamma^2 does: beta^2 Q_s = beta^2 Q_inf -
    beta^2 * tail(gamma^2).
    """
    order = spec.order
    if order is ChaosOrder.FIRST:
        return spec.alpha.squared()
    if order is ChaosOrder.SECOND_ONE_VAR:
        return spec.alpha.squared() + spec.beta.squared().times_power(1)
    if order is ChaosOrder.SECOND_FACTORIZABLE:
        gamma_sq = spec.gamma.squared()
        q_inf = gamma_sq.total_integral()
        beta_sq = spec.beta.squared()
        return spec.alpha.squared() + beta_sq.scale(q_inf) + (beta_sq * gamma_sq.tail()).scale(-1.0)
    # third order, one variable
    return (
        spec.alpha.squared()
        + spec.beta.squared().times_power(1)
        + spec.delta.squared().times_power(2).scale(0.5)
    )


@lru_cache(maxsize=512)
def _psi_tail(spec: ChaosSpec) -> ExpPoly:
    return build_psi(spec).tail()


@lru_cache(maxsize=512)
def z_coeffs(spec: ChaosSpec) -> ZCoeffs:
    """Closed-form maturity functions of the Z polynomial. Second*/third only."""
    zero = ExpPoly.zero()
    order = spec.order
    if order is ChaosOrder.FIRST:
        raise SpecificationError("first chaos has no state polynomial; Z_0T is the scalar psi tail")
    if order is ChaosOrder.THIRD_ONE_VAR:
        alpha, beta, delta = spec.alpha, spec.beta, spec.delta
        a_int = build_psi(spec)
        b_int = (beta * alpha).scale(2.0) + (beta * delta).times_power(1).scale(2.0)
        c_int = beta.squared() + alpha * delta + delta.squared().times_power(1)
        d_int = beta * delta
        e_int = delta.squared().scale(0.25)
        return ZCoeffs(a_int.tail(), b_int.tail(), c_int.tail(), d_int.tail(), e_int.tail())
    # second order (one-variable or factorizable)
    alpha, beta = spec.alpha, spec.beta
    a_int = build_psi(spec)
    b_int = (alpha * beta).scale(2.0)
    c_int = beta.squared()
    if order is ChaosOrder.SECOND_FACTORIZABLE:
        gamma_sq = spec.gamma.squared()
        return ZCoeffs(
            a_int.tail(), b_int.tail(), c_int.tail(), zero, zero,
            q_const=gamma_sq.total_integral(), q_tail=gamma_sq.tail(),
        )
    return ZCoeffs(a_int.tail(), b_int.tail(), c_int.tail(), zero, zero)


def state_variance(spec: ChaosSpec, t: float) -> float:
    """Variance of the Gaussian state at time t: Q_t for factorizable models
    (computed from gamma), t for one-variable models."""
    if t < 0.0:
        raise DomainError(f"time must be nonnegative, got {t}")
    if spec.order is ChaosOrder.SECOND_FACTORIZABLE:
        gamma_sq_tail = spec.gamma.squared().tail()
        return gamma_sq_tail(0.0) - gamma_sq_tail(t)
    return t


def discount_factor(spec: ChaosSpec, T: float) -> float:
    """P_0T = int_T^inf psi / int_0^inf psi, in (0, 1], with P_00 = 1."""
    if T < 0.0:
        raise DomainError(f"maturity must be nonnegative, got {T}")
    tail = _psi_tail(spec)
    return tail(T) / tail(0.0)


def forward_rate(spec: ChaosSpec, T: float) -> float:
    """Instantaneous forward f_0T = psi(T) / int_T^inf psi; positive by construction."""
    if T < 0.0:
        raise DomainError(f"maturity must be nonnegative, got {T}")
    return build_psi(spec)(T) / _psi_tail(spec)(T)


def zero_yield(spec: ChaosSpec, T: float) -> float:
    """Continuously compounded zero yield -log P_0T / T (T > 0)."""
    if T <= 0.0:
        raise DomainError(f"yield requires a strictly positive maturity, got {T}")
    return -math.log(discount_factor(spec, T)) / T


def z_value(spec: ChaosSpec, t: float, T: float, w):
    """Z_tT evaluated at realized state w (R_t or W_t); strictly positive.

    Accepts scalar or numpy-array w (plain arithmetic throughout).
    """
    if T < t:
        raise DomainError(f"maturity {T} precedes observation time {t}")
    if t < 0.0:
        raise DomainError(f"time must be nonnegative, got {t}")
    zc = z_coeffs(spec)
    a, b, c, d, e = zc.coeffs_at(T)
    q = zc.state_variance(t)
    w2 = w * w
    value = a + b * w + c * (w2 - q)
    if zc.is_quartic:
        value = value + d * (w2 * w - 3.0 * q * w) + e * (w2 * w2 - 6.0 * q * w2 + 3.0 * q * q)
    return value


def _sigma_at(spec: ChaosSpec, t: float, w) -> float:
    """The volatility integrand sigma_t given the realized state."""
    order = spec.order
    if order is ChaosOrder.FIRST:
        return spec.alpha(t)
    if order is ChaosOrder.THIRD_ONE_VAR:
        return spec.alpha(t) + spec.beta(t) * w + 0.5 * spec.delta(t) * (w * w - t)
    return spec.alpha(t) + spec.beta(t) * w


def state_price_density(spec: ChaosSpec, t: float, w) -> float:
    """V_t = Z_tt at realized state w. Deterministic for first chaos."""
    if spec.order is ChaosOrder.FIRST:
        if t < 0.0:
            raise DomainError(f"time must be nonnegative, got {t}")
        return _psi_tail(spec)(t)
    return z_value(spec, t, t, w)


def future_bond_price(spec: ChaosSpec, t: float, T: float, w) -> float:
    """P_tT = Z_tT / Z_tt at realized state w; in (0, 1) for T > t."""
    if spec.order is ChaosOrder.FIRST:
        if T < t:
            raise DomainError(f"maturity {T} precedes observation time {t}")
        return discount_factor(spec, T) / discount_factor(spec, t)
    return z_value(spec, t, T, w) / z_value(spec, t, t, w)


def short_rate(spec: ChaosSpec, t: float, w) -> float:
    """r_t = M_tt / V_t with M_tt = sigma_t^2; strictly positive."""
    sig = _sigma_at(spec, t, w)
    return sig * sig / state_price_density(spec, t, w)
