"""Benchmark interest-rate models used for calibration comparisons.

Three dynamic benchmarks, each fitted around a Svensson initial forward
curve f_0T = b0 + (b1 + b2 T) e^{-c1 T} + b3 T e^{-c2 T} (Svensson 1995;
Nelson & Siegel 1987 is the b3 = 0 case):

* Hull & White (1990) short rate dr = (theta(t) - kappa r) dt + eta dW.
  theta(t) is never materialized: bond and option prices are expressed off
  the initial curve and (kappa, eta) directly in the usual affine form
  (Brigo & Mercurio 2006, ch. 3), with caplets via the zero-bond put and
  swaptions via the Jamshidian (1989) decomposition.

* Rational lognormal (Flesaker & Hughston 1996): Z_tT = G1(T) M_t + G2(T)
  for an exponential martingale M_t = exp(eta W_t - eta^2 t / 2) (Goldberg
  1998) with the Nakamura & Yu (2000) parametrization
  g1 = -k1 P' P^{k2}, g2 = -P' (1 - k1 P^{k2}), which integrates to
  G1(t) = k1 P_0t^{k2+1} / (k2 + 1), G2 = P_0t - G1. Option payoffs are
  (x M_t + y)^+ with lognormal M_t, hence Black-style closed forms. Bond
  prices (and the short rate) are bounded by the deterministic ratios
  G1(T)/G1(t) and G2(T)/G2(t), the model's known limitation.

* Lognormal forward-LIBOR market model on a fixed tenor grid, with the
  stationary volatility hump sigma_i(t) = b1 + (b2 + b3 (T_{i-1} - t))
  e^{-c1 (T_{i-1} - t)} (Brigo & Mercurio 2006, p. 224), Schoenmakers &
  Coffey (2006) correlations, exact Black caplets, and Rebonato's frozen-
  weight swaption volatility approximation (ibid., p. 283): the squared
  swaption vol is the weighted double sum of integrated sigma_i sigma_j
  over [0, expiry], divided by the expiry.

All functions are pure and freely callable concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .errors import DomainError, PricingError, SpecificationError
from .pricing import annuity, black, forward_libor, norm_cdf, swap_rate, SwapSchedule

# ---------------------------------------------------------------------------
# Svensson forward curves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SvenssonParams:
    """Svensson forward-curve parameters (Nelson-Siegel when b3 == 0)."""

    b0: float
    b1: float
    b2: float
    b3: float
    c1: float
    c2: float

    def __post_init__(self):
        if self.c1 <= 0.0 or self.c2 <= 0.0:
            raise SpecificationError(f"Svensson decays must be positive, got c1={self.c1}, c2={self.c2}")

    def forward(self, T: float) -> float:
        return (
            self.b0
            + (self.b1 + self.b2 * T) * math.exp(-self.c1 * T)
            + self.b3 * T * math.exp(-self.c2 * T)
        )

    def integrated_forward(self, T: float) -> float:
        """int_0^T f_0s ds in closed form."""
        e1 = math.exp(-self.c1 * T)
        e2 = math.exp(-self.c2 * T)
        return (
            self.b0 * T
            + self.b1 * (1.0 - e1) / self.c1
            + self.b2 * (1.0 - (1.0 + self.c1 * T) * e1) / self.c1**2
            + self.b3 * (1.0 - (1.0 + self.c2 * T) * e2) / self.c2**2
        )

    def discount(self, T: float) -> float:
        return math.exp(-self.integrated_forward(T))

    def forwards_positive_on(self, grid) -> bool:
        """Fitted forwards are not positive a priori; check on a grid."""
        return all(self.forward(T) > 0.0 for T in grid)


def svensson_discount(p: SvenssonParams, T: float) -> float:
    """exp(-int_0^T f_0s ds) via the closed-form antiderivative."""
    if T < 0.0:
        raise DomainError(f"maturity must be nonnegative, got {T}")
    return p.discount(T)


# ---------------------------------------------------------------------------
# Hull-White
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HullWhiteParams:
    """Mean reversion kappa, absolute vol eta, initial Svensson curve."""

    kappa: float
    eta: float
    svensson: SvenssonParams

    def __post_init__(self):
        if self.kappa <= 0.0:
            raise SpecificationError(f"mean reversion must be positive, got {self.kappa}")
        if self.eta < 0.0:
            raise SpecificationError(f"volatility must be nonnegative, got {self.eta}")

    def discount(self, T: float) -> float:
        return self.svensson.discount(T)


def _hw_B(kappa: float, t: float, T: float) -> float:
    return (1.0 - math.exp(-kappa * (T - t))) / kappa


def _hw_bond_option_vol(p: HullWhiteParams, t: float, T: float) -> float:
    """Std dev of log P(t, T) under the t-forward measure."""
    return p.eta * math.sqrt((1.0 - math.exp(-2.0 * p.kappa * t)) / (2.0 * p.kappa)) * _hw_B(p.kappa, t, T)


def hw_zero_bond_put(p: HullWhiteParams, t: float, T: float, K: float) -> float:
    """Time-0 price of a strike-K put expiring at t on the T-bond."""
    if not 0.0 < t <= T:
        raise DomainError(f"need 0 < t <= T, got t={t}, T={T}")
    if K <= 0.0:
        raise DomainError(f"strike must be positive, got {K}")
    p0t, p0T = p.discount(t), p.discount(T)
    sigma_p = _hw_bond_option_vol(p, t, T)
    if sigma_p == 0.0:
        return max(K * p0t - p0T, 0.0)
    h = math.log(p0T / (p0t * K)) / sigma_p + 0.5 * sigma_p
    return K * p0t * norm_cdf(-h + sigma_p) - p0T * norm_cdf(-h)


def hw_caplet(p: HullWhiteParams, t: float, T: float, notional: float, K: float) -> float:
    """Caplet through the caplet/bond-put identity."""
    if T <= t:
        raise DomainError(f"caplet needs T > t, got t={t}, T={T}")
    factor = 1.0 + K * (T - t)
    return notional * factor * hw_zero_bond_put(p, t, T, 1.0 / factor)


def _hw_affine_A(p: HullWhiteParams, t: float, T: float) -> float:
    """A(t,T) in P(t,T) = A(t,T) exp(-B(t,T) x) with x the mean-zero OU
    factor over the fitted curve.

    Two convexity pieces enter: -B^2 Var(x_t)/2 and -B Cov(x_t, int_0^t x),
    the latter being (eta^2/2 kappa^2)(1 - e^{-kappa t})^2 (equivalently the
    fitted-curve shift phi(t) - f(0,t) integrates into A when moving from
    the short-rate basis to the factor basis)."""
    B = _hw_B(p.kappa, t, T)
    var_x = p.eta**2 * (1.0 - math.exp(-2.0 * p.kappa * t)) / (2.0 * p.kappa)
    cov_xy = p.eta**2 / (2.0 * p.kappa**2) * (1.0 - math.exp(-p.kappa * t)) ** 2
    return p.discount(T) / p.discount(t) * math.exp(-B * cov_xy - 0.5 * B * B * var_x)


def hw_swaption(p: HullWhiteParams, sched: SwapSchedule) -> float:
    """Payer swaption by Jamshidian decomposition into zero-bond puts.

    The coupon bond 1 + fixed leg is split at the critical factor level x*
    where it equals par; each piece becomes a zero-bond put struck at its
    bond price at x*.
    """
    t = sched.expiry
    coupons = [sched.strike * tau for tau in sched.accruals]
    coupons[-1] += 1.0
    a_vals = [_hw_affine_A(p, t, Ti) for Ti in sched.payment_dates]
    b_vals = [_hw_B(p.kappa, t, Ti) for Ti in sched.payment_dates]
    if p.eta == 0.0 or all(b == 0.0 for b in b_vals):
        value = p.discount(t) - sum(c * p.discount(Ti) for c, Ti in zip(coupons, sched.payment_dates))
        return sched.notional * max(value, 0.0)

    def par_gap(x):
        return sum(c * a * math.exp(-b * x) for c, a, b in zip(coupons, a_vals, b_vals)) - 1.0

    lo, hi = -1.0, 1.0
    while par_gap(lo) < 0.0:
        lo *= 2.0
        if lo < -1e6:
            raise PricingError("Jamshidian critical-rate bracket expansion failed (low side)")
    while par_gap(hi) > 0.0:
        hi *= 2.0
        if hi > 1e6:
            raise PricingError("Jamshidian critical-rate bracket expansion failed (high side)")
    x_star = brentq(par_gap, lo, hi, xtol=1e-14, rtol=8.882e-16)
    total = 0.0
    for c, a, b, Ti in zip(coupons, a_vals, b_vals, sched.payment_dates):
        strike_i = a * math.exp(-b * x_star)
        total += c * hw_zero_bond_put(p, t, Ti, strike_i)
    return sched.notional * total


# ---------------------------------------------------------------------------
# rational lognormal
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RatLogParams:
    """Rational lognormal model: k1, k2 shape the split of -P' between the
    martingale-driven and deterministic parts; eta is the martingale vol."""

    k1: float
    k2: float
    eta: float
    svensson: SvenssonParams
    check_horizon: float = 40.0

    def __post_init__(self):
        if self.k2 <= -1.0:
            raise SpecificationError(f"k2 must exceed -1 for G1 to converge, got {self.k2}")
        # g1, g2 >= 0 is required for positivity; checked numerically on a grid.
        grid = [0.01 * self.check_horizon * i for i in range(1, 101)]
        for T in grid:
            P = self.svensson.discount(T)
            f = self.svensson.forward(T)
            g1 = self.k1 * f * P ** (self.k2 + 1.0)
            g2 = f * P * (1.0 - self.k1 * P**self.k2)
            if g1 < -1e-12 or g2 < -1e-12:
                raise SpecificationError(
                    f"rational lognormal weights must be nonnegative; g1({T:.2f})={g1:.3e}, g2({T:.2f})={g2:.3e}"
                )

    def g1_integral(self, t: float) -> float:
        return self.k1 / (self.k2 + 1.0) * self.svensson.discount(t) ** (self.k2 + 1.0)

    def g2_integral(self, t: float) -> float:
        return self.svensson.discount(t) - self.g1_integral(t)

    def discount(self, T: float) -> float:
        # M_0 = 1, so the initial curve is Svensson exactly.
        return self.svensson.discount(T)

    def bond_price(self, t: float, T: float, m: float) -> float:
        """P_tT at martingale level m > 0; bounded by G1(T)/G1(t), G2(T)/G2(t)."""
        if m <= 0.0:
            raise DomainError(f"martingale level must be positive, got {m}")
        num = self.g1_integral(T) * m + self.g2_integral(T)
        den = self.g1_integral(t) * m + self.g2_integral(t)
        return num / den


def lognormal_positive_part(x: float, y: float, log_var: float) -> float:
    """E[(x M + y)^+] for lognormal M with E[M] = 1 and Var(log M) = log_var."""
    if log_var < 0.0:
        raise DomainError(f"log-variance must be nonnegative, got {log_var}")
    if log_var == 0.0 or x == 0.0:
        return max(x + y, 0.0)
    s = math.sqrt(log_var)
    if x > 0.0 and y >= 0.0:
        return x + y
    if x < 0.0 and y <= 0.0:
        return 0.0
    if x > 0.0:  # y < 0: call on M struck at |y|/x
        d1 = (math.log(x / -y) + 0.5 * log_var) / s
        return x * norm_cdf(d1) + y * norm_cdf(d1 - s)
    # x < 0, y > 0: put on M struck at y/|x|
    d1 = (math.log(-x / y) + 0.5 * log_var) / s
    return y * norm_cdf(-(d1 - s)) + x * norm_cdf(-d1)


def ratlog_bond_put(p: RatLogParams, t: float, T: float, K: float) -> float:
    if not 0.0 < t <= T:
        raise DomainError(f"need 0 < t <= T, got t={t}, T={T}")
    x = K * p.g1_integral(t) - p.g1_integral(T)
    y = K * p.g2_integral(t) - p.g2_integral(T)
    z00 = p.g1_integral(0.0) + p.g2_integral(0.0)
    return lognormal_positive_part(x, y, p.eta**2 * t) / z00


def ratlog_caplet(p: RatLogParams, t: float, T: float, notional: float, K: float) -> float:
    if T <= t:
        raise DomainError(f"caplet needs T > t, got t={t}, T={T}")
    factor = 1.0 + K * (T - t)
    return notional * factor * ratlog_bond_put(p, t, T, 1.0 / factor)


def ratlog_swaption(p: RatLogParams, sched: SwapSchedule) -> float:
    t = sched.expiry
    x = p.g1_integral(t) - p.g1_integral(sched.payment_dates[-1])
    y = p.g2_integral(t) - p.g2_integral(sched.payment_dates[-1])
    for tau, Ti in zip(sched.accruals, sched.payment_dates):
        x -= sched.strike * tau * p.g1_integral(Ti)
        y -= sched.strike * tau * p.g2_integral(Ti)
    z00 = p.g1_integral(0.0) + p.g2_integral(0.0)
    return sched.notional * lognormal_positive_part(x, y, p.eta**2 * t) / z00


# ---------------------------------------------------------------------------
# lognormal forward-LIBOR market model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LfmParams:
    """LFM on a fixed tenor grid tenor[0] < tenor[1] < ... ; forward j lives
    on (tenor[j-1], tenor[j]]. ``vol`` is (b1, b2, b3, c1) of the stationary
    hump; ``corr`` is (rho_inf, eta1, eta2) or None when no swaptions are
    priced (caplet-only calibration has no use for correlations)."""

    vol: tuple[float, float, float, float]
    svensson: SvenssonParams
    tenor: tuple[float, ...]
    corr: tuple[float, float, float] | None = None

    def __post_init__(self):
        if len(self.tenor) < 2:
            raise SpecificationError("tenor grid needs at least two dates (one forward)")
        prev = 0.0
        for d in self.tenor:
            if d <= prev:
                raise SpecificationError(f"tenor grid must be strictly increasing and positive, got {self.tenor}")
            prev = d
        if self.vol[3] <= 0.0:
            raise SpecificationError(f"volatility decay c1 must be positive, got {self.vol[3]}")
        if self.corr is not None:
            rho_inf, eta1, eta2 = self.corr
            if not 0.0 < rho_inf < 1.0:
                raise SpecificationError(f"rho_inf must lie in (0,1), got {rho_inf}")
            if eta2 < 0.0 or not 0.0 <= eta1 + eta2 <= -math.log(rho_inf):
                raise SpecificationError(
                    f"correlation parameters must satisfy eta2 >= 0 and 0 <= eta1 + eta2 <= -log(rho_inf), "
                    f"got eta1={eta1}, eta2={eta2}, rho_inf={rho_inf}"
                )
        object.__setattr__(self, "tenor", tuple(float(d) for d in self.tenor))
        object.__setattr__(self, "vol", tuple(float(v) for v in self.vol))

    @property
    def n_forwards(self) -> int:
        return len(self.tenor) - 1

    def discount(self, T: float) -> float:
        return self.svensson.discount(T)

    def sigma(self, i: int, s: float) -> float:
        """Instantaneous vol of forward i (1-based) at time s <= fixing."""
        b1, b2, b3, c1 = self.vol
        u = self.tenor[i - 1] - s
        return b1 + (b2 + b3 * u) * math.exp(-c1 * u)

    def grid_index(self, date: float) -> int:
        for k, d in enumerate(self.tenor):
            if abs(d - date) < 1e-9:
                return k
        raise DomainError(f"date {date} is not on the model tenor grid")


def _int_poly_exp(coeffs, mu: float, a: float, b: float) -> float:
    """int_a^b (sum_n coeffs[n] s^n) e^{mu s} ds, any real mu."""
    if mu == 0.0:
        total = 0.0
        for n, c in enumerate(coeffs):
            total += c * (b ** (n + 1) - a ** (n + 1)) / (n + 1)
        return total
    # antiderivative g(s) e^{mu s} with mu*g + g' = poly
    g = [0.0] * len(coeffs)
    for n in range(len(coeffs) - 1, -1, -1):
        higher = (n + 1) * g[n + 1] if n + 1 < len(g) else 0.0
        g[n] = (coeffs[n] - higher) / mu
    def F(s):
        v = 0.0
        for c in reversed(g):
            v = v * s + c
        return v * math.exp(mu * s)
    return F(b) - F(a)


def integrated_vol_product(p: LfmParams, i: int, j: int, upper: float) -> float:
    """int_0^upper sigma_i(s) sigma_j(s) ds in closed form."""
    b1, b2, b3, c1 = p.vol
    Ti, Tj = p.tenor[i - 1], p.tenor[j - 1]
    if upper > min(Ti, Tj) + 1e-12:
        raise DomainError("volatility integral extends past a fixing date")
    total = b1 * b1 * upper
    for T in (Ti, Tj):
        # b1 * (b2 + b3 (T - s)) e^{-c1 (T - s)} as poly(s) e^{+c1 s}
        scale = math.exp(-c1 * T) * b1
        total += _int_poly_exp((scale * (b2 + b3 * T), -scale * b3), c1, 0.0, upper)
    # (b2 + b3(Ti - s))(b2 + b3(Tj - s)) e^{-c1(Ti + Tj - 2s)}
    scale = math.exp(-c1 * (Ti + Tj))
    p_i = (b2 + b3 * Ti, -b3)
    p_j = (b2 + b3 * Tj, -b3)
    prod = (
        p_i[0] * p_j[0],
        p_i[0] * p_j[1] + p_i[1] * p_j[0],
        p_i[1] * p_j[1],
    )
    total += _int_poly_exp(tuple(scale * c for c in prod), 2.0 * c1, 0.0, upper)
    return total


def lfm_caplet_vol(p: LfmParams, i: int) -> float:
    """Black caplet vol of forward i: v^2 = (1/T_{i-1}) int_0^{T_{i-1}} sigma_i^2."""
    if not 1 <= i <= p.n_forwards:
        raise DomainError(f"forward index must be in [1, {p.n_forwards}], got {i}")
    fixing = p.tenor[i - 1]
    var = integrated_vol_product(p, i, i, fixing)
    if var < 0.0:
        raise SpecificationError(
            f"parameter rejection: negative integrated variance {var:.3e} for forward {i}"
        )
    return math.sqrt(var / fixing)


def lfm_caplet(p: LfmParams, i: int, notional: float = 1.0, strike: float | None = None) -> float:
    """Black caplet price on forward i; ATM when no strike is given."""
    fixing, pay = p.tenor[i - 1], p.tenor[i]
    tau = pay - fixing
    F = forward_libor(p.discount, fixing, pay)
    K = F if strike is None else strike
    v = lfm_caplet_vol(p, i)
    return notional * p.discount(pay) * tau * black(K, F, v * math.sqrt(fixing))


def sc_correlation(p: LfmParams, i: int, j: int, n: int) -> float:
    """Schoenmakers-Coffey forward-rate correlation rho_ij on an n-forward grid.

    Undefined for n < 4 (the parametrization divides by (n-2)(n-3)); small
    grids are rejected rather than guessing a limit.
    """
    if p.corr is None:
        raise SpecificationError("correlation parameters are not set on this model")
    if n < 4:
        raise DomainError(f"the correlation parametrization needs n >= 4 forwards, got {n}")
    if not (1 <= i <= n and 1 <= j <= n):
        raise DomainError(f"indices must lie in [1, {n}], got i={i}, j={j}")
    rho_inf, eta1, eta2 = p.corr
    denom = (n - 2.0) * (n - 3.0)
    t1 = (i * i + j * j + i * j - 3.0 * n * i - 3.0 * n * j + 3.0 * i + 3.0 * j + 2.0 * n * n - n - 4.0) / denom
    t2 = (i * i + j * j + i * j - n * i - n * j - 3.0 * i - 3.0 * j + 3.0 * n + 2.0) / denom
    return math.exp(-abs(j - i) / (n - 1.0) * (-math.log(rho_inf) + eta1 * t1 - eta2 * t2))


def rebonato_swaption_vol(p: LfmParams, sched: SwapSchedule) -> float:
    """Rebonato frozen-weight swaption volatility.

    The swap rate is written as sum_i w_i F_i over the grid forwards spanning
    (expiry, T_n] with w_i = tau_i P(0, T_i) / annuity(schedule), exact at
    time 0 by telescoping of the float leg; then
    v^2 = (1/t) sum_ij w_i w_j F_i F_j rho_ij int_0^t sigma_i sigma_j / S^2.
    """
    t = sched.expiry
    k0 = p.grid_index(t)
    k1 = p.grid_index(sched.payment_dates[-1])
    if k1 <= k0:
        raise DomainError("swap must span at least one grid forward")
    idx = list(range(k0 + 1, k1 + 1))  # 1-based forward indices
    ann = annuity(p.discount, t, sched.payment_dates)
    S = (p.discount(t) - p.discount(sched.payment_dates[-1])) / ann
    weights, forwards = [], []
    for k in idx:
        tau_k = p.tenor[k] - p.tenor[k - 1]
        weights.append(tau_k * p.discount(p.tenor[k]) / ann)
        forwards.append(forward_libor(p.discount, p.tenor[k - 1], p.tenor[k]))
    n = p.n_forwards
    var = 0.0
    for a, ka in enumerate(idx):
        for b, kb in enumerate(idx):
            rho = 1.0 if ka == kb else sc_correlation(p, ka, kb, n)
            var += (
                weights[a] * weights[b] * forwards[a] * forwards[b] * rho
                * integrated_vol_product(p, ka, kb, t)
            )
    var /= S * S * t
    if var < 0.0:
        raise SpecificationError(f"parameter rejection: negative swaption variance {var:.3e}")
    return math.sqrt(var)


def lfm_swaption(p: LfmParams, sched: SwapSchedule) -> float:
    """Black swaption price with the Rebonato volatility."""
    S = swap_rate(p.discount, sched.expiry, sched.payment_dates)
    K = sched.strike if sched.strike > 0.0 else S
    v = rebonato_swaption_vol(p, sched)
    ann = annuity(p.discount, sched.expiry, sched.payment_dates)
    return sched.notional * ann * black(K, S, v * math.sqrt(sched.expiry))
