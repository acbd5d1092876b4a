"""Closed-form bond put, caplet and payer-swaption prices in chaos models.

In a factorizable second chaos model the exercise payoff of a bond put or a
payer swaption is a quadratic polynomial in the standardized Gaussian state
z = R_t / sqrt(Q_t) (Hughston & Rafailidis 2005); in a one-variable third
chaos model it is a quartic in z = W_t / sqrt(t). Time-0 prices therefore
reduce to

    price = (1 / Z_00) * int_{P(z) >= 0} P(z) phi(z) dz,

which this module evaluates exactly: find the real roots of P, split the
line into sign intervals, and combine truncated moments of the standard
normal, M_k(a, b) = int_a^b z^k phi(z) dz, via the recursion

    M_k = (k-1) M_{k-2} + a^{k-1} phi(a) - b^{k-1} phi(b).

The payoff polynomial is built internally from the Z-coefficient functions
by substituting W_t = sqrt(t) z into the martingale (Hermite) basis, rather
than hard-coding the originally printed coefficient displays: two terms of
the printed quartic put display are suspected misprints (a missing strike
factor). ``compare_payoff_coefficients`` reproduces the printed displays
verbatim and reports any disagreement with the internal derivation.

Caplets are priced through the standard caplet/bond-put identity
Cpl = N (1 + K tau) p(0, t, T, 1/(1 + K tau)) (Brigo & Mercurio 2006, p.41).
Black-formula utilities for implied-vol quoting live here as well.

Valuation is at time 0 throughout (no option seasoning), matching the
day-by-day calibration use case. All functions are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chaos import ChaosOrder, ChaosSpec, discount_factor, z_coeffs
from .chaos import _psi_tail  # noqa: F401  (first-chaos deterministic prices)
from .errors import DomainError, PricingError

_SQRT2 = math.sqrt(2.0)
_INV_SQRT2PI = 1.0 / math.sqrt(2.0 * math.pi)

# Leading coefficients below this fraction of the largest coefficient trigger
# degree reduction (near-degenerate quartics from small delta).
LEADING_COEFF_TOL = 1e-12
# Roots closer than this are treated as one tangency point.
ROOT_MERGE_TOL = 1e-9


def norm_pdf(x: float) -> float:
    return _INV_SQRT2PI * math.exp(-0.5 * x * x)


def norm_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / _SQRT2))


@dataclass(frozen=True)
class PayoffPoly:
    """Polynomial payoff P(z) = sum_k coeffs[k] z^k in the standard normal z.

    Degree at most 4; a (near-)zero leading coefficient is handled by degree
    reduction at root-finding time.
    """

    coeffs: tuple[float, ...]

    def __init__(self, coeffs):
        cs = tuple(float(c) for c in coeffs)
        if len(cs) > 5:
            raise DomainError(f"payoff polynomial degree at most 4 supported, got degree {len(cs) - 1}")
        object.__setattr__(self, "coeffs", cs)

    def __call__(self, z: float) -> float:
        v = 0.0
        for c in reversed(self.coeffs):
            v = v * z + c
        return v

    def derivative_at(self, z: float) -> float:
        v = 0.0
        for k in range(len(self.coeffs) - 1, 0, -1):
            v = v * z + k * self.coeffs[k]
        return v


def _trimmed_coeffs(p: PayoffPoly) -> tuple[tuple[float, ...], float]:
    coeffs = list(p.coeffs)
    max_abs = max((abs(c) for c in coeffs), default=0.0)
    if max_abs == 0.0:
        return (), 0.0
    while len(coeffs) > 1 and abs(coeffs[-1]) < LEADING_COEFF_TOL * max_abs:
        coeffs.pop()
    while coeffs and coeffs[-1] == 0.0:
        coeffs.pop()
    return tuple(coeffs), max_abs


def real_roots(p: PayoffPoly) -> list[float]:
    """All real roots in ascending order, via companion-matrix eigenvalues
    plus a Newton polish; near-coincident roots are merged."""
    coeffs, max_abs = _trimmed_coeffs(p)
    if max_abs == 0.0:
        raise DomainError("identically-zero polynomial has no well-defined roots")
    return _real_roots(coeffs, max_abs)


def _real_roots(coeffs, max_abs) -> list[float]:
    degree = len(coeffs) - 1
    if degree <= 0:
        return []
    if degree == 1:
        return [-coeffs[0] / coeffs[1]]
    if degree == 2:
        e0, e1, e2 = coeffs
        disc = e1 * e1 - 4.0 * e2 * e0
        if disc < 0.0:
            return []
        sqd = math.sqrt(disc)
        q = -0.5 * (e1 + sqd) if e1 >= 0.0 else -0.5 * (e1 - sqd)
        if q == 0.0:  # double root
            return [-e1 / (2.0 * e2)]
        roots = [q / e2, e0 / q]
    else:
        companion = np.zeros((degree, degree))
        for i in range(1, degree):
            companion[i, i - 1] = 1.0
        companion[:, -1] = [-c / coeffs[-1] for c in coeffs[:-1]]
        candidates = [float(ev.real) for ev in np.linalg.eigvals(companion)]
        roots = []
        for r in candidates:
            for _ in range(3):
                fr = _poly_val(coeffs, r)
                dfr = _poly_der(coeffs, r)
                if dfr == 0.0:
                    break
                step = fr / dfr
                r -= step
                if abs(step) < 1e-15 * (1.0 + abs(r)):
                    break
            scale = max(1.0, abs(r)) ** degree
            if abs(_poly_val(coeffs, r)) < 1e-12 * max_abs * scale:
                roots.append(r)
    roots.sort()
    merged: list[float] = []
    for r in roots:
        if merged and abs(r - merged[-1]) < ROOT_MERGE_TOL:
            continue
        merged.append(r)
    return merged


def _poly_val(coeffs, z):
    v = 0.0
    for c in reversed(coeffs):
        v = v * z + c
    return v


def _poly_der(coeffs, z):
    v = 0.0
    for k in range(len(coeffs) - 1, 0, -1):
        v = v * z + k * coeffs[k]
    return v


def truncated_moment(k: int, a: float, b: float) -> float:
    """int_a^b z^k phi(z) dz for the standard normal density, k in 0..4.

    Infinite endpoints are allowed (phi and its polynomial multiples vanish
    there). Recursion: M_k = (k-1) M_{k-2} + a^{k-1} phi(a) - b^{k-1} phi(b).
    """
    if not 0 <= k <= 4:
        raise DomainError(f"moment order must be in [0, 4], got {k}")
    if a > b:
        raise DomainError(f"interval bounds out of order: [{a}, {b}]")
    phi_a = norm_pdf(a) if math.isfinite(a) else 0.0
    phi_b = norm_pdf(b) if math.isfinite(b) else 0.0
    cdf_a = norm_cdf(a) if math.isfinite(a) else (0.0 if a < 0 else 1.0)
    cdf_b = norm_cdf(b) if math.isfinite(b) else (0.0 if b < 0 else 1.0)
    m_prev = cdf_b - cdf_a  # M_0
    if k == 0:
        return m_prev
    m_curr = phi_a - phi_b  # M_1
    pow_a, pow_b = 1.0, 1.0  # a^(j-1), b^(j-1) at j = 1
    for j in range(2, k + 1):
        pow_a = pow_a * a if math.isfinite(a) else 0.0
        pow_b = pow_b * b if math.isfinite(b) else 0.0
        term_a = pow_a * phi_a if math.isfinite(a) else 0.0
        term_b = pow_b * phi_b if math.isfinite(b) else 0.0
        m_curr, m_prev = (j - 1) * m_prev + term_a - term_b, m_curr
    return m_curr


def expected_positive_part(p: PayoffPoly) -> float:
    """int_{p(z) >= 0} p(z) phi(z) dz, by sign-interval decomposition."""
    coeffs, max_abs = _trimmed_coeffs(p)
    if max_abs == 0.0:
        return 0.0
    roots = _real_roots(coeffs, max_abs)
    boundaries = [-math.inf] + roots + [math.inf]
    total = 0.0
    for a, b in zip(boundaries[:-1], boundaries[1:]):
        if math.isinf(a) and math.isinf(b):
            probe = 0.0
        elif math.isinf(a):
            probe = min(-10.0, b - 1.0)
        elif math.isinf(b):
            probe = max(10.0, a + 1.0)
        else:
            probe = 0.5 * (a + b)
        if _poly_val(coeffs, probe) > 0.0:
            total += _interval_value(coeffs, a, b)
    return total


def _interval_value(coeffs, a, b) -> float:
    """sum_k coeffs[k] M_k(a, b) with the moment recursion run once."""
    finite_a, finite_b = math.isfinite(a), math.isfinite(b)
    phi_a = norm_pdf(a) if finite_a else 0.0
    phi_b = norm_pdf(b) if finite_b else 0.0
    cdf_a = norm_cdf(a) if finite_a else (0.0 if a < 0 else 1.0)
    cdf_b = norm_cdf(b) if finite_b else (0.0 if b < 0 else 1.0)
    m_prev = cdf_b - cdf_a
    total = coeffs[0] * m_prev
    if len(coeffs) == 1:
        return total
    m_curr = phi_a - phi_b
    total += coeffs[1] * m_curr
    pow_a, pow_b = phi_a, phi_b  # a^(j-1) phi(a) terms, j = 1
    for j in range(2, len(coeffs)):
        pow_a = pow_a * a if finite_a else 0.0
        pow_b = pow_b * b if finite_b else 0.0
        m_curr, m_prev = (j - 1) * m_prev + pow_a - pow_b, m_curr
        total += coeffs[j] * m_curr
    return total


# ---------------------------------------------------------------------------
# payoff polynomials from the Z-coefficient functions
# ---------------------------------------------------------------------------


def _z_monomials(fa, fb, fc, fd, fe, q):
    """Coefficients in z of fa + fb*w + fc*(w^2-q) + fd*(w^3-3qw) + fe*(w^4-6qw^2+3q^2)
    after the substitution w = sqrt(q) z."""
    sq = math.sqrt(q)
    return (
        fa - fc * q + 3.0 * fe * q * q,
        (fb - 3.0 * fd * q) * sq,
        (fc - 6.0 * fe * q) * q,
        fd * q * sq,
        fe * q * q,
    )


def put_payoff_poly(spec: ChaosSpec, t: float, T: float, K: float) -> PayoffPoly:
    """Polynomial P(z) with K Z_tt - Z_tT = P(z), z the standardized state."""
    zc = z_coeffs(spec)
    at, bt, ct, dt, et = zc.coeffs_at(t)
    aT, bT, cT, dT, eT = zc.coeffs_at(T)
    q = zc.state_variance(t)
    return PayoffPoly(_z_monomials(K * at - aT, K * bt - bT, K * ct - cT, K * dt - dT, K * et - eT, q))


def swaption_payoff_poly(spec: ChaosSpec, sched: "SwapSchedule") -> PayoffPoly:
    """Polynomial P(z) with Z_tt - Z_tTn - K sum tau_i Z_tTi = P(z)."""
    zc = z_coeffs(spec)
    t = sched.expiry
    deltas = list(zc.coeffs_at(t))
    last = zc.coeffs_at(sched.payment_dates[-1])
    for i in range(5):
        deltas[i] -= last[i]
    for tau, Ti in zip(sched.accruals, sched.payment_dates):
        ci = zc.coeffs_at(Ti)
        for i in range(5):
            deltas[i] -= sched.strike * tau * ci[i]
    q = zc.state_variance(t)
    return PayoffPoly(_z_monomials(*deltas, q))


# ---------------------------------------------------------------------------
# instruments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SwapSchedule:
    """Payer swaption terms: expiry t, payment dates T_1..T_n (with T_0 = t),
    notional and fixed strike. Accruals are the date differences."""

    expiry: float
    payment_dates: tuple[float, ...]
    notional: float = 1.0
    strike: float = 0.0

    def __post_init__(self):
        if self.expiry <= 0.0:
            raise DomainError(f"swaption expiry must be positive, got {self.expiry}")
        if len(self.payment_dates) == 0:
            raise DomainError("swap schedule needs at least one payment date")
        prev = self.expiry
        for d in self.payment_dates:
            if d <= prev:
                raise DomainError(f"payment dates must increase strictly from the expiry, got {self.payment_dates}")
            prev = d
        if self.notional <= 0.0:
            raise DomainError(f"notional must be positive, got {self.notional}")
        object.__setattr__(self, "payment_dates", tuple(float(d) for d in self.payment_dates))

    @property
    def accruals(self) -> tuple[float, ...]:
        dates = (self.expiry,) + self.payment_dates
        return tuple(b - a for a, b in zip(dates[:-1], dates[1:]))


def bond_put(spec: ChaosSpec, t: float, T: float, K: float) -> float:
    """Time-0 price of a put with strike K, option expiry t, on the T-bond."""
    if K <= 0.0:
        raise DomainError(f"strike must be positive, got {K}")
    if t < 0.0 or T < t:
        raise DomainError(f"need 0 <= t <= T, got t={t}, T={T}")
    if t == 0.0:
        return max(K - discount_factor(spec, T), 0.0)
    if spec.order is ChaosOrder.FIRST:
        # deterministic rates: V_t/V_0 * (K - P_tT)^+
        p0t = discount_factor(spec, t)
        return p0t * max(K - discount_factor(spec, T) / p0t, 0.0)
    poly = put_payoff_poly(spec, t, T, K)
    z00 = z_coeffs(spec).a(0.0)
    return max(expected_positive_part(poly) / z00, 0.0)


def caplet(spec: ChaosSpec, t: float, T: float, notional: float, K: float) -> float:
    """Caplet on the spot rate over [t, T] with simple strike K, paid at T."""
    if K <= 0.0:
        raise DomainError(f"caplet strike must be positive, got {K}")
    if T <= t:
        raise DomainError(f"caplet needs T > t, got t={t}, T={T}")
    factor = 1.0 + K * (T - t)
    return notional * factor * bond_put(spec, t, T, 1.0 / factor)


def swaption(spec: ChaosSpec, sched: SwapSchedule) -> float:
    """Time-0 price of a payer swaption."""
    if spec.order is ChaosOrder.FIRST:
        tail = _psi_tail(spec)
        value = tail(sched.expiry) - tail(sched.payment_dates[-1])
        for tau, Ti in zip(sched.accruals, sched.payment_dates):
            value -= sched.strike * tau * tail(Ti)
        return sched.notional * max(value, 0.0) / tail(0.0)
    poly = swaption_payoff_poly(spec, sched)
    z00 = z_coeffs(spec).a(0.0)
    return sched.notional * max(expected_positive_part(poly) / z00, 0.0)


# ---------------------------------------------------------------------------
# Black quoting utilities
# ---------------------------------------------------------------------------


def black(K: float, F: float, v: float) -> float:
    """Undiscounted Black value F Phi(d+) - K Phi(d-) with total volatility v."""
    if K <= 0.0 or F <= 0.0:
        raise DomainError(f"Black formula needs positive forward and strike, got F={F}, K={K}")
    if v < 0.0:
        raise DomainError(f"total volatility must be nonnegative, got {v}")
    if v == 0.0:
        return max(F - K, 0.0)
    log_m = math.log(F / K)
    d1 = (log_m + 0.5 * v * v) / v
    return F * norm_cdf(d1) - K * norm_cdf(d1 - v)


def implied_vol(price: float, K: float, F: float, annuity: float, sqrt_t: float) -> float:
    """Invert price = annuity * Black(K, F, v * sqrt_t) for the annualized v.

    The price must lie in the no-arbitrage band
    [max(F-K, 0) * annuity, F * annuity); violations raise PricingError
    naming the violated bound. Bisection is via brentq to 1e-10 in price.
    """
    if annuity <= 0.0 or sqrt_t <= 0.0:
        raise DomainError(f"annuity and sqrt_t must be positive, got {annuity}, {sqrt_t}")
    unit = price / annuity
    intrinsic = max(F - K, 0.0)
    if unit < intrinsic - 1e-14 * max(1.0, F):
        raise PricingError(
            f"price {price} below the intrinsic lower bound {intrinsic * annuity} (no-arbitrage band violated)"
        )
    if unit >= F:
        raise PricingError(f"price {price} at or above the forward upper bound {F * annuity}")
    if unit <= intrinsic + 1e-16 * max(1.0, F):
        return 0.0

    from scipy.optimize import brentq

    def gap(v):
        return black(K, F, v * sqrt_t) - unit

    hi = 1.0
    while gap(hi) < 0.0:
        hi *= 2.0
        if hi > 1e4:
            raise PricingError("implied volatility bracket expansion failed")
    vol = brentq(gap, 1e-16, hi, xtol=1e-16, rtol=8.882e-16, maxiter=200)
    if abs(gap(vol)) > 1e-10 * max(1.0, unit):
        raise PricingError(f"implied volatility solve did not reach the price tolerance at v={vol}")
    return float(vol)


def forward_libor(curve, t: float, T: float) -> float:
    """Simple forward rate over [t, T] seen from time 0: (P(t)/P(T) - 1)/(T - t).

    ``curve`` maps maturity to discount factor. Only time-0 observation is
    supported (forward ratios from a single initial curve).
    """
    if T <= t:
        raise DomainError(f"forward rate needs T > t, got t={t}, T={T}")
    return (curve(t) / curve(T) - 1.0) / (T - t)


def annuity(curve, expiry: float, payment_dates) -> float:
    dates = (expiry,) + tuple(payment_dates)
    total = 0.0
    for a, b in zip(dates[:-1], dates[1:]):
        if b <= a:
            raise DomainError("payment dates must be strictly increasing")
        total += (b - a) * curve(b)
    return total


def swap_rate(curve, expiry: float, payment_dates) -> float:
    """Forward swap rate (P(t) - P(T_n)) / sum tau_i P(T_i) at time 0."""
    ann = annuity(curve, expiry, payment_dates)
    return (curve(expiry) - curve(payment_dates[-1])) / ann


def atm_caplet_strike(curve, t: float, T: float) -> float:
    return forward_libor(curve, t, T)


def atm_swaption_strike(curve, expiry: float, payment_dates) -> float:
    return swap_rate(curve, expiry, payment_dates)


# ---------------------------------------------------------------------------
# cross-check against the originally printed coefficient displays
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoefficientComparison:
    """Derived vs printed payoff-polynomial coefficients for one instrument."""

    instrument: str
    names: tuple[str, ...]
    derived: tuple[float, ...]
    printed: tuple[float, ...]

    @property
    def mismatch_indices(self) -> tuple[int, ...]:
        scale = max(max(abs(x) for x in self.derived), max(abs(x) for x in self.printed), 1e-300)
        return tuple(
            i for i, (d, p) in enumerate(zip(self.derived, self.printed)) if abs(d - p) > 1e-9 * scale
        )

    @property
    def matches(self) -> bool:
        return not self.mismatch_indices


def _printed_put_coefficients(spec: ChaosSpec, t: float, T: float, K: float):
    """The put coefficient display exactly as originally printed.

    The quartic display's constant and linear terms omit the strike on the
    E-tilde and D-tilde differences; that is suspected to be a misprint (the
    internal re-derivation carries the strike there), and the comparison
    below is how the discrepancy is surfaced.
    """
    zc = z_coeffs(spec)
    at, bt, ct, dt, et = zc.coeffs_at(t)
    aT, bT, cT, dT, eT = zc.coeffs_at(T)
    q = zc.state_variance(t)
    if not zc.is_quartic:
        return (
            "put-quadratic",
            ("a0", "a1", "a2"),
            (
                -(aT - K * at) + (cT - K * ct) * q,
                -(bT - K * bt) * math.sqrt(q),
                -(cT - K * ct) * q,
            ),
        )
    sq = math.sqrt(q)
    return (
        "put-quartic",
        ("c0", "c1", "c2", "c3", "c4"),
        (
            -(aT - K * at) + (cT - K * ct) * q - 3.0 * (eT - et) * q * q,
            -(bT - K * bt) * sq + 3.0 * (dT - dt) * q * sq,
            -(cT - K * ct) * q + 6.0 * (eT - K * et) * q * q,
            -(dT - K * dt) * q * sq,
            -(eT - K * et) * q * q,
        ),
    )


def _printed_swaption_coefficients(spec: ChaosSpec, sched: SwapSchedule):
    zc = z_coeffs(spec)
    t = sched.expiry
    head = zc.coeffs_at(t)
    last = zc.coeffs_at(sched.payment_dates[-1])
    deltas = [h - l for h, l in zip(head, last)]
    for tau, Ti in zip(sched.accruals, sched.payment_dates):
        ci = zc.coeffs_at(Ti)
        for i in range(5):
            deltas[i] -= sched.strike * tau * ci[i]
    da, db, dc, dd, de = deltas
    q = zc.state_variance(t)
    if not zc.is_quartic:
        return (
            "swaption-quadratic",
            ("b0", "b1", "b2"),
            (da - dc * q, db * math.sqrt(q), dc * q),
        )
    sq = math.sqrt(q)
    return (
        "swaption-quartic",
        ("d0", "d1", "d2", "d3", "d4"),
        (
            da - dc * q + 3.0 * de * q * q,
            db * sq - 3.0 * dd * q * sq,
            dc * q - 6.0 * de * q * q,
            dd * q * sq,
            de * q * q,
        ),
    )


def compare_payoff_coefficients(
    spec: ChaosSpec, t: float, T: float, K: float, sched: SwapSchedule | None = None
) -> list[CoefficientComparison]:
    """Derived-vs-printed coefficient comparison for a put (and optionally a
    swaption). Any mismatch localizes a misprint in the printed display,
    since the derived coefficients are what the pricing oracle validates."""
    out = []
    instrument, names, printed = _printed_put_coefficients(spec, t, T, K)
    derived = put_payoff_poly(spec, t, T, K).coeffs
    out.append(CoefficientComparison(instrument, names, tuple(derived[: len(names)]), printed))
    if sched is not None:
        instrument, names, printed = _printed_swaption_coefficients(spec, sched)
        derived = swaption_payoff_poly(spec, sched).coeffs
        out.append(CoefficientComparison(instrument, names, tuple(derived[: len(names)]), printed))
    return out


def format_coefficient_report(comparisons) -> str:
    lines = []
    for comp in comparisons:
        lines.append(f"[{comp.instrument}]")
        for i, name in enumerate(comp.names):
            flag = "  MISMATCH (suspected misprint in the printed display)" if i in comp.mismatch_indices else ""
            lines.append(f"  {name}: derived={comp.derived[i]:+.15e}  printed={comp.printed[i]:+.15e}{flag}")
    return "\n".join(lines)
