"""Exponential-polynomial algebra with closed-form tail integrals.

Everything in the chaos machinery is built from functions of the form

    f(s) = sum_i L_i(s) * exp(-c_i * s),      L_i polynomial, c_i > 0,

the exponential-polynomial family familiar from descriptive forward-rate
models (Nelson-Siegel, Svensson; see Bjork & Christensen 1999). The family
is closed under addition and multiplication (degrees add, decays add), and
every integral over [T, inf) is elementary:

    int_T^inf s^n e^{-c s} ds = e^{-cT} * sum_{m<=n} (n!/m!) T^m / c^{n-m+1},

computed here by the stable upward recursion I_n = (T^n e^{-cT} + n I_{n-1})/c
whose terms are all positive (no cancellation). Keeping the whole pricing
path inside this closure is what makes bond and option prices closed-form:
no quadrature appears anywhere outside the test oracles.

Model-input coefficient functions are restricted to polynomial degree <= 3
and decay rates in [1e-4, 50] (enforced at the model-spec level); internal
products may reach degree 8 (two cubic terms times the s^2 weight), which is
the hard cap supported by ``tail_moment``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, SpecificationError

# Degree 8 = (cubic)^2 * s^2, the largest integrand any supported model produces.
MAX_DEGREE = 8
# Terms whose decays differ by less than this are merged to avoid catastrophic
# cancellation between nearly collinear exponentials.
DECAY_MERGE_TOL = 1e-9


def tail_moment(n: int, c: float, T: float) -> float:
    """Integral of s^n * exp(-c*s) over [T, inf), exactly.

    Upward recursion I_n = (T^n e^{-cT} + n I_{n-1}) / c; every term is
    positive, so the recursion is forward-stable for all c > 0.
    """
    if not 0 <= n <= MAX_DEGREE:
        raise DomainError(f"moment order must be in [0, {MAX_DEGREE}], got {n}")
    if c <= 0.0:
        raise DomainError(f"decay rate must be positive for a convergent tail integral, got {c}")
    if T < 0.0:
        raise DomainError(f"lower limit must be nonnegative, got {T}")
    e = math.exp(-c * T)
    value = e / c
    tp = 1.0
    for k in range(1, n + 1):
        tp *= T
        value = (tp * e + k * value) / c
    return value


def _trim(coeffs) -> tuple[float, ...]:
    cs = [float(x) for x in coeffs]
    while cs and cs[-1] == 0.0:
        cs.pop()
    return tuple(cs)


def _poly_add(a, b):
    n = max(len(a), len(b))
    return tuple((a[i] if i < len(a) else 0.0) + (b[i] if i < len(b) else 0.0) for i in range(n))


def _poly_mul(a, b):
    out = [0.0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == 0.0:
            continue
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return tuple(out)


def _poly_eval(coeffs, s):
    v = 0.0
    for c in reversed(coeffs):
        v = v * s + c
    return v


@dataclass(frozen=True)
class ExpPoly:
    """Sum of polynomial-times-exponential terms, sum_i L_i(s) e^{-c_i s}.

    ``terms`` is a tuple of (coeffs, decay) pairs where ``coeffs`` lists the
    polynomial coefficients of L_i in ascending powers of s. Terms are
    normalized at construction: zero terms dropped, decays sorted, and
    near-equal decays merged. The zero function is the empty tuple.
    """

    terms: tuple[tuple[tuple[float, ...], float], ...]

    def __init__(self, terms=()):
        cleaned: list[tuple[tuple[float, ...], float]] = []
        for coeffs, decay in terms:
            decay = float(decay)
            if decay <= 0.0:
                raise SpecificationError(f"decay rate must be strictly positive, got {decay}")
            coeffs = _trim(coeffs)
            if not coeffs:
                continue
            if len(coeffs) - 1 > MAX_DEGREE:
                raise SpecificationError(
                    f"polynomial degree {len(coeffs) - 1} exceeds the supported maximum {MAX_DEGREE}"
                )
            cleaned.append((coeffs, decay))
        cleaned.sort(key=lambda t: t[1])
        merged: list[tuple[tuple[float, ...], float]] = []
        for coeffs, decay in cleaned:
            if merged and abs(decay - merged[-1][1]) < DECAY_MERGE_TOL:
                prev_coeffs, prev_decay = merged[-1]
                summed = _trim(_poly_add(prev_coeffs, coeffs))
                if summed:
                    merged[-1] = (summed, prev_decay)
                else:
                    merged.pop()
            else:
                merged.append((coeffs, decay))
        object.__setattr__(self, "terms", tuple(merged))

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero() -> "ExpPoly":
        return ExpPoly(())

    @staticmethod
    def single(coeffs, decay) -> "ExpPoly":
        """One term L(s) e^{-decay*s} with L given in ascending powers."""
        return ExpPoly(((tuple(coeffs), decay),))

    # -- queries -------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        """Largest polynomial degree over all terms (-1 for the zero function)."""
        return max((len(c) - 1 for c, _ in self.terms), default=-1)

    def __call__(self, s: float) -> float:
        v = 0.0
        for coeffs, decay in self.terms:
            v += _poly_eval(coeffs, s) * math.exp(-decay * s)
        return v

    # -- closed algebra ------------------------------------------------------

    def __add__(self, other: "ExpPoly") -> "ExpPoly":
        return ExpPoly(self.terms + other.terms)

    def __mul__(self, other: "ExpPoly") -> "ExpPoly":
        out = []
        for ca, da in self.terms:
            for cb, db in other.terms:
                out.append((_poly_mul(ca, cb), da + db))
        return ExpPoly(out)

    def scale(self, k: float) -> "ExpPoly":
        k = float(k)
        if k == 0.0:
            return ExpPoly.zero()
        return ExpPoly(tuple((tuple(k * c for c in coeffs), decay) for coeffs, decay in self.terms))

    def squared(self) -> "ExpPoly":
        return self * self

    def times_power(self, j: int) -> "ExpPoly":
        """Multiply by the monomial s^j."""
        if j < 0:
            raise DomainError("power must be nonnegative")
        if j == 0:
            return self
        return ExpPoly(tuple(((0.0,) * j + coeffs, decay) for coeffs, decay in self.terms))

    # -- integrals -----------------------------------------------------------

    def tail_integral(self, T: float) -> float:
        """int_T^inf f(s) ds as a float."""
        total = 0.0
        for coeffs, decay in self.terms:
            for n, b in enumerate(coeffs):
                if b != 0.0:
                    total += b * tail_moment(n, decay, T)
        return total

    def tail(self) -> "ExpPoly":
        """The tail integral as a function of its lower limit.

        Returns g with g(T) = int_T^inf f(s) ds, again exponential-polynomial:
        for a term s^n e^{-cs} the tail is e^{-cT} sum_m (n!/m!) T^m / c^{n-m+1}.
        """
        out = []
        for coeffs, decay in self.terms:
            n_max = len(coeffs) - 1
            tail_coeffs = [0.0] * (n_max + 1)
            for n, b in enumerate(coeffs):
                if b == 0.0:
                    continue
                # coefficient of T^m from the s^n source term
                fact = math.factorial(n)
                for m in range(n + 1):
                    tail_coeffs[m] += b * (fact / math.factorial(m)) / decay ** (n - m + 1)
            out.append((tuple(tail_coeffs), decay))
        return ExpPoly(out)

    def total_integral(self) -> float:
        """int_0^inf f(s) ds."""
        return self.tail_integral(0.0)

    def integral(self, a: float, b: float) -> float:
        """int_a^b f(s) ds for 0 <= a <= b."""
        if a > b:
            raise DomainError(f"integration bounds out of order: [{a}, {b}]")
        return self.tail_integral(a) - self.tail_integral(b)


def eval_exp_poly(f: ExpPoly, s: float) -> float:
    """Evaluate sum_i L_i(s) e^{-c_i s} at s >= 0."""
    if s < 0.0:
        raise DomainError(f"evaluation point must be nonnegative, got {s}")
    return f(s)
