"""Day-by-day calibration engine and model-comparison statistics.

Term-structure fits use the Cairns (1998) maximum-likelihood scheme: observed
log strip prices are Gaussian around the model log prices with a duration-
dependent variance

    nu^2(p, d) = sigma0^2(p) [sigma_inf^2 d^2 b(p) + 1] / [sigma0^2(p) d^2 b(p) + 1],
    b(p) = sigma_d^2 / (sigma0^2(p) [sigma_inf^2 - sigma0^2(p)]),
    sigma0(p) = 1/(3200 p),  sigma_d = 5e-4,  sigma_inf = 1e-3,

interpolating between a price-rounding error at short durations and a level
cap for long bonds. The log-likelihood is maximized by a multi-start global
search (uniform random starts in a parameter box, a bounded Nelder-Mead per
start, then a quasi-Newton polish of the leaders with central finite
differences; the local stages alternate until stationary, which handles the
nonsmooth seams left by root-crossing in the quartic pricing formulas).

Option calibrations minimize squared total relative errors: with YieldE,
CplE and SwpE the root-mean-square relative errors of zero yields, ATM
caplet prices and ATM swaption prices,

    TotalE1 = sqrt(YieldE^2 + CplE^2)            [yields + caplets]
    TotalE2 = sqrt(YieldE^2 + SwpE^2)            [yields + swaptions]
    TotalE3 = sqrt(YieldE^2 + CplE^2 + SwpE^2)   [joint],

and the instruments not used by an objective are re-priced out of sample.
Benchmark models with disjoint curve/vol parameter blocks (Hull-White,
rational lognormal, LFM) are calibrated in two stages: initial curve to
yields, then vol parameters to the option errors. LFM errors are measured
in implied vols rather than prices. Caplet quotes flagged as extrapolated
(the two shortest maturities) never enter an objective.

Comparison statistics: RMSPE on fitted yields, the Diebold & Mariano (1995)
statistic on per-date loss series with a Bartlett/Newey-West long-run
variance at a fixed lag (13 by default), AIC in the least-squares form
n log(RSS/n) + 2k (Burnham & Anderson 2002), and model-selection relative
frequencies (the share of dates on which one model's AIC wins).

Restarts and calibration dates are independent work units; results merge by
an order-free min-reduction, and every random draw descends from one seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from . import marketdata as md
from . import pricing as pr
from .errors import DomainError, OptimizationFailure, SpecificationError, UndefinedStatisticError
from .registry import ModelDefinition, build_model, canonicalize, get_model, pricer_for

PENALTY = 1e12  # objective value standing in for a rejected/failed parameter point
DEFAULT_TERM_STARTS = 1000  # default restart count for term-structure fits
DEFAULT_DM_LAG = 13


# ---------------------------------------------------------------------------
# Cairns error model and log-likelihood
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ErrorModelParams:
    """Constants of the bond-price error model (UK strip conventions)."""

    sigma_d: float = 0.0005
    sigma_inf: float = 0.001
    price_scale: float = 3200.0

    def sigma0(self, price: float) -> float:
        return 1.0 / (self.price_scale * price)


def nu_squared(price: float, duration: float, em: ErrorModelParams = ErrorModelParams()) -> float:
    """Log-price error variance for a strip at the given price and duration."""
    if price <= 0.0:
        raise DomainError(f"price must be positive, got {price}")
    if duration <= 0.0:
        raise DomainError(f"duration must be positive, got {duration}")
    s0 = em.sigma0(price)
    s0_sq = s0 * s0
    sinf_sq = em.sigma_inf**2
    if s0 >= em.sigma_inf:
        raise DomainError(
            f"sigma0(p)={s0:.3e} >= sigma_inf={em.sigma_inf:.3e} (price {price} too deep a discount; b(p) undefined)"
        )
    b = em.sigma_d**2 / (s0_sq * (sinf_sq - s0_sq))
    d_sq = duration * duration
    return s0_sq * (sinf_sq * d_sq * b + 1.0) / (s0_sq * d_sq * b + 1.0)


def gaussian_price_loglik(model_prices, quotes, em: ErrorModelParams = ErrorModelParams()) -> float:
    """Log-likelihood of observed strip prices given model prices."""
    if len(model_prices) != len(quotes):
        raise DomainError("model prices and quotes must pair up")
    total = 0.0
    for p_model, quote in zip(model_prices, quotes):
        if p_model <= 0.0:
            return -math.inf
        nu2 = nu_squared(p_model, quote.duration, em)
        resid = math.log(p_model) - math.log(quote.price)
        total += math.log(2.0 * math.pi * nu2) + resid * resid / nu2
    return -0.5 * total


def cairns_loglik(model_id: str, theta, quotes, em: ErrorModelParams = ErrorModelParams()) -> float:
    """Cairns MLE objective for a registry model at parameter vector theta."""
    pricer = pricer_for(get_model(model_id).build(theta))
    prices = [pricer.discount(q.maturity) for q in quotes]
    return gaussian_price_loglik(prices, quotes, em)


# ---------------------------------------------------------------------------
# error metrics and comparison statistics
# ---------------------------------------------------------------------------


def _rms_relative(fitted, observed) -> float:
    if len(fitted) != len(observed):
        raise DomainError(f"series lengths differ: {len(fitted)} vs {len(observed)}")
    if len(fitted) == 0:
        raise DomainError("empty series")
    total = 0.0
    for f, o in zip(fitted, observed):
        if o == 0.0:
            raise DomainError("observed value is zero; relative error undefined")
        r = f / o - 1.0
        total += r * r
    return math.sqrt(total / len(fitted))


def rmspe(fitted_yields, observed_yields) -> float:
    """Root-mean-squared percentage error of fitted vs observed yields."""
    return _rms_relative(fitted_yields, observed_yields)


def yield_e(fitted, observed) -> float:
    return _rms_relative(fitted, observed)


def cpl_e(fitted, observed) -> float:
    return _rms_relative(fitted, observed)


def swp_e(fitted, observed) -> float:
    return _rms_relative(fitted, observed)


def total_e(*components: float) -> float:
    """Root of the sum of squared component errors (TotalE1/E2/E3)."""
    if not components:
        raise DomainError("at least one component error is required")
    return math.sqrt(sum(c * c for c in components))


def total_e1(yield_err: float, caplet_err: float) -> float:
    return total_e(yield_err, caplet_err)


def total_e2(yield_err: float, swaption_err: float) -> float:
    return total_e(yield_err, swaption_err)


def total_e3(yield_err: float, caplet_err: float, swaption_err: float) -> float:
    return total_e(yield_err, caplet_err, swaption_err)


def dm_statistic(loss1, loss2, lag: int = DEFAULT_DM_LAG) -> float:
    """Diebold-Mariano statistic on two loss series.

    The differential is d_t = loss2_t - loss1_t, so a positive statistic
    means model 1 carries the lower loss (outperforms the baseline in the
    second series). The long-run variance uses a Bartlett kernel up to
    ``lag``. A (numerically) zero long-run variance is an error, not a NaN.
    """
    l1 = np.asarray(loss1, dtype=float)
    l2 = np.asarray(loss2, dtype=float)
    if l1.shape != l2.shape or l1.ndim != 1:
        raise DomainError("loss series must be one-dimensional and equally long")
    n = l1.size
    if lag < 0:
        raise DomainError(f"lag must be nonnegative, got {lag}")
    if n <= lag:
        raise DomainError(f"series length {n} must exceed the lag {lag}")
    d = l2 - l1
    d_bar = float(d.mean())
    dc = d - d_bar
    gamma0 = float(dc @ dc) / n
    lrv = gamma0
    for k in range(1, lag + 1):
        gamma_k = float(dc[k:] @ dc[:-k]) / n
        lrv += 2.0 * (1.0 - k / (lag + 1.0)) * gamma_k
    scale = float(d @ d) / n
    if lrv <= 1e-24 * max(scale, 1e-300) or lrv <= 0.0:
        raise UndefinedStatisticError("zero long-run variance of the loss differential")
    return d_bar / math.sqrt(lrv / n)


def aic(rss: float, n: int, k: int) -> float:
    """Least-squares AIC, n log(RSS/n) + 2k; RSS = 0 returns the -inf sentinel."""
    if rss < 0.0:
        raise DomainError(f"RSS must be nonnegative, got {rss}")
    if n <= 0:
        raise DomainError(f"observation count must be positive, got {n}")
    if k < 0:
        raise DomainError(f"parameter count must be nonnegative, got {k}")
    if rss == 0.0:
        return -math.inf
    return n * math.log(rss / n) + 2.0 * k


def msrf(aic_first, aic_second) -> tuple[float, float]:
    """Model-selection relative frequencies: share of dates each model's AIC wins."""
    a1 = list(aic_first)
    a2 = list(aic_second)
    if len(a1) != len(a2) or not a1:
        raise DomainError("AIC series must be nonempty and equally long")
    wins = sum(1 for x, y in zip(a1, a2) if x < y)
    n = len(a1)
    return wins / n, (n - wins) / n


# ---------------------------------------------------------------------------
# multi-start optimization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OptimizationResult:
    x: tuple[float, ...]
    fun: float
    start_index: int
    seed: int
    n_starts: int
    start_values: tuple[float, ...] = field(repr=False, default=())


def _guarded(objective):
    def wrapped(x):
        try:
            v = float(objective(x))
        except (SpecificationError, DomainError, OverflowError, ZeroDivisionError, ValueError):
            return PENALTY
        if not math.isfinite(v):
            return PENALTY
        return v
    return wrapped


def multistart_optimize(
    objective,
    bounds,
    n_starts: int,
    seed: int,
    polish_top: int = 6,
    nm_maxfev: int | None = None,
    polish_rounds: int = 3,
    screen_top: int | None = None,
) -> OptimizationResult:
    """Best local optimum over ``n_starts`` uniform random starts in ``bounds``.

    Three stages: a bounded Nelder-Mead per start; a cheap quasi-Newton
    screening pass over the leading ``screen_top`` candidates (a short
    Nelder-Mead value after a fixed budget is a poor predictor of where a
    full descent lands, so the ranking is refreshed before committing); and
    a deep polish of the ``polish_top`` leaders alternating central-
    difference L-BFGS-B with a fresh simplex until stationary.

    Bit-reproducible for a fixed seed (starts are drawn up front; reduction
    is an order-free min). Parameter points where the objective raises a
    model/domain error count as diverged; if every start diverges an
    OptimizationFailure carries the diagnostics.
    """
    if n_starts < 1:
        raise DomainError(f"n_starts must be at least 1, got {n_starts}")
    bounds = [(float(lo), float(hi)) for lo, hi in bounds]
    for lo, hi in bounds:
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise DomainError(f"bounds must be finite with lo < hi, got ({lo}, {hi})")
    dim = len(bounds)
    if nm_maxfev is None:
        nm_maxfev = 150 * dim
    if screen_top is None:
        screen_top = max(4 * polish_top, 16)
    fn = _guarded(objective)
    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    starts = rng.uniform(lo, hi, size=(n_starts, dim))

    outcomes = []
    for i in range(n_starts):
        res = minimize(
            fn, starts[i], method="Nelder-Mead", bounds=bounds,
            options=dict(maxfev=nm_maxfev, fatol=1e-14, xatol=1e-11, adaptive=True),
        )
        outcomes.append((float(res.fun), i, tuple(float(v) for v in res.x)))
    outcomes.sort(key=lambda o: (o[0], o[1]))

    finite = [o for o in outcomes if o[0] < PENALTY * 0.5]
    if not finite:
        raise OptimizationFailure(
            f"all {n_starts} starts diverged",
            diagnostics=[f"start {i}: objective stayed at the rejection penalty" for _, i, _ in outcomes[:10]],
        )

    screened = []
    for fun0, idx, x0 in finite[: max(polish_top, screen_top)]:
        res = minimize(
            fn, np.asarray(x0), method="L-BFGS-B", bounds=bounds,
            options=dict(maxfun=600, ftol=1e-16, gtol=1e-12),
        )
        if res.fun < fun0:
            screened.append((float(res.fun), idx, tuple(float(v) for v in res.x)))
        else:
            screened.append((fun0, idx, x0))
    screened.sort(key=lambda o: (o[0], o[1]))

    polished = []
    for fun0, idx, x0 in screened[: max(1, polish_top)]:
        best_f, best_x = fun0, np.asarray(x0)
        for _ in range(polish_rounds):
            improved = False
            res = minimize(
                fn, best_x, method="L-BFGS-B", bounds=bounds, jac="3-point",
                options=dict(maxfun=4000, ftol=1e-20, gtol=1e-16),
            )
            if res.fun < best_f * (1.0 - 1e-12) or res.fun < best_f - 1e-20:
                best_f, best_x, improved = float(res.fun), res.x, True
            res = minimize(
                fn, best_x, method="Nelder-Mead", bounds=bounds,
                options=dict(maxfev=1000, fatol=1e-22, xatol=1e-14, adaptive=True),
            )
            if res.fun < best_f * (1.0 - 1e-12) or res.fun < best_f - 1e-20:
                best_f, best_x, improved = float(res.fun), res.x, True
            if not improved:
                break
        polished.append((best_f, idx, tuple(float(v) for v in best_x)))
    polished.sort(key=lambda o: (o[0], o[1]))
    best_f, best_i, best_x = polished[0]
    return OptimizationResult(
        x=best_x, fun=best_f, start_index=best_i, seed=seed, n_starts=n_starts,
        start_values=tuple(o[0] for o in outcomes),
    )


# ---------------------------------------------------------------------------
# calibration results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CalibrationResult:
    model_id: str
    objective: str  # "term" | "cpl" | "swp" | "joint"
    theta: tuple[float, ...]
    objective_value: float  # -L for term fits, TotalEk for option fits
    n_obs: int
    k_params: int
    aic: float
    seed: int
    n_starts: int
    start_rank: int
    rss: float | None = None
    log_lik: float | None = None
    rmspe: float | None = None
    yield_error: float | None = None
    caplet_error: float | None = None
    swaption_error: float | None = None
    gauge_fixed: bool = False

    def recomputed_aic(self) -> float:
        if self.rss is not None:
            return aic(self.rss, self.n_obs, self.k_params)
        return -2.0 * self.log_lik + 2.0 * self.k_params


# ---------------------------------------------------------------------------
# term-structure calibration
# ---------------------------------------------------------------------------


def calibrate_term(
    model_id: str,
    quotes,
    n_starts: int = DEFAULT_TERM_STARTS,
    seed: int = 0,
    bounds=None,
    em: ErrorModelParams = ErrorModelParams(),
    polish_top: int = 6,
    nm_maxfev: int | None = None,
) -> CalibrationResult:
    """Cairns MLE fit of one registry model to a date's strip quotes.

    The error variance nu^2 is undefined once a model price falls to the
    deep-discount floor 1/(price_scale * sigma_inf); rather than leaving the
    search on a flat rejection plateau there, the objective returns a graded
    barrier proportional to the violation so local descent can re-enter the
    feasible region.
    """
    defn = get_model(model_id)
    if bounds is None:
        bounds = defn.default_bounds
    quotes = list(quotes)
    if not quotes:
        raise DomainError("no bond quotes supplied")
    price_floor = 1.0 / (em.price_scale * em.sigma_inf)

    def objective(theta):
        pricer = pricer_for(defn.build(theta))
        prices = [pricer.discount(q.maturity) for q in quotes]
        violation = sum(max(0.0, 1.001 * price_floor - p) for p in prices)
        if violation > 0.0:
            return 1e8 * (1.0 + violation)
        return -gaussian_price_loglik(prices, quotes, em)

    opt = multistart_optimize(objective, bounds, n_starts, seed, polish_top=polish_top, nm_maxfev=nm_maxfev)
    theta = opt.x
    gauge_fixed = False
    if defn.is_chaos():
        theta = canonicalize(model_id, theta)
        gauge_fixed = True
    log_lik = cairns_loglik(model_id, theta, quotes, em)
    pricer = pricer_for(defn.build(theta))
    fitted = [pricer.zero_yield(q.maturity) for q in quotes]
    observed = [md.price_to_yield(q) for q in quotes]
    fit_rmspe = rmspe(fitted, observed)
    k = defn.n_params
    return CalibrationResult(
        model_id=model_id, objective="term", theta=theta, objective_value=-log_lik,
        n_obs=len(quotes), k_params=k, aic=-2.0 * log_lik + 2.0 * k,
        seed=seed, n_starts=opt.n_starts, start_rank=opt.start_index,
        log_lik=log_lik, rmspe=fit_rmspe, yield_error=fit_rmspe, gauge_fixed=gauge_fixed,
    )


# ---------------------------------------------------------------------------
# option calibration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CapletQuote:
    expiry: float
    maturity: float
    strike: float
    price: float
    vol: float
    excluded: bool = False


@dataclass(frozen=True)
class SwaptionQuote:
    schedule: pr.SwapSchedule
    price: float
    vol: float
    expiry: float
    tenor: float


@dataclass(frozen=True)
class InstrumentSet:
    """Market observables of one calibration date, pre-transformed: yields,
    ATM caplets and ATM swaptions with strikes and Black prices off the
    observed curve."""

    yields: tuple[tuple[float, float], ...]
    caplets: tuple[CapletQuote, ...]
    swaptions: tuple[SwaptionQuote, ...]
    lfm_tenor: tuple[float, ...]

    def included_caplets(self) -> tuple[CapletQuote, ...]:
        return tuple(c for c in self.caplets if not c.excluded)


def prepare_instruments(snapshot: "md.MarketSnapshot", conv: "md.MarketConventions" = None) -> InstrumentSet:
    """Build the calibration instrument set from a market snapshot."""
    conv = conv or md.MarketConventions()
    curve = md.snapshot_curve(snapshot)
    caplets = []
    for point in snapshot.caplet_vols:
        T = point.maturity
        t = T - conv.caplet_accrual
        if t <= 0.0:
            raise DomainError(f"caplet maturity {T} does not leave room for the accrual")
        K = pr.atm_caplet_strike(curve, t, T)
        price = conv.notional * curve(T) * (T - t) * pr.black(K, K, point.vol * math.sqrt(t))
        caplets.append(CapletQuote(t, T, K, price, point.vol, point.excluded))
    swaptions = []
    for expiry, tenor, vol in snapshot.swaption_vols:
        n_pay = int(round(tenor / conv.swaption_accrual))
        dates = tuple(expiry + conv.swaption_accrual * (i + 1) for i in range(n_pay))
        K = pr.atm_swaption_strike(curve, expiry, dates)
        sched = pr.SwapSchedule(expiry, dates, conv.notional, K)
        ann = pr.annuity(curve, expiry, dates)
        price = conv.notional * ann * pr.black(K, K, vol * math.sqrt(expiry))
        swaptions.append(SwaptionQuote(sched, price, vol, expiry, tenor))
    horizon = conv.caplet_accrual
    if caplets:
        horizon = max(horizon, max(c.maturity for c in caplets))
    if swaptions:
        horizon = max(horizon, max(s.schedule.payment_dates[-1] for s in swaptions))
    n_grid = int(round(horizon / conv.caplet_accrual))
    tenor_grid = tuple(conv.caplet_accrual * (i + 1) for i in range(n_grid))
    return InstrumentSet(
        yields=tuple((T, y) for T, y in snapshot.yields),
        caplets=tuple(caplets),
        swaptions=tuple(swaptions),
        lfm_tenor=tenor_grid,
    )


def _model_errors(pricer, inst: InstrumentSet, used: str):
    """(YieldE, CplE, SwpE) of a pricer against the instrument set.

    ``used`` lists the classes to evaluate ('y', 'c', 's' characters);
    vol-space models are compared on implied vols.
    """
    ye = ce = se = None
    if "y" in used:
        fitted = [pricer.zero_yield(T) for T, _ in inst.yields]
        ye = _rms_relative(fitted, [y for _, y in inst.yields])
    if "c" in used:
        quotes = inst.included_caplets()
        if pricer.vol_space:
            fitted = [pricer.caplet_vol(c.expiry, c.maturity) for c in quotes]
            ce = _rms_relative(fitted, [c.vol for c in quotes])
        else:
            fitted = [pricer.caplet(c.expiry, c.maturity, 1.0, c.strike) for c in quotes]
            ce = _rms_relative(fitted, [c.price for c in quotes])
    if "s" in used:
        if pricer.vol_space:
            fitted = [pricer.swaption_vol(s.schedule) for s in inst.swaptions]
            se = _rms_relative(fitted, [s.vol for s in inst.swaptions])
        else:
            fitted = [pricer.swaption(s.schedule) for s in inst.swaptions]
            se = _rms_relative(fitted, [s.price for s in inst.swaptions])
    return ye, ce, se


_OBJECTIVE_CLASSES = {"cpl": "yc", "swp": "ys", "joint": "ycs"}


def _counts(inst: InstrumentSet, classes: str) -> int:
    n = 0
    if "y" in classes:
        n += len(inst.yields)
    if "c" in classes:
        n += len(inst.included_caplets())
    if "s" in classes:
        n += len(inst.swaptions)
    return n


def _squared_total(errors, inst: InstrumentSet, classes: str):
    ye, ce, se = errors
    total = 0.0
    rss = 0.0
    if "y" in classes:
        total += ye * ye
        rss += ye * ye * len(inst.yields)
    if "c" in classes:
        total += ce * ce
        rss += ce * ce * len(inst.included_caplets())
    if "s" in classes:
        total += se * se
        rss += se * se * len(inst.swaptions)
    return total, rss


def calibrate_options(
    model_id: str,
    snapshot: "md.MarketSnapshot",
    objective: str,
    n_starts: int = 200,
    seed: int = 0,
    bounds=None,
    conv: "md.MarketConventions" = None,
    polish_top: int = 6,
    nm_maxfev: int | None = None,
) -> CalibrationResult:
    """Calibrate one option-capable model to a date's yields and option quotes.

    ``objective`` is one of 'cpl' (yields + caplets), 'swp' (yields +
    swaptions) or 'joint'. Models whose curve parameters are disjoint from
    the vol parameters (HW, RATLOG, LFM) are fitted in two stages.
    """
    if objective not in _OBJECTIVE_CLASSES:
        raise DomainError(f"objective must be one of {sorted(_OBJECTIVE_CLASSES)}, got {objective!r}")
    classes = _OBJECTIVE_CLASSES[objective]
    conv = conv or md.MarketConventions()
    defn = get_model(model_id)
    inst = prepare_instruments(snapshot, conv)
    if "c" in classes and not inst.included_caplets():
        raise DomainError("objective needs caplet quotes but the snapshot has none usable")
    if "s" in classes and not inst.swaptions:
        raise DomainError("objective needs swaption quotes but the snapshot has none")
    if bounds is None:
        bounds = defn.default_bounds

    if defn.is_chaos():
        theta, opt = _calibrate_chaos(defn, inst, classes, bounds, n_starts, seed, polish_top, nm_maxfev)
        theta = canonicalize(model_id, theta)
        gauge_fixed = True
    else:
        theta, opt = _calibrate_staged(defn, inst, classes, objective, bounds, n_starts, seed, polish_top, nm_maxfev)
        gauge_fixed = False

    pricer = _build_pricer(defn, theta, inst, objective)
    want = "ycs"
    if model_id == "LFM" and objective == "cpl":
        want = "yc"  # no correlation block; swaption forecast not defined
    ye, ce, se = _model_errors(pricer, inst, want)
    sq_total, rss = _squared_total((ye, ce, se), inst, classes)
    n_obs = _counts(inst, classes)
    k = defn.parameter_count(objective)
    return CalibrationResult(
        model_id=model_id, objective=objective, theta=tuple(theta),
        objective_value=math.sqrt(sq_total), n_obs=n_obs, k_params=k,
        aic=aic(rss, n_obs, k), seed=seed, n_starts=opt.n_starts, start_rank=opt.start_index,
        rss=rss, rmspe=ye, yield_error=ye, caplet_error=ce, swaption_error=se,
        gauge_fixed=gauge_fixed,
    )


def _build_pricer(defn: ModelDefinition, theta, inst: InstrumentSet, objective: str):
    if defn.model_id == "LFM":
        return pricer_for(build_model("LFM", theta, tenor=inst.lfm_tenor))
    return pricer_for(defn.build(theta))


def _calibrate_chaos(defn, inst, classes, bounds, n_starts, seed, polish_top, nm_maxfev):
    def objective(theta):
        pricer = pricer_for(defn.build(theta))
        errors = _model_errors(pricer, inst, classes)
        total, _ = _squared_total(errors, inst, classes)
        return total

    opt = multistart_optimize(objective, bounds, n_starts, seed, polish_top=polish_top, nm_maxfev=nm_maxfev)
    return opt.x, opt


def _calibrate_staged(defn, inst, classes, objective, bounds, n_starts, seed, polish_top, nm_maxfev):
    """Two-stage benchmark calibration: Svensson curve to yields, then vol
    parameters to the option part of the objective."""
    n_curve = 6
    curve_bounds = list(bounds[:n_curve])
    vol_names = defn.param_names[n_curve:]
    vol_bounds = list(bounds[n_curve:])
    if defn.model_id == "LFM" and objective == "cpl":
        vol_names = vol_names[:-3]
        vol_bounds = vol_bounds[:-3]

    def curve_objective(theta):
        pricer = pricer_for(get_model("SV").build(theta))
        fitted = [pricer.zero_yield(T) for T, _ in inst.yields]
        err = _rms_relative(fitted, [y for _, y in inst.yields])
        return err * err

    curve_opt = multistart_optimize(
        curve_objective, curve_bounds, n_starts, seed, polish_top=polish_top, nm_maxfev=nm_maxfev
    )
    curve_theta = curve_opt.x

    option_classes = classes.replace("y", "")

    def vol_objective(vol_theta):
        pricer = _build_pricer(defn, curve_theta + tuple(vol_theta), inst, objective)
        errors = _model_errors(pricer, inst, option_classes)
        total, _ = _squared_total(errors, inst, option_classes)
        return total

    vol_opt = multistart_optimize(
        vol_objective, vol_bounds, n_starts, seed + 1, polish_top=polish_top, nm_maxfev=nm_maxfev
    )
    theta = curve_theta + tuple(vol_opt.x)
    combined = replace(vol_opt, x=theta, start_index=vol_opt.start_index)
    return theta, combined
