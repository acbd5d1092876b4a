"""Market data: snapshot files, curve bootstrap, cap stripping, synthesis.

A calibration date is a ``MarketSnapshot``: strip quotes (price, maturity,
Macaulay duration), zero-coupon yields, an ATM caplet vol term structure and
an ATM swaption vol grid. Snapshots live in a directory of small CSV files
(one file per instrument class, schemas below) with maturities already
converted to Actual/Actual (ISDA) year fractions; a year-fraction helper is
provided for upstream converters.

    bonds.csv          maturity_years, clean_price, duration_years
    yields.csv         maturity_years, zero_yield
    caplet_vols.csv    maturity_years, atm_vol, excluded
    swaption_vols.csv  expiry_years, tenor_years, atm_vol
    curve CSV input    kind, start, end, rate     (deposit | future | swap)

Discount curves bootstrap from deposits, futures (treated as forward rates;
no convexity adjustment) and par swaps, matching every instrument exactly
with log-linear discount interpolation between pillars. ATM cap vols strip
into caplet vols that are piecewise constant between cap maturities and
reprice every cap; caplets maturing before the first quoted cap take the
first stripped vol by constant extrapolation and are flagged
``excluded`` so calibration skips them. Obvious outliers (beyond a multiple
of the rolling cross-sectional IQR around the rolling median) are dropped at
ingestion with a log entry; the threshold is configurable.

``synthesize_snapshot`` replaces proprietary data feeds: it prices yields,
ATM caplets and ATM swaptions off any model in the registry, optionally
perturbs the quotes with multiplicative Gaussian noise, and is bit-for-bit
deterministic for a fixed seed.

Parsed snapshots are immutable and freely shared across workers.
"""

from __future__ import annotations

import csv
import datetime as _dt
import logging
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import pricing as pr
from .errors import DomainError, IngestionError
from .registry import pricer_for

logger = logging.getLogger(__name__)

OUTLIER_IQR_MULTIPLE = 5.0
OUTLIER_WINDOW = 7


# ---------------------------------------------------------------------------
# quotes and snapshots
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BondQuote:
    """A zero-coupon strip quote; duration equals maturity for a strip."""

    maturity: float
    price: float
    duration: float

    def __post_init__(self):
        if self.maturity <= 0.0:
            raise DomainError(f"maturity must be positive, got {self.maturity}")
        if not 0.0 < self.price <= 1.0:
            raise DomainError(f"strip price must lie in (0, 1], got {self.price}")
        if not 0.0 < self.duration <= self.maturity + 1e-12:
            raise DomainError(f"duration must lie in (0, maturity], got {self.duration}")


def price_to_yield(quote: BondQuote) -> float:
    """Continuously compounded yield -log(p)/T."""
    return -math.log(quote.price) / quote.maturity


def yield_to_price(y: float, T: float) -> float:
    if T <= 0.0:
        raise DomainError(f"maturity must be positive, got {T}")
    return math.exp(-y * T)


@dataclass(frozen=True)
class CapletVolPoint:
    maturity: float
    vol: float
    excluded: bool = False


@dataclass(frozen=True)
class MarketSnapshot:
    date: str
    bonds: tuple[BondQuote, ...] = ()
    yields: tuple[tuple[float, float], ...] = ()
    caplet_vols: tuple[CapletVolPoint, ...] = ()
    swaption_vols: tuple[tuple[float, float, float], ...] = ()

    def __post_init__(self):
        for name, mats in (
            ("bonds", [b.maturity for b in self.bonds]),
            ("yields", [T for T, _ in self.yields]),
            ("caplet_vols", [c.maturity for c in self.caplet_vols]),
        ):
            if any(b <= a for a, b in zip(mats[:-1], mats[1:])):
                raise IngestionError(f"{name} maturities must increase strictly: {mats}")
        if any(y <= 0.0 for _, y in self.yields):
            raise IngestionError("zero yields must be positive")
        if any(c.vol <= 0.0 for c in self.caplet_vols):
            raise IngestionError("caplet vols must be positive")
        if any(v <= 0.0 for _, _, v in self.swaption_vols):
            raise IngestionError("swaption vols must be positive")


@dataclass(frozen=True)
class MarketConventions:
    """Accrual conventions the data and calibration agree on. The cap/caplet
    accrual is quarterly by default; swaption fixed legs pay annually."""

    caplet_accrual: float = 0.25
    swaption_accrual: float = 1.0
    notional: float = 1.0


def snapshot_curve(snapshot: MarketSnapshot):
    """Discount curve from the snapshot's zero yields: linear interpolation
    of y*T (log-discount) between pillars, flat yield beyond the ends."""
    if not snapshot.yields:
        raise IngestionError(f"snapshot {snapshot.date} carries no zero yields")
    times = [T for T, _ in snapshot.yields]
    logs = [y * T for T, y in snapshot.yields]

    def curve(T: float) -> float:
        if T < 0.0:
            raise DomainError(f"maturity must be nonnegative, got {T}")
        if T == 0.0:
            return 1.0
        if T <= times[0]:
            return math.exp(-snapshot.yields[0][1] * T)
        if T >= times[-1]:
            return math.exp(-snapshot.yields[-1][1] * T)
        import bisect

        i = bisect.bisect_left(times, T)
        w = (T - times[i - 1]) / (times[i] - times[i - 1])
        return math.exp(-((1.0 - w) * logs[i - 1] + w * logs[i]))

    return curve


# ---------------------------------------------------------------------------
# Actual/Actual (ISDA) day count
# ---------------------------------------------------------------------------


def actual_actual_year_fraction(start_iso: str, end_iso: str) -> float:
    """Actual/Actual (ISDA) year fraction between two ISO dates: actual days
    in each calendar year divided by that year's length (365 or 366)."""
    start = _dt.date.fromisoformat(start_iso)
    end = _dt.date.fromisoformat(end_iso)
    if end < start:
        raise DomainError(f"end date {end_iso} precedes start date {start_iso}")
    total = 0.0
    for year in range(start.year, end.year + 1):
        y_start = max(start, _dt.date(year, 1, 1))
        y_end = min(end, _dt.date(year + 1, 1, 1))
        days_in_year = (_dt.date(year + 1, 1, 1) - _dt.date(year, 1, 1)).days
        total += (y_end - y_start).days / days_in_year
    return total


# ---------------------------------------------------------------------------
# curve bootstrap
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CurveInstrument:
    kind: str  # deposit | future | swap
    start: float
    end: float
    rate: float

    def __post_init__(self):
        if self.kind not in ("deposit", "future", "swap"):
            raise IngestionError(f"unknown curve instrument kind {self.kind!r}")
        if self.end <= self.start or self.start < 0.0:
            raise IngestionError(f"need 0 <= start < end, got start={self.start}, end={self.end}")


@dataclass(frozen=True)
class DiscountCurve:
    """Bootstrapped pillar curve with log-linear discount interpolation and
    flat-forward extrapolation past the last pillar."""

    times: tuple[float, ...]
    log_dfs: tuple[float, ...]

    def __call__(self, T: float) -> float:
        if T < 0.0:
            raise DomainError(f"maturity must be nonnegative, got {T}")
        if T == 0.0:
            return 1.0
        times, logs = self.times, self.log_dfs
        if T <= times[0]:
            return math.exp(logs[0] * T / times[0])
        if T >= times[-1]:
            if len(times) >= 2:
                slope = (logs[-1] - logs[-2]) / (times[-1] - times[-2])
            else:
                slope = logs[-1] / times[-1]
            return math.exp(logs[-1] + slope * (T - times[-1]))
        import bisect

        i = bisect.bisect_left(times, T)
        w = (T - times[i - 1]) / (times[i] - times[i - 1])
        return math.exp((1.0 - w) * logs[i - 1] + w * logs[i])


def _swap_dates(instrument: CurveInstrument, accrual: float):
    n = (instrument.end - instrument.start) / accrual
    if abs(n - round(n)) > 1e-9:
        raise IngestionError(
            f"swap maturity {instrument.end} is not a whole number of {accrual}-year periods"
        )
    return [instrument.start + accrual * (i + 1) for i in range(int(round(n)))]


def bootstrap_curve(instruments, swap_accrual: float = 1.0) -> DiscountCurve:
    """Pillar-by-pillar bootstrap matching every instrument exactly.

    Deposits give P(end) = P(start)/(1 + r tau); futures are treated as
    forward rate agreements over [start, end] (no convexity adjustment);
    par swaps pay a fixed leg every ``swap_accrual`` years, with intermediate
    discounts interpolated log-linearly, so each new pillar is a one-
    dimensional root solve. Overlapping or duplicate end dates are an
    ingestion error listing the offenders.
    """
    instruments = sorted(instruments, key=lambda q: q.end)
    if not instruments:
        raise IngestionError("no curve instruments supplied")
    offenders = [
        f"({a.kind} end={a.end}, {b.kind} end={b.end})"
        for a, b in zip(instruments[:-1], instruments[1:])
        if b.end - a.end < 1e-9
    ]
    if offenders:
        raise IngestionError("inconsistent overlapping quotes: " + "; ".join(offenders))

    times: list[float] = []
    logs: list[float] = []

    def df(T: float, candidate=None) -> float:
        # curve so far, optionally extended by the candidate pillar
        ts = times + ([candidate[0]] if candidate else [])
        ls = logs + ([candidate[1]] if candidate else [])
        if T == 0.0:
            return 1.0
        if not ts:
            raise IngestionError(f"instrument references date {T} before any pillar is known")
        if T <= ts[0]:
            return math.exp(ls[0] * T / ts[0])
        for i in range(1, len(ts)):
            if T <= ts[i] + 1e-12:
                w = (T - ts[i - 1]) / (ts[i] - ts[i - 1])
                return math.exp((1.0 - w) * ls[i - 1] + w * ls[i])
        raise IngestionError(f"instrument references date {T} beyond the last known pillar {ts[-1]}")

    for q in instruments:
        tau = q.end - q.start
        if q.kind in ("deposit", "future"):
            df_start = 1.0 if q.start == 0.0 else df(q.start)
            df_end = df_start / (1.0 + q.rate * tau)
            times.append(q.end)
            logs.append(math.log(df_end))
        else:  # swap
            pay_dates = _swap_dates(q, swap_accrual)

            def par_gap(log_df_end):
                cand = (q.end, log_df_end)
                pv_fixed = sum(q.rate * swap_accrual * df(T, cand) for T in pay_dates)
                return pv_fixed + df(q.end, cand) - df(q.start, cand)

            lo, hi = math.log(1e-8), 0.0
            if par_gap(lo) * par_gap(hi) > 0.0:
                raise IngestionError(f"swap with end {q.end} cannot be repriced by any discount factor")
            log_df_end = brentq(par_gap, lo, hi, xtol=1e-15, rtol=8.882e-16)
            times.append(q.end)
            logs.append(log_df_end)

    return DiscountCurve(tuple(times), tuple(logs))


def reprice_instrument(curve, q: CurveInstrument, swap_accrual: float = 1.0) -> float:
    """Rate implied by the curve for the instrument (bootstrap check)."""
    tau = q.end - q.start
    if q.kind in ("deposit", "future"):
        return (curve(q.start) / curve(q.end) - 1.0) / tau
    pay_dates = _swap_dates(q, swap_accrual)
    ann = sum(swap_accrual * curve(T) for T in pay_dates)
    return (curve(q.start) - curve(q.end)) / ann


# ---------------------------------------------------------------------------
# cap vol stripping
# ---------------------------------------------------------------------------


def cap_price_from_caplet_vols(points, curve, maturity: float, accrual: float = 0.25,
                               notional: float = 1.0) -> float:
    """Price of the cap to ``maturity`` as the sum of its ATM Black caplets
    (each struck at its own forward) using per-caplet vols from ``points``."""
    vols = {round(p.maturity / accrual): p.vol for p in points}
    total = 0.0
    n = int(round(maturity / accrual))
    for k in range(2, n + 1):  # first caplet fixes today and is omitted
        T = k * accrual
        t = T - accrual
        if k not in vols:
            raise DomainError(f"no caplet vol for payment date {T}")
        F = pr.forward_libor(curve, t, T)
        total += notional * curve(T) * accrual * pr.black(F, F, vols[k] * math.sqrt(t))
    return total


def strip_caplet_vols(cap_vols, curve, accrual: float = 0.25, notional: float = 1.0):
    """Bootstrap a caplet vol term structure from ATM cap vols.

    ``cap_vols`` is a sequence of (maturity, flat_vol) with increasing
    maturities on the accrual grid. Caplet vols are piecewise constant on
    each (previous cap maturity, cap maturity] block and reproduce every cap
    price exactly. Caplets maturing before the first cap maturity take the
    first block's vol (constant extrapolation) and are flagged ``excluded``.
    """
    quotes = sorted((float(m), float(v)) for m, v in cap_vols)
    if not quotes:
        raise IngestionError("no cap vols supplied")
    if any(b[0] - a[0] < 1e-9 for a, b in zip(quotes[:-1], quotes[1:])):
        raise IngestionError(f"cap maturities must increase strictly: {[m for m, _ in quotes]}")

    def cap_price_flat(maturity, vol):
        n = int(round(maturity / accrual))
        total = 0.0
        for k in range(2, n + 1):
            T = k * accrual
            t = T - accrual
            F = pr.forward_libor(curve, t, T)
            total += notional * curve(T) * accrual * pr.black(F, F, vol * math.sqrt(t))
        return total

    points: list[CapletVolPoint] = []
    prev_maturity = accrual  # caplets start at payment date 2 * accrual
    for maturity, flat_vol in quotes:
        n = int(round(maturity / accrual))
        if abs(maturity - n * accrual) > 1e-9:
            raise IngestionError(f"cap maturity {maturity} is not on the {accrual}-year accrual grid")
        target = cap_price_flat(maturity, flat_vol)
        known = sum(
            notional * curve(p.maturity) * accrual
            * pr.black(_fwd(curve, p.maturity, accrual), _fwd(curve, p.maturity, accrual),
                       p.vol * math.sqrt(p.maturity - accrual))
            for p in points
        )
        new_dates = [k * accrual for k in range(2, n + 1) if k * accrual > prev_maturity + 1e-9]
        if not new_dates:
            raise IngestionError(f"cap at {maturity} adds no new caplets")

        def block_gap(vol):
            s = 0.0
            for T in new_dates:
                t = T - accrual
                F = _fwd(curve, T, accrual)
                s += notional * curve(T) * accrual * pr.black(F, F, vol * math.sqrt(t))
            return known + s - target

        lo, hi = 1e-8, 5.0
        if block_gap(lo) > 0.0 or block_gap(hi) < 0.0:
            raise IngestionError(f"caplet stripping failed at cap maturity {maturity}: no vol in [{lo}, {hi}]")
        vol = brentq(block_gap, lo, hi, xtol=1e-14, rtol=8.882e-16)
        for T in new_dates:
            points.append(CapletVolPoint(T, vol, excluded=T < quotes[0][0] - 1e-9))
        prev_maturity = maturity
    return points


def _fwd(curve, T, accrual):
    return pr.forward_libor(curve, T - accrual, T)


# ---------------------------------------------------------------------------
# outlier policy
# ---------------------------------------------------------------------------


def flag_outliers(values, window: int = OUTLIER_WINDOW, iqr_multiple: float = OUTLIER_IQR_MULTIPLE):
    """Indices to keep/drop: a value is dropped when it sits more than
    ``iqr_multiple`` rolling interquartile ranges from the rolling median."""
    vals = np.asarray(list(values), dtype=float)
    n = vals.size
    keep, drop = [], []
    half = max(1, window // 2)
    for i in range(n):
        lo = max(0, i - half)
        hi = min(n, i + half + 1)
        neighbourhood = vals[lo:hi]
        med = float(np.median(neighbourhood))
        q75, q25 = np.percentile(neighbourhood, [75, 25])
        iqr = float(q75 - q25)
        if iqr > 0.0 and abs(vals[i] - med) > iqr_multiple * iqr:
            drop.append(i)
        else:
            keep.append(i)
    return keep, drop


# ---------------------------------------------------------------------------
# snapshot files
# ---------------------------------------------------------------------------

_SCHEMAS = {
    "bonds.csv": ("maturity_years", "clean_price", "duration_years"),
    "yields.csv": ("maturity_years", "zero_yield"),
    "caplet_vols.csv": ("maturity_years", "atm_vol", "excluded"),
    "swaption_vols.csv": ("expiry_years", "tenor_years", "atm_vol"),
}


def _read_rows(path, schema):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != schema:
            raise IngestionError(f"{path}: expected header {','.join(schema)}, got {header}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(schema):
                raise IngestionError(f"{path}:{lineno}: expected {len(schema)} fields, got {len(row)}")
            try:
                rows.append(tuple(float(x) for x in row))
            except ValueError as exc:
                raise IngestionError(f"{path}:{lineno}: {exc}") from None
        return rows


def read_snapshot(directory, drop_outliers: bool = True,
                  iqr_multiple: float = OUTLIER_IQR_MULTIPLE) -> MarketSnapshot:
    """Read one calibration date's snapshot from its directory.

    Missing instrument files are allowed (a snapshot may be bonds-only for
    term fits, or yields+vols for option fits). The outlier filter applies
    per instrument class and logs what it drops.
    """
    directory = os.fspath(directory)
    if not os.path.isdir(directory):
        raise IngestionError(f"snapshot directory {directory} does not exist")
    date = os.path.basename(os.path.normpath(directory))
    data = {}
    for name, schema in _SCHEMAS.items():
        path = os.path.join(directory, name)
        data[name] = _read_rows(path, schema) if os.path.exists(path) else []

    def filtered(name, rows, value_index):
        if not drop_outliers or len(rows) < 3:
            return rows
        keep, drop = flag_outliers([r[value_index] for r in rows], iqr_multiple=iqr_multiple)
        for i in drop:
            logger.warning("%s/%s: dropping outlier row %s", date, name, rows[i])
        return [rows[i] for i in keep]

    bonds = [BondQuote(m, p, d) for m, p, d in filtered("bonds.csv", data["bonds.csv"], 1)]
    yields = [(m, y) for m, y in filtered("yields.csv", data["yields.csv"], 1)]
    caplets = [CapletVolPoint(m, v, bool(e)) for m, v, e in filtered("caplet_vols.csv", data["caplet_vols.csv"], 1)]
    swaptions = [(e, t, v) for e, t, v in filtered("swaption_vols.csv", data["swaption_vols.csv"], 2)]
    return MarketSnapshot(date=date, bonds=tuple(bonds), yields=tuple(yields),
                          caplet_vols=tuple(caplets), swaption_vols=tuple(swaptions))


def write_snapshot(directory, snapshot: MarketSnapshot) -> None:
    os.makedirs(directory, exist_ok=True)

    def write(name, rows):
        with open(os.path.join(directory, name), "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(_SCHEMAS[name])
            for row in rows:
                writer.writerow([repr(float(x)) for x in row])

    if snapshot.bonds:
        write("bonds.csv", [(b.maturity, b.price, b.duration) for b in snapshot.bonds])
    if snapshot.yields:
        write("yields.csv", list(snapshot.yields))
    if snapshot.caplet_vols:
        write("caplet_vols.csv", [(c.maturity, c.vol, 1.0 if c.excluded else 0.0) for c in snapshot.caplet_vols])
    if snapshot.swaption_vols:
        write("swaption_vols.csv", list(snapshot.swaption_vols))


def read_curve_instruments(path) -> list[CurveInstrument]:
    schema = ("kind", "start", "end", "rate")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != schema:
            raise IngestionError(f"{path}: expected header {','.join(schema)}, got {header}")
        out = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                out.append(CurveInstrument(row[0].strip(), float(row[1]), float(row[2]), float(row[3])))
            except (IndexError, ValueError) as exc:
                raise IngestionError(f"{path}:{lineno}: {exc}") from None
        return out


# ---------------------------------------------------------------------------
# synthetic snapshots
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SyntheticConfig:
    """Grids and noise for a generated snapshot. Caplet maturities are
    payment dates; those before ``first_cap_maturity`` are flagged as
    extrapolated (excluded from calibration), mirroring stripped market data."""

    yield_maturities: tuple[float, ...] = (0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 7.0, 10.0, 12.0, 15.0, 20.0)
    caplet_maturities: tuple[float, ...] = (0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 7.0, 10.0)
    swaption_expiries: tuple[float, ...] = (1.0, 2.0, 5.0)
    swaption_tenors: tuple[float, ...] = (1.0, 2.0, 5.0)
    first_cap_maturity: float = 1.0
    noise_sigma: float = 0.0
    conventions: MarketConventions = field(default_factory=MarketConventions)
    include_bonds: bool = True


def synthesize_snapshot(model, config: SyntheticConfig = SyntheticConfig(), seed: int = 0,
                        date: str = "synthetic") -> MarketSnapshot:
    """Snapshot priced off a model, with optional multiplicative noise.

    ``model`` is any built registry model (chaos spec or benchmark). The
    quoted yield grid is widened to cover every caplet and swaption cash-flow
    date, so the curve a consumer interpolates from the snapshot agrees with
    the generating model at all instrument-relevant dates (like a desk curve
    bootstrapped with pillars at the quoted instruments).

    Noise is multiplicative, (1 + sigma * g) with standard normal g, in a
    fixed draw order (deterministic per seed). Vol quotes and bond prices
    take independent draws per quote; the zero-yield curve takes one common
    draw per snapshot (a level shift). Independent per-pillar yield noise
    would make the interpolated forwards, and hence the ATM strikes, swing
    by tens of percent (a quarterly forward differentiates the curve,
    amplifying pillar noise by maturity/accrual), which no arbitrage-free
    model could fit; quote-level noise is meant to perturb prices, not to
    destroy the curve.
    """
    pricer = pricer_for(model)
    conv = config.conventions
    rng = np.random.default_rng(seed)

    def bump(x: float) -> float:
        if config.noise_sigma == 0.0:
            rng.standard_normal()  # keep the draw order identical with/without noise
            return x
        return x * (1.0 + config.noise_sigma * float(rng.standard_normal()))

    curve_factor = 1.0 + config.noise_sigma * float(rng.standard_normal())

    grid = list(config.yield_maturities)
    for T in config.caplet_maturities:
        grid += [T - conv.caplet_accrual, T]
    for expiry in config.swaption_expiries:
        grid.append(expiry)
        for tenor in config.swaption_tenors:
            n_pay = int(round(tenor / conv.swaption_accrual))
            grid += [expiry + conv.swaption_accrual * (i + 1) for i in range(n_pay)]
    grid = sorted(T for T in grid if T > 0.0)
    yield_grid = []
    for T in grid:
        if not yield_grid or T - yield_grid[-1] > 1e-9:
            yield_grid.append(T)

    yields = tuple((T, pricer.zero_yield(T) * curve_factor) for T in yield_grid)

    caplet_vols = []
    for T in config.caplet_maturities:
        t = T - conv.caplet_accrual
        if t <= 0.0:
            raise DomainError(f"caplet maturity {T} does not leave room for the accrual")
        K = pr.atm_caplet_strike(pricer.discount, t, T)
        price = pricer.caplet(t, T, conv.notional, K)
        ann = conv.notional * pricer.discount(T) * (T - t)
        vol = pr.implied_vol(price, K, K, ann, math.sqrt(t))
        caplet_vols.append(CapletVolPoint(T, bump(vol), excluded=T < config.first_cap_maturity - 1e-9))

    swaption_vols = []
    for expiry in config.swaption_expiries:
        for tenor in config.swaption_tenors:
            n_pay = int(round(tenor / conv.swaption_accrual))
            dates = tuple(expiry + conv.swaption_accrual * (i + 1) for i in range(n_pay))
            K = pr.atm_swaption_strike(pricer.discount, expiry, dates)
            sched = pr.SwapSchedule(expiry, dates, conv.notional, K)
            price = pricer.swaption(sched)
            ann = conv.notional * pr.annuity(pricer.discount, expiry, dates)
            vol = pr.implied_vol(price, K, K, ann, math.sqrt(expiry))
            swaption_vols.append((expiry, tenor, bump(vol)))

    bonds = ()
    if config.include_bonds:
        bonds = tuple(
            BondQuote(T, min(bump(pricer.discount(T)), 1.0), T) for T in yield_grid
        )
    return MarketSnapshot(date=date, bonds=bonds, yields=yields,
                          caplet_vols=tuple(caplet_vols), swaption_vols=tuple(swaption_vols))
