"""Command-line front end: synthesize, calibrate, price, report.

Runs are driven by a plain key=value config file plus a few flags; every
command writes into one output directory per run: a copy of the resolved
manifest, per-date long-format CSVs, and aggregate tables whose columns
follow the usual comparison layout (model, N, objective error, per-class
errors, DM against a baseline for term fits, AIC-win frequencies).

All randomness flows from the single manifest seed through a splittable
counter scheme (numpy SeedSequence keyed by date and model indices), so two
runs with the same manifest produce byte-identical CSVs, regardless of how
per-date work is scheduled. Exit codes: 0 success, 2 ingestion failure,
3 optimization failure, 4 pricing failure, 1 anything else.

Config keys (calibrate commands): ``data`` (snapshot root with one
subdirectory per date), ``models`` (comma-separated registry ids),
``objective`` (cpl | swp | joint; calibrate-options), ``starts``, ``seed``,
``baseline`` (term fits; default SV), ``out``, optional ``caplet_accrual``,
``swaption_accrual``, ``polish_top``, ``nm_maxfev``, and optional bounds
overrides ``chaos_b_lo/hi``, ``chaos_c_lo/hi``. The synthesize command
takes ``model``, ``params`` (comma floats) or ``params_file``, ``dates``,
``base_date``, ``noise_sigma``, ``seed``, ``out`` and optional grid
overrides (``yield_maturities``, ``caplet_maturities``,
``swaption_expiries``, ``swaption_tenors``, ``first_cap_maturity``).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import datetime as _dt
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import calibration as cal
from . import marketdata as md
from . import pricing as pr
from . import registry as reg
from .errors import (
    ChaosRatesError, DomainError, IngestionError, OptimizationFailure, PricingError,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INGESTION = 2
EXIT_OPTIMIZATION = 3
EXIT_PRICING = 4


# ---------------------------------------------------------------------------
# config and manifest
# ---------------------------------------------------------------------------


def read_config(path) -> dict[str, str]:
    """key = value lines; '#' starts a comment; later keys win."""
    if not os.path.isfile(path):
        raise IngestionError(f"config file {path} does not exist")
    out: dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise IngestionError(f"{path}:{lineno}: expected 'key = value', got {raw.rstrip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            out[key] = value
    return out


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


@dataclass(frozen=True)
class RunManifest:
    """Resolved inputs of one CLI run; copied into the output directory."""

    command: str
    config_path: str
    data_paths: tuple[str, ...]
    out_dir: str
    seed: int
    model_ids: tuple[str, ...]
    extra: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        for path in self.data_paths:
            if not os.path.exists(path):
                raise IngestionError(f"input path {path} does not exist")
        os.makedirs(self.out_dir, exist_ok=True)
        if not os.access(self.out_dir, os.W_OK):
            raise IngestionError(f"output directory {self.out_dir} is not writable")

    def write(self) -> None:
        lines = [
            f"command = {self.command}",
            f"config = {self.config_path}",
            f"data = {','.join(self.data_paths)}",
            f"seed = {self.seed}",
            f"models = {','.join(self.model_ids)}",
        ]
        lines += [f"{k} = {v}" for k, v in self.extra]
        with open(os.path.join(self.out_dir, "manifest.txt"), "w") as fh:
            fh.write("\n".join(lines) + "\n")


def _date_seed(base_seed: int, *key: int) -> int:
    return int(np.random.SeedSequence(base_seed, spawn_key=tuple(key)).generate_state(1)[0] % (2**31))


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def _snapshot_dates(root) -> list[str]:
    if not os.path.isdir(root):
        raise IngestionError(f"snapshot root {root} does not exist")
    dates = sorted(d for d in os.listdir(root) if os.path.isdir(os.path.join(root, d)))
    if not dates:
        raise IngestionError(f"snapshot root {root} contains no date directories")
    return dates


def _chaos_bounds_override(cfg, defn):
    b_lo = float(cfg.get("chaos_b_lo", reg.CHAOS_B_BOUND[0]))
    b_hi = float(cfg.get("chaos_b_hi", reg.CHAOS_B_BOUND[1]))
    c_lo = float(cfg.get("chaos_c_lo", reg.CHAOS_C_BOUND[0]))
    c_hi = float(cfg.get("chaos_c_hi", reg.CHAOS_C_BOUND[1]))
    if not defn.is_chaos():
        return defn.default_bounds
    return tuple((c_lo, c_hi) if n.startswith("c") else (b_lo, b_hi) for n in defn.param_names)


# ---------------------------------------------------------------------------
# synthesize
# ---------------------------------------------------------------------------


def cmd_synthesize(args) -> int:
    cfg = read_config(args.config)
    model_id = cfg["model"]
    out_dir = args.out or cfg["out"]
    seed = int(args.seed if args.seed is not None else cfg.get("seed", "0"))
    n_dates = int(cfg.get("dates", "1"))
    noise = float(cfg.get("noise_sigma", "0.0"))
    if "params_file" in cfg:
        file_model, theta = reg.load_model_params(cfg["params_file"])
        if file_model != model_id:
            raise IngestionError(f"config model {model_id} != params file model {file_model}")
    else:
        theta = _floats(cfg["params"])
    conv = md.MarketConventions(
        caplet_accrual=float(cfg.get("caplet_accrual", "0.25")),
        swaption_accrual=float(cfg.get("swaption_accrual", "1.0")),
    )
    sc_kwargs = dict(noise_sigma=noise, conventions=conv)
    for key in ("yield_maturities", "caplet_maturities", "swaption_expiries", "swaption_tenors"):
        if key in cfg:
            sc_kwargs[key] = _floats(cfg[key])
    if "first_cap_maturity" in cfg:
        sc_kwargs["first_cap_maturity"] = float(cfg["first_cap_maturity"])
    config = md.SyntheticConfig(**sc_kwargs)

    if model_id == "LFM":
        horizon = max(max(config.caplet_maturities),
                      max(config.swaption_expiries) + max(config.swaption_tenors))
        n_grid = int(round(horizon / conv.caplet_accrual))
        tenor = tuple(conv.caplet_accrual * (i + 1) for i in range(n_grid))
        model = reg.build_model(model_id, theta, tenor=tenor)
    else:
        model = reg.build_model(model_id, theta)

    manifest = RunManifest(
        command="synthesize", config_path=args.config, data_paths=(), out_dir=out_dir,
        seed=seed, model_ids=(model_id,),
        extra=(("dates", str(n_dates)), ("noise_sigma", repr(noise))),
    )
    manifest.write()
    base = _dt.date.fromisoformat(cfg.get("base_date", "2000-09-01"))
    snap_root = os.path.join(out_dir, "snapshots")
    for i in range(n_dates):
        date = (base + _dt.timedelta(days=7 * i)).isoformat()
        snap = md.synthesize_snapshot(model, config, seed=_date_seed(seed, i), date=date)
        md.write_snapshot(os.path.join(snap_root, date), snap)
    print(f"wrote {n_dates} snapshot(s) under {snap_root}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# calibrate-term
# ---------------------------------------------------------------------------


def _term_one_date(root, date, model_ids, starts, seed, date_idx, cfg):
    snap = md.read_snapshot(os.path.join(root, date))
    if not snap.bonds:
        raise IngestionError(f"snapshot {date} has no bond quotes")
    records = []
    for m_idx, model_id in enumerate(model_ids):
        defn = reg.get_model(model_id)
        result = cal.calibrate_term(
            model_id, snap.bonds,
            n_starts=starts, seed=_date_seed(seed, date_idx, m_idx),
            bounds=_chaos_bounds_override(cfg, defn),
            polish_top=int(cfg.get("polish_top", "6")),
            nm_maxfev=int(cfg["nm_maxfev"]) if "nm_maxfev" in cfg else None,
        )
        records.append((date, result))
    return records


def cmd_calibrate_term(args) -> int:
    cfg = read_config(args.config)
    root = cfg["data"]
    out_dir = args.out or cfg["out"]
    seed = int(args.seed if args.seed is not None else cfg.get("seed", "0"))
    starts = int(args.starts or cfg.get("starts", str(cal.DEFAULT_TERM_STARTS)))
    model_ids = tuple((args.models or cfg["models"]).replace(" ", "").split(","))
    baseline = args.baseline or cfg.get("baseline", "SV")
    for model_id in model_ids + (baseline,):
        reg.get_model(model_id)
    if baseline not in model_ids:
        model_ids = (baseline,) + model_ids
    dates = _snapshot_dates(root)
    manifest = RunManifest(
        command="calibrate-term", config_path=args.config, data_paths=(root,),
        out_dir=out_dir, seed=seed, model_ids=model_ids,
        extra=(("starts", str(starts)), ("baseline", baseline)),
    )
    manifest.write()

    all_records = _fan_out(
        _term_one_date, [(root, d, model_ids, starts, seed, i, cfg) for i, d in enumerate(dates)],
        workers=args.workers,
    )

    per_date_rows = []
    by_model: dict[str, list[cal.CalibrationResult]] = {m: [] for m in model_ids}
    for date, result in all_records:
        by_model[result.model_id].append(result)
        base_metrics = [
            ("neg_loglik", result.objective_value), ("rmspe", result.rmspe),
            ("aic", result.aic), ("n_obs", float(result.n_obs)),
            ("n_params", float(result.k_params)), ("start_rank", float(result.start_rank)),
        ]
        for name, value in base_metrics + [(f"param.{n}", v) for n, v in
                                           zip(reg.get_model(result.model_id).param_names, result.theta)]:
            per_date_rows.append((date, result.model_id, name, value))
    _write_csv(os.path.join(out_dir, "term_per_date.csv"),
               ("date", "model", "metric", "value"), per_date_rows)

    base_losses = [r.rmspe**2 for r in by_model[baseline]]
    lag = int(cfg.get("dm_lag", str(cal.DEFAULT_DM_LAG)))
    summary = []
    for model_id in model_ids:
        results = by_model[model_id]
        defn = reg.get_model(model_id)
        avg_nll = sum(r.objective_value for r in results) / len(results)
        avg_rmspe = sum(r.rmspe for r in results) / len(results)
        if model_id == baseline:
            dm_text = "-"
        else:
            losses = [r.rmspe**2 for r in results]
            try:
                dm_text = repr(cal.dm_statistic(losses, base_losses, lag=lag))
            except ChaosRatesError:
                dm_text = "undefined"
        summary.append((model_id, defn.label, defn.n_params, avg_nll, avg_rmspe * 100.0, dm_text))
    _write_csv(os.path.join(out_dir, "term_summary.csv"),
               ("model", "type", "n_params", "avg_neg_loglik", "avg_rmspe_pct", f"dm_vs_{baseline}"),
               summary)

    _write_msrf(os.path.join(out_dir, "msrf.csv"), model_ids, by_model)
    print(f"calibrated {len(model_ids)} model(s) on {len(dates)} date(s); results in {out_dir}")
    return EXIT_OK


def _write_msrf(path, model_ids, by_model) -> None:
    rows = []
    for i, a in enumerate(model_ids):
        for b in model_ids[i + 1:]:
            aic_a = [r.aic for r in by_model[a]]
            aic_b = [r.aic for r in by_model[b]]
            f_a, f_b = cal.msrf(aic_a, aic_b)
            rows.append((a, b, f_a, f_b, len(aic_a)))
    _write_csv(path, ("model_1", "model_2", "msrf_1", "msrf_2", "n_dates"), rows)


def _fan_out(fn, arg_tuples, workers):
    if workers and workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(fn, *args) for args in arg_tuples]
            chunks = [f.result() for f in futures]  # submission order, not completion order
    else:
        chunks = [fn(*args) for args in arg_tuples]
    return [rec for chunk in chunks for rec in chunk]


# ---------------------------------------------------------------------------
# calibrate-options
# ---------------------------------------------------------------------------


def _options_one_date(root, date, model_ids, objective, starts, seed, date_idx, cfg):
    snap = md.read_snapshot(os.path.join(root, date))
    conv = md.MarketConventions(
        caplet_accrual=float(cfg.get("caplet_accrual", "0.25")),
        swaption_accrual=float(cfg.get("swaption_accrual", "1.0")),
    )
    records = []
    for m_idx, model_id in enumerate(model_ids):
        defn = reg.get_model(model_id)
        result = cal.calibrate_options(
            model_id, snap, objective,
            n_starts=starts, seed=_date_seed(seed, date_idx, m_idx),
            bounds=_chaos_bounds_override(cfg, defn), conv=conv,
            polish_top=int(cfg.get("polish_top", "6")),
            nm_maxfev=int(cfg["nm_maxfev"]) if "nm_maxfev" in cfg else None,
        )
        records.append((date, result))
    return records


def cmd_calibrate_options(args) -> int:
    cfg = read_config(args.config)
    objective = args.objective or cfg.get("objective", "joint")
    if objective not in ("cpl", "swp", "joint"):
        raise DomainError(f"objective must be cpl, swp or joint, got {objective!r}")
    root = cfg["data"]
    out_dir = args.out or cfg["out"]
    seed = int(args.seed if args.seed is not None else cfg.get("seed", "0"))
    starts = int(args.starts or cfg.get("starts", "200"))
    model_ids = tuple((args.models or cfg["models"]).replace(" ", "").split(","))
    for model_id in model_ids:
        reg.get_model(model_id)
    dates = _snapshot_dates(root)
    manifest = RunManifest(
        command="calibrate-options", config_path=args.config, data_paths=(root,),
        out_dir=out_dir, seed=seed, model_ids=model_ids,
        extra=(("starts", str(starts)), ("objective", objective)),
    )
    manifest.write()

    all_records = _fan_out(
        _options_one_date,
        [(root, d, model_ids, objective, starts, seed, i, cfg) for i, d in enumerate(dates)],
        workers=args.workers,
    )

    per_date_rows = []
    by_model: dict[str, list[cal.CalibrationResult]] = {m: [] for m in model_ids}
    for date, result in all_records:
        by_model[result.model_id].append(result)
        metrics = [
            ("total_e", result.objective_value), ("yield_e", result.yield_error),
            ("cpl_e", result.caplet_error), ("swp_e", result.swaption_error),
            ("rss", result.rss), ("aic", result.aic), ("n_obs", float(result.n_obs)),
            ("n_params", float(result.k_params)), ("start_rank", float(result.start_rank)),
        ]
        names = reg.get_model(result.model_id).param_names
        metrics += [(f"param.{n}", v) for n, v in zip(names, result.theta)]
        for name, value in metrics:
            if value is not None:
                per_date_rows.append((date, result.model_id, name, value))
    _write_csv(os.path.join(out_dir, "options_per_date.csv"),
               ("date", "model", "metric", "value"), per_date_rows)

    total_col = {"cpl": "total_e1_pct", "swp": "total_e2_pct", "joint": "total_e3_pct"}[objective]
    summary = []
    for model_id in model_ids:
        results = by_model[model_id]
        defn = reg.get_model(model_id)
        avg = lambda vals: (sum(vals) / len(vals)) if all(v is not None for v in vals) else None
        total = avg([r.objective_value for r in results])
        ye = avg([r.yield_error for r in results])
        ce = avg([r.caplet_error for r in results])
        se = avg([r.swaption_error for r in results])
        fmt = lambda v: "-" if v is None else v * 100.0
        summary.append((model_id, defn.label, defn.parameter_count(objective),
                        fmt(total), fmt(ye), fmt(ce), fmt(se)))
    _write_csv(os.path.join(out_dir, "options_summary.csv"),
               ("model", "type", "n_params", total_col, "yield_e_pct", "cpl_e_pct", "swp_e_pct"),
               summary)

    _write_msrf(os.path.join(out_dir, "msrf.csv"), model_ids, by_model)
    print(f"calibrated {len(model_ids)} model(s) on {len(dates)} date(s) [{objective}]; results in {out_dir}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# price
# ---------------------------------------------------------------------------


def cmd_price(args) -> int:
    model_id, theta = reg.load_model_params(args.params)
    if model_id == "LFM":
        accrual = args.accrual or 0.25
        horizon = (args.maturity or 0.0)
        if args.instrument == "swaption":
            horizon = args.expiry + (args.tenor or 0.0)
        n_grid = int(round(horizon / accrual))
        tenor = tuple(accrual * (i + 1) for i in range(n_grid))
        model = reg.build_model(model_id, theta, tenor=tenor)
    else:
        model = reg.build_model(model_id, theta)
    pricer = reg.pricer_for(model)
    out = {"model": model_id, "instrument": args.instrument, "notional": args.notional}

    if args.instrument == "caplet":
        t, T = args.expiry, args.maturity
        if T is None:
            raise DomainError("caplet pricing needs --maturity")
        K = args.strike if args.strike is not None else pr.atm_caplet_strike(pricer.discount, t, T)
        price = pricer.caplet(t, T, args.notional, K)
        ann = args.notional * pricer.discount(T) * (T - t)
        vol = (pr.implied_vol(price, K, pr.forward_libor(pricer.discount, t, T), ann, math.sqrt(t))
               if K > 0.0 else None)  # Black quote undefined at zero strike
        out.update(expiry=t, maturity=T, strike=K, price=price, implied_vol=vol)
    elif args.instrument == "swaption":
        if args.tenor is None:
            raise DomainError("swaption pricing needs --tenor")
        accrual = args.accrual or 1.0
        n_pay = int(round(args.tenor / accrual))
        dates = tuple(args.expiry + accrual * (i + 1) for i in range(n_pay))
        K = args.strike if args.strike is not None else pr.atm_swaption_strike(pricer.discount, args.expiry, dates)
        sched = pr.SwapSchedule(args.expiry, dates, args.notional, K)
        price = pricer.swaption(sched)
        ann = args.notional * pr.annuity(pricer.discount, args.expiry, dates)
        S = pr.swap_rate(pricer.discount, args.expiry, dates)
        vol = pr.implied_vol(price, K, S, ann, math.sqrt(args.expiry)) if K > 0.0 else None
        out.update(expiry=args.expiry, tenor=args.tenor, strike=K, price=price, implied_vol=vol)
    elif args.instrument == "bond_put":
        if args.maturity is None or args.strike is None:
            raise DomainError("bond_put pricing needs --maturity and --strike")
        from . import chaos as ch
        if not isinstance(model, ch.ChaosSpec):
            raise DomainError("bond_put pricing is available for chaos models only")
        out.update(expiry=args.expiry, maturity=args.maturity, strike=args.strike,
                   price=pr.bond_put(model, args.expiry, args.maturity, args.strike))
    else:
        raise DomainError(f"unknown instrument {args.instrument!r}")
    print(json.dumps(out, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------


def cmd_report(args) -> int:
    run_dir = args.run
    if not os.path.isdir(run_dir):
        raise IngestionError(f"run directory {run_dir} does not exist")
    sources = [f for f in ("term_per_date.csv", "options_per_date.csv")
               if os.path.exists(os.path.join(run_dir, f))]
    if not sources:
        raise IngestionError(f"run directory {run_dir} holds no per-date results")
    rows = []
    for name in sources:
        with open(os.path.join(run_dir, name), newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header != ["date", "model", "metric", "value"]:
                raise IngestionError(f"{name}: unexpected header {header}")
            rows.extend((date, model, metric, value) for date, model, metric, value in reader)
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    # flag partial runs: every (model, metric) pair should cover every date
    dates = sorted({r[0] for r in rows})
    combos = sorted({(r[1], r[2]) for r in rows})
    missing = [(m, k) for (m, k) in combos
               if len({r[0] for r in rows if r[1] == m and r[2] == k}) != len(dates)]
    if missing:
        print(f"warning: partial run; {len(missing)} model/metric series do not cover all dates",
              file=sys.stderr)
    out_path = args.out or os.path.join(run_dir, "report.csv")
    _write_csv(out_path, ("date", "model", "metric", "value"), rows)
    print(f"wrote {out_path} ({len(rows)} rows across {len(dates)} date(s))")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chaosrates",
        description="Chaos interest-rate models: synthetic data, calibration, pricing, reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    syn = sub.add_parser("synthesize", help="generate synthetic market snapshots from a model")
    syn.add_argument("--config", required=True)
    syn.add_argument("--out")
    syn.add_argument("--seed", type=int)
    syn.set_defaults(func=cmd_synthesize)

    term = sub.add_parser("calibrate-term", help="Cairns MLE term-structure calibration")
    term.add_argument("--config", required=True)
    term.add_argument("--models")
    term.add_argument("--starts", type=int)
    term.add_argument("--seed", type=int)
    term.add_argument("--baseline")
    term.add_argument("--out")
    term.add_argument("--workers", type=int, default=1)
    term.set_defaults(func=cmd_calibrate_term)

    opt = sub.add_parser("calibrate-options", help="yield/option least-squares calibration")
    opt.add_argument("--config", required=True)
    opt.add_argument("--models")
    opt.add_argument("--objective", choices=("cpl", "swp", "joint"))
    opt.add_argument("--starts", type=int)
    opt.add_argument("--seed", type=int)
    opt.add_argument("--out")
    opt.add_argument("--workers", type=int, default=1)
    opt.set_defaults(func=cmd_calibrate_options)

    price = sub.add_parser("price", help="price one instrument from a parameter file")
    price.add_argument("--params", required=True)
    price.add_argument("--instrument", required=True, choices=("caplet", "swaption", "bond_put"))
    price.add_argument("--expiry", type=float, required=True)
    price.add_argument("--maturity", type=float)
    price.add_argument("--tenor", type=float)
    price.add_argument("--strike", type=float)
    price.add_argument("--notional", type=float, default=1.0)
    price.add_argument("--accrual", type=float)
    price.set_defaults(func=cmd_price)

    rep = sub.add_parser("report", help="aggregate a run directory into plot-ready CSV")
    rep.add_argument("--run", required=True)
    rep.add_argument("--out")
    rep.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except IngestionError as exc:
        print(f"ingestion error: {exc}", file=sys.stderr)
        return EXIT_INGESTION
    except OptimizationFailure as exc:
        print(f"optimization failure: {exc}", file=sys.stderr)
        return EXIT_OPTIMIZATION
    except PricingError as exc:
        print(f"pricing error: {exc}", file=sys.stderr)
        return EXIT_PRICING
    except ChaosRatesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
