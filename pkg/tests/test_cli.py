import csv
import json
import os

import pytest

from chaosrates import cli
from chaosrates import registry as reg
from chaosrates.errors import PricingError

from conftest import B4_THETA

A1_THETA = (0.2, 0.002, 0.02)


def _write(path, text):
    with open(path, "w") as fh:
        fh.write(text)


def _synth_config(tmp_path, model_id, params, dates=2, noise=0.0, extra=""):
    out = tmp_path / "data"
    cfg = tmp_path / "synth.cfg"
    _write(cfg, f"""
model = {model_id}
params = {','.join(repr(p) for p in params)}
dates = {dates}
noise_sigma = {noise}
out = {out}
{extra}
""")
    return cfg, out


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestSynthesize:
    def test_writes_dated_snapshots(self, tmp_path):
        cfg, out = _synth_config(tmp_path, "B4", B4_THETA, dates=3)
        assert cli.main(["synthesize", "--config", str(cfg), "--seed", "5"]) == 0
        dates = sorted(os.listdir(out / "snapshots"))
        assert dates == ["2000-09-01", "2000-09-08", "2000-09-15"]
        assert (out / "manifest.txt").exists()

    def test_missing_config_is_ingestion_error(self, tmp_path):
        assert cli.main(["synthesize", "--config", str(tmp_path / "nope.cfg")]) == 2


@pytest.fixture(scope="module")
def term_run(tmp_path_factory):
        tmp_path = tmp_path_factory.mktemp("term")
        # a first-chaos generator is deterministic: no option quotes to synthesize
        cfg, out = _synth_config(tmp_path, "A1", A1_THETA, dates=2, noise=0.0003,
                                 extra="caplet_maturities =\nswaption_expiries =\nswaption_tenors =\n")
        assert cli.main(["synthesize", "--config", str(cfg), "--seed", "5"]) == 0
        run_out = tmp_path / "run"
        run_cfg = tmp_path / "term.cfg"
        _write(run_cfg, f"""
data = {out / 'snapshots'}
models = A1
starts = 32
seed = 9
out = {run_out}
chaos_b_lo = -1
chaos_b_hi = 1
chaos_c_lo = 0.01
chaos_c_hi = 0.6
""")
        assert cli.main(["calibrate-term", "--config", str(run_cfg)]) == 0
        return run_out


class TestCalibrateTerm:
    def test_baseline_defaults_to_svensson(self, term_run):
        run = term_run
        rows = _read_csv(run / "term_summary.csv")
        assert rows[0][-1] == "dm_vs_SV"
        assert rows[1][0] == "SV" and rows[1][-1] == "-"

    def test_chaos_model_fits_noisy_data(self, term_run):
        run = term_run
        rows = {r[0]: r for r in _read_csv(run / "term_summary.csv")[1:]}
        rmspe_pct = float(rows["A1"][4])
        assert rmspe_pct < 1.0  # percent

    def test_msrf_emitted_for_model_pair(self, term_run):
        run = term_run
        rows = _read_csv(run / "msrf.csv")
        assert rows[0] == ["model_1", "model_2", "msrf_1", "msrf_2", "n_dates"]
        assert len(rows) == 2  # one unordered pair (SV, A1)
        assert float(rows[1][2]) + float(rows[1][3]) == pytest.approx(1.0)

    def test_per_date_long_format(self, term_run):
        run = term_run
        rows = _read_csv(run / "term_per_date.csv")
        assert rows[0] == ["date", "model", "metric", "value"]
        dates = {r[0] for r in rows[1:]}
        assert dates == {"2000-09-01", "2000-09-08"}
        metrics = {r[2] for r in rows[1:] if r[1] == "A1"}
        assert {"neg_loglik", "rmspe", "aic", "param.b1"} <= metrics

    def test_report_aggregates_run(self, term_run):
        run = term_run
        out_file = run / "report.csv"
        assert cli.main(["report", "--run", str(run), "--out", str(out_file)]) == 0
        rows = _read_csv(out_file)
        assert rows[0] == ["date", "model", "metric", "value"]
        dates = [r[0] for r in rows[1:]]
        assert dates == sorted(dates)

    def test_report_on_empty_dir(self, tmp_path):
        empty = tmp_path / "empty"
        os.makedirs(empty)
        assert cli.main(["report", "--run", str(empty)]) == 2


class TestCalibrateOptionsNoiseless:
    def test_joint_on_synthetic_b1(self, tmp_path):
        theta = (0.1, 0.01, 0.02, 0.004, 0.05, 0.06)
        cfg, out = _synth_config(
            tmp_path, "B1", theta, dates=1,
            extra="caplet_maturities = 0.5,0.75,1.0,2.0,3.0,5.0\nswaption_expiries = 1.0,2.0\nswaption_tenors = 1.0,2.0\n",
        )
        assert cli.main(["synthesize", "--config", str(cfg), "--seed", "2"]) == 0
        run_out = tmp_path / "run"
        run_cfg = tmp_path / "opt.cfg"
        _write(run_cfg, f"""
data = {out / 'snapshots'}
models = B1
objective = joint
starts = 32
seed = 3
out = {run_out}
chaos_b_lo = -1
chaos_b_hi = 1
chaos_c_lo = 0.01
chaos_c_hi = 0.6
""")
        assert cli.main(["calibrate-options", "--config", str(run_cfg)]) == 0
        rows = _read_csv(run_out / "options_summary.csv")
        assert rows[0][3] == "total_e3_pct"
        total_pct = float(rows[1][3])
        assert total_pct < 1e-3  # TotalE3 ~ 0 on noiseless self-generated data
        per_date = _read_csv(run_out / "options_per_date.csv")
        metrics = {r[2] for r in per_date[1:]}
        assert {"total_e", "yield_e", "cpl_e", "swp_e", "aic"} <= metrics

    def test_missing_snapshot_root(self, tmp_path):
        run_cfg = tmp_path / "opt.cfg"
        _write(run_cfg, f"data = {tmp_path / 'missing'}\nmodels = B1\nout = {tmp_path / 'o'}\n")
        assert cli.main(["calibrate-options", "--config", str(run_cfg)]) == 2


class TestPrice:
    def _params_file(self, tmp_path, model_id, theta):
        path = tmp_path / f"{model_id}.params"
        reg.save_model_params(path, model_id, theta)
        return path

    def test_deterministic_caplet_is_intrinsic(self, tmp_path, capsys):
        path = self._params_file(tmp_path, "A1", A1_THETA)
        code = cli.main(["price", "--params", str(path), "--instrument", "caplet",
                         "--expiry", "1.0", "--maturity", "1.25", "--strike", "0.02"])
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        spec = reg.get_model("A1").build(A1_THETA)
        from chaosrates import caplet
        assert out["price"] == pytest.approx(caplet(spec, 1.0, 1.25, 1.0, 0.02), rel=1e-12)

    def test_atm_b4_swaption_matches_quadrature_oracle(self, tmp_path, capsys):
        from oracles import chaos_swaption_oracle
        from chaosrates.pricing import SwapSchedule, atm_swaption_strike
        from chaosrates import discount_factor

        path = self._params_file(tmp_path, "B4", B4_THETA)
        code = cli.main(["price", "--params", str(path), "--instrument", "swaption",
                         "--expiry", "1.0", "--tenor", "2.0"])
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        spec = reg.get_model("B4").build(B4_THETA)
        curve = lambda T: discount_factor(spec, T)
        K = atm_swaption_strike(curve, 1.0, (2.0, 3.0))
        sched = SwapSchedule(1.0, (2.0, 3.0), 1.0, K)
        assert out["strike"] == pytest.approx(K, rel=1e-12)
        assert out["price"] == pytest.approx(chaos_swaption_oracle(spec, sched), rel=1e-7)
        assert out["implied_vol"] > 0.0

    def test_zero_strike_swaption_is_curve_difference(self, tmp_path, capsys):
        from chaosrates import discount_factor

        path = self._params_file(tmp_path, "B4", B4_THETA)
        code = cli.main(["price", "--params", str(path), "--instrument", "swaption",
                         "--expiry", "1.0", "--tenor", "2.0", "--strike", "0.0"])
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        spec = reg.get_model("B4").build(B4_THETA)
        expected = discount_factor(spec, 1.0) - discount_factor(spec, 3.0)
        assert out["price"] == pytest.approx(expected, rel=1e-12)
        assert out["implied_vol"] is None  # Black quote undefined at zero strike

    def test_bond_put(self, tmp_path, capsys):
        from chaosrates import bond_put

        path = self._params_file(tmp_path, "B4", B4_THETA)
        code = cli.main(["price", "--params", str(path), "--instrument", "bond_put",
                         "--expiry", "1.0", "--maturity", "2.0", "--strike", "0.97"])
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        spec = reg.get_model("B4").build(B4_THETA)
        assert out["price"] == pytest.approx(bond_put(spec, 1.0, 2.0, 0.97), rel=1e-12)

    def test_pricing_error_exit_code(self, tmp_path, monkeypatch, capsys):
        path = self._params_file(tmp_path, "A1", A1_THETA)

        def boom(args):
            raise PricingError("band violated")

        monkeypatch.setattr(cli, "cmd_price", boom)
        code = cli.main(["price", "--params", str(path), "--instrument", "caplet", "--expiry", "1.0"])
        assert code == 4
        assert "band violated" in capsys.readouterr().err


class TestDeterminism:
    def test_repeat_run_byte_identical(self, tmp_path):
        theta = (0.1, 0.01, 0.02, 0.004, 0.05, 0.06)

        def one_run(tag):
            base = tmp_path / tag
            os.makedirs(base)
            cfg, out = _synth_config(
                base, "B1", theta, dates=2, noise=0.005,
                extra="caplet_maturities = 0.5,0.75,1.0,2.0,3.0\nswaption_expiries = 1.0\nswaption_tenors = 1.0,2.0\n",
            )
            assert cli.main(["synthesize", "--config", str(cfg), "--seed", "7"]) == 0
            run_out = base / "run"
            run_cfg = base / "opt.cfg"
            _write(run_cfg, f"""
data = {out / 'snapshots'}
models = B1
objective = cpl
starts = 6
seed = 13
out = {run_out}
chaos_b_lo = -1
chaos_b_hi = 1
chaos_c_lo = 0.01
chaos_c_hi = 0.6
""")
            assert cli.main(["calibrate-options", "--config", str(run_cfg)]) == 0
            payload = {}
            for name in ("options_summary.csv", "options_per_date.csv", "msrf.csv"):
                payload[name] = (run_out / name).read_bytes()
            for date in sorted(os.listdir(out / "snapshots")):
                for f in sorted(os.listdir(out / "snapshots" / date)):
                    payload[f"{date}/{f}"] = (out / "snapshots" / date / f).read_bytes()
            return payload

        assert one_run("a") == one_run("b")
