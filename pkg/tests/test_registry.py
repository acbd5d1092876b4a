import math

import numpy as np
import pytest

from chaosrates import ChaosOrder, discount_factor
from chaosrates.benchmarks import HullWhiteParams, LfmParams, RatLogParams, SvenssonParams
from chaosrates.chaos import ChaosSpec, build_psi
from chaosrates.errors import DomainError, SpecificationError
from chaosrates.pricing import SwapSchedule
from chaosrates.registry import (
    build_lfm, build_model, canonicalize, get_model, load_model_params, option_model_ids,
    pricer_for, registry, save_model_params, term_structure_ids,
)

from conftest import B4_THETA

EXPECTED_COUNTS = {
    "NS": 4, "SV": 6,
    "A1": 3, "A2": 5, "A3": 6, "A4": 7, "A5": 7, "A6": 6, "A7": 6,
    "A8": 6, "A9": 7, "A10": 7, "A11": 6, "A12": 7, "A13": 7, "A14": 7,
    "B1": 6, "B2": 7, "B3": 6, "B4": 6, "B5": 7, "B6": 9,
    "HW": 8, "RATLOG": 9, "LFM": 13,
}


class TestCatalogue:
    def test_every_model_present_with_expected_count(self):
        reg = registry()
        assert set(reg) == set(EXPECTED_COUNTS)
        for model_id, n in EXPECTED_COUNTS.items():
            assert reg[model_id].n_params == n, model_id

    def test_a1_has_three_parameters(self):
        assert get_model("A1").n_params == 3

    def test_b6_has_nine_parameters(self):
        assert get_model("B6").n_params == 9

    def test_lfm_objective_dependent_count(self):
        defn = get_model("LFM")
        assert defn.parameter_count("joint") == 13
        assert defn.parameter_count("swp") == 13
        assert defn.parameter_count("cpl") == 10

    def test_unknown_id_rejected(self):
        with pytest.raises(DomainError):
            get_model("Z9")

    def test_id_lists(self):
        assert term_structure_ids()[0] == "SV"
        assert set(option_model_ids()) == {"B1", "B2", "B3", "B4", "B5", "B6", "HW", "RATLOG", "LFM"}

    def test_parameter_names_order_bs_before_cs(self):
        for model_id in [f"A{i}" for i in range(1, 15)] + [f"B{i}" for i in range(1, 7)]:
            names = get_model(model_id).param_names
            split = [n[0] for n in names]
            assert split == sorted(split)  # all b's then all c's


class TestBuilders:
    def _mid_theta(self, defn):
        return [0.5 * (lo + hi) if name.startswith("c") else 0.3
                for name, (lo, hi) in zip(defn.param_names, defn.default_bounds)]

    def test_chaos_builders_produce_expected_orders(self):
        kinds = {
            "A1": ChaosOrder.FIRST, "A2": ChaosOrder.FIRST,
            "A3": ChaosOrder.SECOND_ONE_VAR, "A4": ChaosOrder.SECOND_ONE_VAR,
            "A5": ChaosOrder.SECOND_ONE_VAR, "A6": ChaosOrder.SECOND_FACTORIZABLE,
            "A7": ChaosOrder.SECOND_FACTORIZABLE, "A8": ChaosOrder.SECOND_FACTORIZABLE,
            "A9": ChaosOrder.SECOND_FACTORIZABLE, "A10": ChaosOrder.SECOND_FACTORIZABLE,
            "A11": ChaosOrder.THIRD_ONE_VAR, "A12": ChaosOrder.THIRD_ONE_VAR,
            "A13": ChaosOrder.THIRD_ONE_VAR, "A14": ChaosOrder.THIRD_ONE_VAR,
            "B1": ChaosOrder.SECOND_ONE_VAR, "B2": ChaosOrder.SECOND_ONE_VAR,
            "B3": ChaosOrder.SECOND_FACTORIZABLE, "B4": ChaosOrder.THIRD_ONE_VAR,
            "B5": ChaosOrder.THIRD_ONE_VAR, "B6": ChaosOrder.THIRD_ONE_VAR,
        }
        for model_id, order in kinds.items():
            defn = get_model(model_id)
            spec = defn.build(self._mid_theta(defn))
            assert isinstance(spec, ChaosSpec)
            assert spec.order is order
            assert spec.registry_id == model_id

    def test_a6_gamma_constant_shift(self):
        spec = get_model("A6").build((0.3, 0.2, 0.25, 1.0, 1.0, 0.8))
        assert spec.gamma(0.0) == pytest.approx(1.0 + 0.25, rel=1e-15)

    def test_a9_gamma_linear_shift(self):
        spec = get_model("A9").build((0.3, 0.2, 0.1, 0.25, 1.0, 1.0, 0.8))
        assert spec.gamma(0.0) == pytest.approx(1.0, rel=1e-15)
        assert spec.gamma(2.0) == pytest.approx((1.0 + 0.25 * 2.0) * math.exp(-0.8 * 2.0), rel=1e-14)

    def test_benchmark_builders(self):
        sv_theta = (0.035, -0.01, 0.015, 0.008, 0.7, 0.3)
        hw = get_model("HW").build(sv_theta + (0.1, 0.01))
        assert isinstance(hw, HullWhiteParams)
        rl = get_model("RATLOG").build(sv_theta + (0.5, 1.0, 0.2))
        assert isinstance(rl, RatLogParams)
        assert isinstance(hw.svensson, SvenssonParams)

    def test_lfm_requires_tenor(self):
        defn = get_model("LFM")
        with pytest.raises(SpecificationError):
            defn.build([0.0] * 13)
        tenor = tuple(0.25 * (i + 1) for i in range(20))
        theta = (0.035, -0.01, 0.015, 0.008, 0.7, 0.3, 0.1, 0.05, 0.02, 1.0, 0.6, 0.05, 0.1)
        model = build_model("LFM", theta, tenor=tenor)
        assert isinstance(model, LfmParams)
        ten_param = build_lfm(theta[:10], tenor)
        assert ten_param.corr is None

    def test_wrong_parameter_count_rejected(self):
        with pytest.raises(SpecificationError):
            get_model("B4").build((1.0, 2.0))


class TestCanonicalize:
    def test_unit_state_price_and_positive_lead(self):
        theta = canonicalize("B4", (-0.3, 0.1, 0.05, 0.5, 0.6, 0.4))
        spec = get_model("B4").build(theta)
        assert build_psi(spec).total_integral() == pytest.approx(1.0, rel=1e-12)
        assert theta[0] > 0.0

    def test_prices_unchanged(self, b4_spec):
        theta_c = canonicalize("B4", B4_THETA)
        spec_c = get_model("B4").build(theta_c)
        for T in (0.5, 2.0, 10.0):
            assert discount_factor(spec_c, T) == pytest.approx(discount_factor(b4_spec, T), rel=1e-12)

    def test_idempotent(self):
        once = canonicalize("B4", B4_THETA)
        again = canonicalize("B4", once)
        assert np.allclose(once, again, rtol=1e-14)

    def test_gamma_parameters_not_rescaled(self):
        theta = (0.3, 0.2, 0.25, 1.0, 1.0, 0.8)
        canonical = canonicalize("A6", theta)
        assert canonical[2] == theta[2]  # b3 lives inside gamma
        spec = get_model("A6").build(canonical)
        assert build_psi(spec).total_integral() == pytest.approx(1.0, rel=1e-12)

    def test_non_chaos_passthrough(self):
        theta = (0.035, -0.01, 0.015, 0.008, 0.7, 0.3)
        assert canonicalize("SV", theta) == theta


class TestParameterFiles:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "b4.params"
        save_model_params(path, "B4", B4_THETA)
        model_id, theta = load_model_params(path)
        assert model_id == "B4"
        assert theta == pytest.approx(B4_THETA, rel=1e-16)

    def test_named_order_matches_definition(self, tmp_path):
        path = tmp_path / "a3.params"
        save_model_params(path, "A3", (0.1, 0.2, 0.3, 0.4, 0.9, 1.1))
        text = path.read_text()
        assert text.splitlines()[0] == "model = A3"
        assert [line.split(" =")[0] for line in text.splitlines()[1:]] == list(get_model("A3").param_names)

    def test_missing_parameter_rejected(self, tmp_path):
        path = tmp_path / "bad.params"
        path.write_text("model = B4\nb1 = 0.1\n")
        with pytest.raises(DomainError):
            load_model_params(path)

    def test_malformed_line_rejected(self, tmp_path):
        path = tmp_path / "bad.params"
        path.write_text("model = B4\nnot a pair\n")
        with pytest.raises(DomainError):
            load_model_params(path)

    def test_lfm_partial_parameter_file(self, tmp_path):
        path = tmp_path / "lfm.params"
        theta10 = (0.035, -0.01, 0.015, 0.008, 0.7, 0.3, 0.1, 0.05, 0.02, 1.0)
        save_model_params(path, "LFM", theta10)
        model_id, theta = load_model_params(path)
        assert model_id == "LFM" and theta == pytest.approx(theta10)


class TestPricerDispatch:
    def test_chaos_pricer(self, b4_spec):
        p = pricer_for(b4_spec)
        assert p.discount(1.0) == pytest.approx(discount_factor(b4_spec, 1.0), rel=1e-15)
        assert not p.vol_space
        assert p.caplet(1.0, 1.25, 1.0, 0.03) > 0.0
        assert p.swaption(SwapSchedule(1.0, (2.0,), 1.0, 0.03)) > 0.0

    def test_descriptive_models_have_no_option_pricing(self):
        sv = get_model("SV").build((0.035, -0.01, 0.015, 0.008, 0.7, 0.3))
        p = pricer_for(sv)
        assert p.zero_yield(2.0) > 0.0
        with pytest.raises(DomainError):
            p.caplet(1.0, 1.25, 1.0, 0.03)
        with pytest.raises(DomainError):
            p.swaption(SwapSchedule(1.0, (2.0,), 1.0, 0.03))

    def test_lfm_pricer_is_vol_space(self):
        tenor = tuple(0.25 * (i + 1) for i in range(20))
        theta = (0.035, -0.01, 0.015, 0.008, 0.7, 0.3, 0.1, 0.05, 0.02, 1.0, 0.6, 0.05, 0.1)
        p = pricer_for(build_model("LFM", theta, tenor=tenor))
        assert p.vol_space
        assert p.caplet_vol(1.0, 1.25) > 0.0
        assert p.swaption_vol(SwapSchedule(1.0, (2.0,), 1.0, 0.03)) > 0.0
        with pytest.raises(DomainError):
            p.caplet_vol(1.1, 1.25)  # off the tenor grid
