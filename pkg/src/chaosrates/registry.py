"""Registry of every calibratable model, with parameter layouts and bounds.

Term-structure forms: the descriptive Nelson-Siegel (NS) and Svensson (SV)
forward curves, and chaos models A1-A14 (two first-chaos forms, three
one-variable second, five factorizable second, four one-variable third).
Option-calibration chaos forms B1-B6 (two one-variable second, one
factorizable second, three one-variable third, up to nine parameters).
Benchmarks: Hull-White (HW, Svensson curve + kappa, eta = 8 parameters),
rational lognormal (RATLOG, Svensson + k1, k2, eta = 9), and the lognormal
forward-LIBOR market model (LFM, Svensson + 4 vol + 3 correlation = 13, of
which the 3 correlation parameters are unused when only caplets are fitted,
leaving 10).

Every entry fixes the parameter order as the named list (b1..bn, c1..cn)
used by the plain-text parameter files, the default multi-start search box,
and the gauge data for chaos models (prices are invariant under jointly
scaling the b-parameters of alpha/beta/delta and under a global sign flip;
``canonicalize`` rescales so Z_00 = 1 with the first such parameter
positive).

``pricer_for`` wraps any built model in a uniform discount/caplet/swaption
interface used by the synthetic generator and the calibration objectives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from . import benchmarks as bm
from . import chaos as ch
from . import pricing as pr
from .errors import DomainError, SpecificationError
from .exppoly import ExpPoly

CHAOS_B_BOUND = (-5.0, 5.0)
CHAOS_C_BOUND = (0.01, 5.0)
CURVE_LEVEL_BOUND = (1e-4, 0.2)
CURVE_SHAPE_BOUND = (-0.2, 0.2)


@dataclass(frozen=True)
class ModelDefinition:
    model_id: str
    kind: str
    label: str
    param_names: tuple[str, ...]
    default_bounds: tuple[tuple[float, float], ...]
    builder: Callable = field(repr=False)
    scale_param_indices: tuple[int, ...] = ()
    sign_param_index: int | None = None

    @property
    def n_params(self) -> int:
        return len(self.param_names)

    def parameter_count(self, objective: str | None = None) -> int:
        """Parameter count as reported in result tables. The LFM drops its
        three correlation parameters under the caplet-only objective."""
        if self.model_id == "LFM" and objective == "cpl":
            return self.n_params - 3
        return self.n_params

    def build(self, theta):
        if self.builder is None:
            raise SpecificationError(f"{self.model_id} needs extra context to build; use build_model()")
        theta = tuple(float(x) for x in theta)
        if len(theta) != self.n_params:
            raise SpecificationError(
                f"{self.model_id} takes {self.n_params} parameters {self.param_names}, got {len(theta)}"
            )
        return self.builder(dict(zip(self.param_names, theta)))

    def is_chaos(self) -> bool:
        return self.kind in ("first", "second_one_var", "second_factorizable", "third_one_var")


def _ep(*terms) -> ExpPoly:
    return ExpPoly(terms)


def _chaos_builder(order, alpha_fn, beta_fn=None, gamma_fn=None, delta_fn=None, model_id=None):
    def build(p):
        return ch.ChaosSpec(
            order,
            alpha=alpha_fn(p),
            beta=beta_fn(p) if beta_fn else None,
            gamma=gamma_fn(p) if gamma_fn else None,
            delta=delta_fn(p) if delta_fn else None,
            registry_id=model_id,
        )
    return build


def _bounds(names):
    return tuple(CHAOS_C_BOUND if n.startswith("c") else CHAOS_B_BOUND for n in names)


def _chaos_def(model_id, kind, label, names, alpha, beta=None, gamma=None, delta=None, scale=None):
    order = {
        "first": ch.ChaosOrder.FIRST,
        "second_one_var": ch.ChaosOrder.SECOND_ONE_VAR,
        "second_factorizable": ch.ChaosOrder.SECOND_FACTORIZABLE,
        "third_one_var": ch.ChaosOrder.THIRD_ONE_VAR,
    }[kind]
    names = tuple(names)
    if scale is None:
        scale = tuple(i for i, n in enumerate(names) if n.startswith("b"))
    return ModelDefinition(
        model_id=model_id,
        kind=kind,
        label=label,
        param_names=names,
        default_bounds=_bounds(names),
        builder=_chaos_builder(order, alpha, beta, gamma, delta, model_id),
        scale_param_indices=tuple(scale),
        sign_param_index=scale[0] if scale else None,
    )


_FIRST = "1st chaos"
_SEC1 = "one-var 2nd chaos"
_SECF = "factorizable 2nd chaos"
_THIRD = "one-var 3rd chaos"


def _build_registry() -> dict[str, ModelDefinition]:
    defs: list[ModelDefinition] = []

    defs.append(ModelDefinition(
        model_id="NS", kind="nelson_siegel", label="Nelson-Siegel",
        param_names=("b0", "b1", "b2", "c1"),
        default_bounds=(CURVE_LEVEL_BOUND, CURVE_SHAPE_BOUND, CURVE_SHAPE_BOUND, CHAOS_C_BOUND),
        builder=lambda p: bm.SvenssonParams(p["b0"], p["b1"], p["b2"], 0.0, p["c1"], 1.0),
    ))
    defs.append(ModelDefinition(
        model_id="SV", kind="svensson", label="Svensson",
        param_names=("b0", "b1", "b2", "b3", "c1", "c2"),
        default_bounds=(CURVE_LEVEL_BOUND, CURVE_SHAPE_BOUND, CURVE_SHAPE_BOUND, CURVE_SHAPE_BOUND,
                        CHAOS_C_BOUND, CHAOS_C_BOUND),
        builder=lambda p: bm.SvenssonParams(p["b0"], p["b1"], p["b2"], p["b3"], p["c1"], p["c2"]),
    ))

    # first chaos
    defs.append(_chaos_def("A1", "first", _FIRST, ("b1", "b2", "c1"),
                           alpha=lambda p: _ep(((p["b1"], p["b2"]), p["c1"]))))
    defs.append(_chaos_def("A2", "first", _FIRST, ("b1", "b2", "b3", "c1", "c2"),
                           alpha=lambda p: _ep(((p["b1"], p["b2"]), p["c1"]), ((0.0, p["b3"]), p["c2"]))))
    # one-variable second chaos
    defs.append(_chaos_def("A3", "second_one_var", _SEC1, ("b1", "b2", "b3", "b4", "c1", "c2"),
                           alpha=lambda p: _ep(((p["b1"], p["b2"]), p["c1"])),
                           beta=lambda p: _ep(((p["b3"], p["b4"]), p["c2"]))))
    defs.append(_chaos_def("A4", "second_one_var", _SEC1, ("b1", "b2", "b3", "b4", "c1", "c2", "c3"),
                           alpha=lambda p: _ep(((p["b1"],), p["c1"])),
                           beta=lambda p: _ep(((p["b2"], p["b3"]), p["c2"]), ((0.0, p["b4"]), p["c3"]))))
    defs.append(_chaos_def("A5", "second_one_var", _SEC1, ("b1", "b2", "b3", "b4", "c1", "c2", "c3"),
                           alpha=lambda p: _ep(((p["b1"], p["b2"]), p["c1"]), ((0.0, p["b3"]), p["c2"])),
                           beta=lambda p: _ep(((0.0, p["b4"]), p["c3"]))))
    # factorizable second chaos
    defs.append(_chaos_def("A6", "second_factorizable", _SECF, ("b1", "b2", "b3", "c1", "c2", "c3"),
                           alpha=lambda p: _ep(((p["b1"],), p["c1"])),
                           beta=lambda p: _ep(((p["b2"],), p["c2"])),
                           # the printed form is (1 + b3) e^{-c3 s}, kept verbatim
                           gamma=lambda p: _ep(((1.0 + p["b3"],), p["c3"])),
                           scale=(0, 1)))
    defs.append(_chaos_def("A7", "second_factorizable", _SECF, ("b1", "b2", "b3", "c1", "c2", "c3"),
                           alpha=lambda p: _ep(((p["b1"],), p["c1"])),
                           beta=lambda p: _ep(((p["b2"], p["b3"]), p["c2"])),
                           gamma=lambda p: _ep(((1.0,), p["c3"])),
                           scale=(0, 1, 2)))
    defs.append(_chaos_def("A8", "second_factorizable", _SECF, ("b1", "b2", "b3", "c1", "c2", "c3"),
                           alpha=lambda p: _ep(((p["b1"], p["b2"]), p["c1"])),
                           beta=lambda p: _ep(((p["b3"],), p["c2"])),
                           gamma=lambda p: _ep(((1.0,), p["c3"])),
                           scale=(0, 1, 2)))
    defs.append(_chaos_def("A9", "second_factorizable", _SECF, ("b1", "b2", "b3", "b4", "c1", "c2", "c3"),
                           alpha=lambda p: _ep(((p["b1"],), p["c1"])),
                           beta=lambda p: _ep(((p["b2"], p["b3"]), p["c2"])),
                           gamma=lambda p: _ep(((1.0, p["b4"]), p["c3"])),
                           scale=(0, 1, 2)))
    defs.append(_chaos_def("A10", "second_factorizable", _SECF, ("b1", "b2", "b3", "b4", "c1", "c2", "c3"),
                           alpha=lambda p: _ep(((p["b1"], p["b2"]), p["c1"])),
                           beta=lambda p: _ep(((p["b3"],), p["c2"])),
                           gamma=lambda p: _ep(((1.0, p["b4"]), p["c3"])),
                           scale=(0, 1, 2)))
    # one-variable third chaos
    defs.append(_chaos_def("A11", "third_one_var", _THIRD, ("b1", "b2", "b3", "c1", "c2", "c3"),
                           alpha=lambda p: _ep(((p["b1"],), p["c1"])),
                           beta=lambda p: _ep(((p["b2"],), p["c2"])),
                           delta=lambda p: _ep(((p["b3"],), p["c3"]))))
    defs.append(_chaos_def("A12", "third_one_var", _THIRD, ("b1", "b2", "b3", "b4", "c1", "c2", "c3"),
                           alpha=lambda p: _ep(((p["b1"],), p["c1"])),
                           beta=lambda p: _ep(((p["b2"],), p["c2"])),
                           delta=lambda p: _ep(((p["b3"], p["b4"]), p["c3"]))))
    defs.append(_chaos_def("A13", "third_one_var", _THIRD, ("b1", "b2", "b3", "b4", "c1", "c2", "c3"),
                           alpha=lambda p: _ep(((p["b1"],), p["c1"])),
                           beta=lambda p: _ep(((p["b2"], p["b3"]), p["c2"])),
                           delta=lambda p: _ep(((p["b4"],), p["c3"]))))
    defs.append(_chaos_def("A14", "third_one_var", _THIRD, ("b1", "b2", "b3", "b4", "c1", "c2", "c3"),
                           alpha=lambda p: _ep(((p["b1"], p["b2"]), p["c1"])),
                           beta=lambda p: _ep(((p["b3"],), p["c2"])),
                           delta=lambda p: _ep(((p["b4"],), p["c3"]))))

    # option-calibration chaos forms
    defs.append(_chaos_def("B1", "second_one_var", _SEC1, ("b1", "b2", "b3", "b4", "c1", "c2"),
                           alpha=lambda p: _ep(((p["b1"], p["b2"]), p["c1"])),
                           beta=lambda p: _ep(((p["b3"], p["b4"]), p["c2"]))))
    defs.append(_chaos_def("B2", "second_one_var", _SEC1, ("b1", "b2", "b3", "b4", "c1", "c2", "c3"),
                           alpha=lambda p: _ep(((p["b1"], p["b2"]), p["c1"]), ((0.0, p["b3"]), p["c2"])),
                           beta=lambda p: _ep(((0.0, p["b4"]), p["c3"]))))
    defs.append(_chaos_def("B3", "second_factorizable", "factorizable 2nd", ("b1", "b2", "b3", "c1", "c2", "c3"),
                           alpha=lambda p: _ep(((p["b1"], p["b2"]), p["c1"])),
                           beta=lambda p: _ep(((p["b3"],), p["c2"])),
                           gamma=lambda p: _ep(((1.0,), p["c3"])),
                           scale=(0, 1, 2)))
    defs.append(_chaos_def("B4", "third_one_var", _THIRD, ("b1", "b2", "b3", "c1", "c2", "c3"),
                           alpha=lambda p: _ep(((p["b1"],), p["c1"])),
                           beta=lambda p: _ep(((p["b2"],), p["c2"])),
                           delta=lambda p: _ep(((p["b3"],), p["c3"]))))
    defs.append(_chaos_def("B5", "third_one_var", _THIRD, ("b1", "b2", "b3", "b4", "c1", "c2", "c3"),
                           alpha=lambda p: _ep(((p["b1"], p["b2"]), p["c1"])),
                           beta=lambda p: _ep(((p["b3"],), p["c2"])),
                           delta=lambda p: _ep(((p["b4"],), p["c3"]))))
    defs.append(_chaos_def("B6", "third_one_var", _THIRD, ("b1", "b2", "b3", "b4", "b5", "b6", "c1", "c2", "c3"),
                           alpha=lambda p: _ep(((p["b1"], p["b2"]), p["c1"])),
                           beta=lambda p: _ep(((p["b3"], p["b4"]), p["c2"])),
                           delta=lambda p: _ep(((p["b5"], p["b6"]), p["c3"]))))

    # benchmarks
    sv_names = ("b0", "b1", "b2", "b3", "c1", "c2")
    sv_bounds = (CURVE_LEVEL_BOUND, CURVE_SHAPE_BOUND, CURVE_SHAPE_BOUND, CURVE_SHAPE_BOUND,
                 CHAOS_C_BOUND, CHAOS_C_BOUND)

    def _sv(p):
        return bm.SvenssonParams(p["b0"], p["b1"], p["b2"], p["b3"], p["c1"], p["c2"])

    defs.append(ModelDefinition(
        model_id="HW", kind="hull_white", label="Hull-White",
        param_names=sv_names + ("kappa", "eta"),
        default_bounds=sv_bounds + ((0.01, 3.0), (1e-4, 0.1)),
        builder=lambda p: bm.HullWhiteParams(p["kappa"], p["eta"], _sv(p)),
    ))
    defs.append(ModelDefinition(
        model_id="RATLOG", kind="rational_lognormal", label="Rational-log",
        param_names=sv_names + ("k1", "k2", "eta"),
        default_bounds=sv_bounds + ((0.0, 1.0), (-0.9, 5.0), (1e-4, 1.0)),
        builder=lambda p: bm.RatLogParams(p["k1"], p["k2"], p["eta"], _sv(p)),
    ))
    defs.append(ModelDefinition(
        model_id="LFM", kind="libor_market", label="LIBOR",
        param_names=sv_names + ("vb1", "vb2", "vb3", "vc1", "rho_inf", "corr_eta1", "corr_eta2"),
        default_bounds=sv_bounds + ((-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0), (0.01, 5.0),
                                    (0.05, 0.99), (0.0, 1.0), (0.0, 1.0)),
        builder=None,  # needs a tenor grid; see build_lfm
    ))

    return {d.model_id: d for d in defs}


_REGISTRY = _build_registry()


def registry() -> dict[str, ModelDefinition]:
    """All model definitions keyed by id, in canonical table order."""
    return dict(_REGISTRY)


def term_structure_ids() -> tuple[str, ...]:
    return ("SV", "NS") + tuple(f"A{i}" for i in range(1, 15))


def option_model_ids() -> tuple[str, ...]:
    return tuple(f"B{i}" for i in range(1, 7)) + ("HW", "RATLOG", "LFM")


def get_model(model_id: str) -> ModelDefinition:
    try:
        return _REGISTRY[model_id]
    except KeyError:
        raise DomainError(f"unknown model id {model_id!r}; known ids: {', '.join(_REGISTRY)}") from None


def build_lfm(theta, tenor) -> bm.LfmParams:
    """Build the LFM from the 13-parameter vector and a tenor grid. Passing
    only the first 10 parameters leaves correlations unset (caplets only)."""
    defn = get_model("LFM")
    theta = tuple(float(x) for x in theta)
    if len(theta) == defn.n_params - 3:
        names = defn.param_names[:-3]
        p = dict(zip(names, theta))
        corr = None
    elif len(theta) == defn.n_params:
        p = dict(zip(defn.param_names, theta))
        corr = (p["rho_inf"], p["corr_eta1"], p["corr_eta2"])
    else:
        raise SpecificationError(f"LFM takes 10 or 13 parameters, got {len(theta)}")
    sv = bm.SvenssonParams(p["b0"], p["b1"], p["b2"], p["b3"], p["c1"], p["c2"])
    return bm.LfmParams(vol=(p["vb1"], p["vb2"], p["vb3"], p["vc1"]), svensson=sv, tenor=tuple(tenor), corr=corr)


def build_model(model_id: str, theta, tenor=None):
    defn = get_model(model_id)
    if model_id == "LFM":
        if tenor is None:
            raise SpecificationError("LFM requires a tenor grid")
        return build_lfm(theta, tenor)
    return defn.build(theta)


def canonicalize(model_id: str, theta) -> tuple[float, ...]:
    """Gauge-fix a chaos parameter vector: rescale the b-parameters of
    alpha/beta/delta so Z_00 = 1, then flip the overall sign so the first
    such parameter is positive. Prices are invariant; reporting is stable.
    Non-chaos models are returned unchanged."""
    defn = get_model(model_id)
    theta = list(float(x) for x in theta)
    if not defn.is_chaos() or not defn.scale_param_indices:
        return tuple(theta)
    spec = defn.build(theta)
    z00 = ch.build_psi(spec).total_integral()
    lam = 1.0 / math.sqrt(z00)
    for i in defn.scale_param_indices:
        theta[i] *= lam
    first = next((theta[i] for i in defn.scale_param_indices if theta[i] != 0.0), 0.0)
    if first < 0.0:
        for i in defn.scale_param_indices:
            theta[i] = -theta[i]
    return tuple(theta)


# ---------------------------------------------------------------------------
# plain-text parameter files
# ---------------------------------------------------------------------------


def save_model_params(path, model_id: str, theta) -> None:
    defn = get_model(model_id)
    theta = tuple(float(x) for x in theta)
    if len(theta) not in (defn.n_params, defn.parameter_count("cpl")):
        raise SpecificationError(f"{model_id} expects {defn.n_params} parameters, got {len(theta)}")
    lines = [f"model = {model_id}"]
    for name, value in zip(defn.param_names, theta):
        lines.append(f"{name} = {value!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model_params(path) -> tuple[str, tuple[float, ...]]:
    pairs = {}
    order = []
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"malformed parameter line {raw!r} in {path}")
            key, value = (part.strip() for part in line.split("=", 1))
            pairs[key] = value
            order.append(key)
    if "model" not in pairs:
        raise DomainError(f"parameter file {path} is missing the 'model' entry")
    model_id = pairs.pop("model")
    defn = get_model(model_id)
    theta = []
    for name in defn.param_names:
        if name not in pairs:
            if model_id == "LFM" and name in defn.param_names[-3:]:
                continue  # correlation block optional
            raise DomainError(f"parameter file {path} is missing {name!r} for model {model_id}")
        theta.append(float(pairs[name]))
    return model_id, tuple(theta)


# ---------------------------------------------------------------------------
# uniform pricing interface
# ---------------------------------------------------------------------------


class ModelPricer:
    """Discount/yield/caplet/swaption interface over any built model.

    Chaos and benchmark models all support the full interface; descriptive
    curves (Svensson/Nelson-Siegel) are term-structure only and raise on
    option calls. For the LFM, caplet dates must sit on the model tenor grid
    and implied-vol-space quotes are available directly.
    """

    def __init__(self, model):
        self.model = model

    @property
    def vol_space(self) -> bool:
        """True when calibration for this model compares implied vols."""
        return isinstance(self.model, bm.LfmParams)

    def discount(self, T: float) -> float:
        m = self.model
        if isinstance(m, ch.ChaosSpec):
            return ch.discount_factor(m, T)
        return m.discount(T)

    def zero_yield(self, T: float) -> float:
        if T <= 0.0:
            raise DomainError(f"yield requires positive maturity, got {T}")
        return -math.log(self.discount(T)) / T

    def caplet(self, t: float, T: float, notional: float, K: float) -> float:
        m = self.model
        if isinstance(m, ch.ChaosSpec):
            return pr.caplet(m, t, T, notional, K)
        if isinstance(m, bm.HullWhiteParams):
            return bm.hw_caplet(m, t, T, notional, K)
        if isinstance(m, bm.RatLogParams):
            return bm.ratlog_caplet(m, t, T, notional, K)
        if isinstance(m, bm.LfmParams):
            i = m.grid_index(T)
            if abs(m.tenor[i - 1] - t) > 1e-9:
                raise DomainError(f"caplet ({t}, {T}) does not match the LFM tenor grid")
            return bm.lfm_caplet(m, i, notional, K)
        raise DomainError(f"{type(m).__name__} is a term-structure-only model; no caplet pricing")

    def caplet_vol(self, t: float, T: float) -> float:
        m = self.model
        if isinstance(m, bm.LfmParams):
            i = m.grid_index(T)
            if abs(m.tenor[i - 1] - t) > 1e-9:
                raise DomainError(f"caplet ({t}, {T}) does not match the LFM tenor grid")
            return bm.lfm_caplet_vol(m, i)
        raise DomainError(f"{type(m).__name__} has no native caplet-vol quote")

    def swaption(self, sched: pr.SwapSchedule) -> float:
        m = self.model
        if isinstance(m, ch.ChaosSpec):
            return pr.swaption(m, sched)
        if isinstance(m, bm.HullWhiteParams):
            return bm.hw_swaption(m, sched)
        if isinstance(m, bm.RatLogParams):
            return bm.ratlog_swaption(m, sched)
        if isinstance(m, bm.LfmParams):
            return bm.lfm_swaption(m, sched)
        raise DomainError(f"{type(m).__name__} is a term-structure-only model; no swaption pricing")

    def swaption_vol(self, sched: pr.SwapSchedule) -> float:
        m = self.model
        if isinstance(m, bm.LfmParams):
            return bm.rebonato_swaption_vol(m, sched)
        raise DomainError(f"{type(m).__name__} has no native swaption-vol quote")


def pricer_for(model) -> ModelPricer:
    return ModelPricer(model)
