"""Positive interest-rate models from Wiener chaos expansions.

Closed-form bond, caplet and payer-swaption pricing for chaos models of
orders one to three, three benchmark models (Hull-White, rational lognormal,
lognormal forward-LIBOR), Cairns-style maximum-likelihood term-structure
fitting, joint yield/option least-squares calibration with multi-start
global search, and the comparison statistics (RMSPE, Diebold-Mariano, AIC,
model selection relative frequencies) over file-based market snapshots.
"""

from .chaos import ChaosOrder, ChaosSpec, ZCoeffs, build_psi, discount_factor, forward_rate, z_coeffs, z_value, zero_yield
from .exppoly import ExpPoly, eval_exp_poly, tail_moment
from .pricing import PayoffPoly, SwapSchedule, black, bond_put, caplet, expected_positive_part, implied_vol, real_roots, swaption, truncated_moment

__all__ = [
    "ChaosOrder", "ChaosSpec", "ZCoeffs", "ExpPoly", "PayoffPoly", "SwapSchedule",
    "build_psi", "discount_factor", "forward_rate", "z_coeffs", "z_value", "zero_yield",
    "eval_exp_poly", "tail_moment", "black", "bond_put", "caplet", "expected_positive_part",
    "implied_vol", "real_roots", "swaption", "truncated_moment",
]

__version__ = "0.1.0"
