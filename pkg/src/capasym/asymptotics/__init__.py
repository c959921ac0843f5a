"""Long-time behaviour of the damped oscillation about the equilibrium height."""

from __future__ import annotations

from .liouville import (
    LiouvilleFrame,
    TransformedSolution,
    from_v,
    green_kernel,
    to_v,
    transformed_defect,
    transformed_reference,
)
from .oracles import J1_quadrature, J2_quadrature, moment_quadrature
from .picard import PicardResult, free_oscillation, initial_coeffs, picard_step_numeric, sigma, sigma_exact, sigma_series
from .recursion import (
    AsymptoticCoeffs,
    BoundsEstimate,
    J1_closed,
    J2_closed,
    asym_eval,
    asym_eval_u,
    bounds_estimate,
    coeff_iterate,
    damped_trig_moment,
)
from .special import contraction_bound, hyp2f1, min_contraction_alpha

__all__ = [
    "LiouvilleFrame",
    "TransformedSolution",
    "from_v",
    "green_kernel",
    "to_v",
    "transformed_defect",
    "transformed_reference",
    "J1_quadrature",
    "J2_quadrature",
    "moment_quadrature",
    "PicardResult",
    "free_oscillation",
    "initial_coeffs",
    "picard_step_numeric",
    "sigma",
    "sigma_exact",
    "sigma_series",
    "AsymptoticCoeffs",
    "BoundsEstimate",
    "J1_closed",
    "J2_closed",
    "asym_eval",
    "asym_eval_u",
    "bounds_estimate",
    "coeff_iterate",
    "damped_trig_moment",
    "contraction_bound",
    "hyp2f1",
    "min_contraction_alpha",
]
