"""Post-selected LHS/LHV bounds for steering and Bell tests with lossy detectors."""

__version__ = "0.1.0"

from .bell import BellFunctional, Behaviour, lhv_bound, ps_lhv_bound, tilted_chsh
from .multipartite import EfficiencyProfile2, compile_correlators, tri_ps_lhs_bound
from .steering import (
    Assemblage,
    EfficiencyProfile,
    SteeringFunctional,
    analytic_upper_bound,
    evaluate,
    lhs_bound,
    ps_lhs_bound,
    ps_lhs_bound_dual,
)

__all__ = [
    "Assemblage",
    "Behaviour",
    "BellFunctional",
    "EfficiencyProfile",
    "EfficiencyProfile2",
    "SteeringFunctional",
    "analytic_upper_bound",
    "compile_correlators",
    "evaluate",
    "lhs_bound",
    "lhv_bound",
    "ps_lhs_bound",
    "ps_lhs_bound_dual",
    "ps_lhv_bound",
    "tilted_chsh",
    "tri_ps_lhs_bound",
]
