from .lp import DispatchInfeasible, DispatchUnbounded, LpInstance, ParkData, build_lp, prepare_inputs
from .normal import inverse_normal_cdf
from .solve import CostBreakdown, DispatchSolution, dispatch, solve_dispatch
from .verify import VerifyReport, verify_solution

__all__ = [
    "CostBreakdown",
    "DispatchInfeasible",
    "DispatchSolution",
    "DispatchUnbounded",
    "LpInstance",
    "ParkData",
    "VerifyReport",
    "build_lp",
    "dispatch",
    "inverse_normal_cdf",
    "prepare_inputs",
    "solve_dispatch",
    "verify_solution",
]
