"""Fourth-order multiple-relaxation-time lattice Boltzmann solver for the
d-dimensional coupled Burgers' equations via the Cole-Hopf transformation."""
from .analytic import AnalyticCase, case_names, make_case, register_case
from .errors import (BesselRangeError, ConfigError, DivergenceError, InfeasibleParameterError,
                     InvalidDimensionError, InversionError, SingularDenominatorError)
from .harness import (ConvergenceReport, ExperimentConfig, convergence_rate, emit_report, rmse,
                      run_case, sweep_convergence)
from .lattice import LatticeSpec
from .params import SchemeParams, residuals, solve_fourth_order
from .solver import (GridSpec, MacroFields, MRTSolver, PopulationField, collide, extract_grad_theta,
                     extract_macro, extract_theta, extract_velocity, initialize, step, stream)

__version__ = "0.1.0"

__all__ = [
    "AnalyticCase", "case_names", "make_case", "register_case",
    "BesselRangeError", "ConfigError", "DivergenceError", "InfeasibleParameterError",
    "InvalidDimensionError", "InversionError", "SingularDenominatorError",
    "ConvergenceReport", "ExperimentConfig", "convergence_rate", "emit_report", "rmse",
    "run_case", "sweep_convergence", "LatticeSpec", "SchemeParams", "residuals",
    "solve_fourth_order", "GridSpec", "MacroFields", "MRTSolver", "PopulationField", "collide",
    "extract_grad_theta", "extract_macro", "extract_theta", "extract_velocity", "initialize",
    "step", "stream",
]
