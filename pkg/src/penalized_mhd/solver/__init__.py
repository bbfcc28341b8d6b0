"""IMEX solver for the penalized compressible MHD system."""

from .initial import InitialData, make_initial_state, project_div_muH
from .model import Model, State
from .run import RunConfig, Trajectory, integrate
from .stepping import NegativeDensityError, StepOptions, StepReport, cfl_dt, hyperbolic_rhs, step

__all__ = [
    "InitialData", "Model", "NegativeDensityError", "RunConfig", "State", "StepOptions",
    "StepReport", "Trajectory", "cfl_dt", "hyperbolic_rhs", "integrate", "make_initial_state",
    "project_div_muH", "step",
]
