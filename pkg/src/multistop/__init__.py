"""Optimal multiple exercise of perpetual calls under random refraction times.

The log-price is a jump diffusion with hyper-exponential jumps in both
directions.  Thresholds and value functions are computed in closed form
through the rational Wiener-Hopf factor and an exact algebra of piecewise
exponential-polynomial functions; a Monte Carlo oracle cross-checks them.
"""

from .errors import (BelowStrikeError, BracketFailureError, DegenerateRootsError, DegreeCapError,
                     DivergentConvolutionError, ModelError, MultistopError, NoRootInStripError,
                     OutOfStripError, PoleError, RateTooSmallError, ValidationFailedError)
from .expfun import (ExpMixtureMeasure, ExpPoly, convolve_density, evaluate, integral,
                     integrate_measure, linear_combine, mul_exp, shift)
from .levy import (Contract, LevyModel, RefractionSpec, laplace_exponent,
                   laplace_exponent_derivative, reference_model, validate)
from .montecarlo import (McEstimate, SimConfig, estimate_resolvent, simulate_first_passage,
                         simulate_strategy_value)
from .multi import (RefractionOperator, SolveResult, refraction_operator, solve_all,
                    solve_threshold, u_tilde0, update_u, value_function)
from .roots import RootSet, phi_alpha, solve_roots
from .single import SingleStopSolution, g1, solve_single, threshold_x1
from .wiener_hopf import (WienerHopfFactor, build_factor, first_passage_transform, overshoot_law,
                          psi_plus, resolvent_density)

__version__ = "0.1.0"

__all__ = [
    "BelowStrikeError", "BracketFailureError", "DegenerateRootsError", "DegreeCapError",
    "DivergentConvolutionError", "ModelError", "MultistopError", "NoRootInStripError",
    "OutOfStripError", "PoleError", "RateTooSmallError", "ValidationFailedError",
    "ExpMixtureMeasure", "ExpPoly", "convolve_density", "evaluate", "integral",
    "integrate_measure", "linear_combine", "mul_exp", "shift",
    "Contract", "LevyModel", "RefractionSpec", "laplace_exponent", "laplace_exponent_derivative",
    "reference_model", "validate",
    "McEstimate", "SimConfig", "estimate_resolvent", "simulate_first_passage",
    "simulate_strategy_value",
    "RefractionOperator", "SolveResult", "refraction_operator", "solve_all", "solve_threshold",
    "u_tilde0", "update_u", "value_function",
    "RootSet", "phi_alpha", "solve_roots",
    "SingleStopSolution", "g1", "solve_single", "threshold_x1",
    "WienerHopfFactor", "build_factor", "first_passage_transform", "overshoot_law", "psi_plus",
    "resolvent_density",
]
