"""Positive solutions of ``-u'' = lam u + a_h(x) u**p`` on ``(0, 1)`` with
zero Dirichlet data, where ``a_h`` vanishes on a central window of width
``h`` and equals 1 elsewhere.

Submodules
----------
core          parameters, weight, energies, solution containers
quadrature    endpoint-singular quadrature and the time-map kernel
timemaps      time maps of the nonlinear and linear phase-plane systems
shooting      three-arc shooting and the Green fixed-point residual
solvers       symmetric, scan-based and landscape-matching constructions
continuation  sweeps, blow-up tables, metasolution sequences, thresholds
cli           command-line front end
"""

from ._backend import BACKEND
from .core import PI2, PositiveSolution, ProblemParams, Regime, Symmetry
from .errors import (BracketError, ConvergenceError, DomainError, IntegrationError, LandscapeError,
                     MNLabError, NoSolutionError, NumericalError, UnsupportedLandscapeError,
                     VerificationError)
from .quadrature import QuadratureConfig
from .shooting import FlowConfig, fixed_point_residual, shoot
from .solvers import (find_all_positive, matching_to_solution, phi_landscape, reflect,
                      solve_matching, solve_symmetric)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "PI2", "BracketError", "ConvergenceError", "DomainError", "FlowConfig",
    "IntegrationError", "LandscapeError", "MNLabError", "NoSolutionError", "NumericalError",
    "PositiveSolution", "ProblemParams", "QuadratureConfig", "Regime", "Symmetry",
    "UnsupportedLandscapeError", "VerificationError", "find_all_positive", "fixed_point_residual",
    "matching_to_solution", "phi_landscape", "reflect", "shoot", "solve_matching", "solve_symmetric",
]
