"""Equilibria, spectra, infinite-time blow-up and compactified attractors for

    u_t = u_xx - u on (0, 1),  -u_x(0) = lam u(0) + g(u(0)),  u_x(1) = lam u(1) + g(u(1)).
"""
__version__ = "0.1.0"

from ._backend import NAME as BACKEND
from .attractor import AttractorGraph, build_attractor, classify_regime, shadowing_experiment
from .compactification import (HemispherePoint, TangentChartPoint, chart_change,
                               hemisphere_simulate, infinity_equilibrium_residual,
                               infinity_flow_simulate, project, unproject, xi_flow_closed_form)
from .equilibria import (BifurcationPoint, EquilibriumBranch, amplitudes_at_lambda,
                         bifurcation_diagram, equilibrium_profile, lambda_of_amplitude)
from .grid import Grid
from .nonlinearity import BoundaryNonlinearity, builtin, validate_hypotheses
from .pde import (TrajectoryRecord, detect_blowup, energy, fit_growth_rate, modal_residual,
                  simulate, step)
from .spectrum import (DiscreteSpectrum, RobinSpectrum, discrete_spectrum, linearized_spectrum_at,
                       morse_index, solve_spectrum, spectrum_at_infinity)
from .steklov import SIGMA1, SIGMA2, SteklovPair, steklov_eigenpairs, steklov_residual

__all__ = [name for name in dir() if not name.startswith("_")]
