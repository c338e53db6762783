"""Distributed relative localization: regularized gradient descent, closed-form
MSE analysis and a Monte Carlo harness."""

from .errors import (
    ConfigError,
    GraphConstructionError,
    InvalidParameterError,
    NumericalError,
    RellocError,
    StepSizeError,
)
from .graph import (
    Graph,
    LaplacianSpectrum,
    build_complete,
    build_cycle,
    build_erdos_renyi,
    build_path,
    build_torus_grid,
    incidence_matrix,
    laplacian,
    max_degree,
    spectrum,
)
from .problem import ProblemSpec, Realization, gamma, sample_realization
from .solver import SolverConfig, Trajectory, default_tau, optimal_solution, run

__version__ = "0.1.0"
