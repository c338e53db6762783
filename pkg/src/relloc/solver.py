"""Gradient-descent estimators for relative localization.

The regularized iteration is ``x <- (1 - tau*gamma) x - tau L x + tau A^T b +
tau*gamma x0``; the baseline drops the prior term.  Both are evaluated with
neighbor-local sums: node ``i`` only reads its own state, its neighbors' states,
and the measurements on its incident edges.  Every step function accepts a
single state of shape ``(N,)`` or a batch of shape ``(R, N)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidParameterError, NumericalError, StepSizeError
from .graph import laplacian, max_degree
from .problem import gamma as problem_gamma

REGULARIZED = "regularized"
BASELINE = "baseline"
ALGORITHMS = (REGULARIZED, BASELINE)


@dataclass(frozen=True)
class SolverConfig:
    """Step size and regularization ratio.

    ``tau_baseline`` overrides the baseline step size (defaults to ``tau``).
    With ``enforce_assumption=False`` a step size above ``1/(d_max + gamma)``
    only warns.
    """

    tau: float
    gamma: float
    enforce_assumption: bool = True
    tau_baseline: float | None = None

    def __post_init__(self):
        if not self.tau > 0:
            raise InvalidParameterError(f"tau must be positive, got {self.tau}")
        if not self.gamma > 0:
            raise InvalidParameterError(f"gamma must be positive, got {self.gamma}")
        if self.tau_baseline is not None and not self.tau_baseline > 0:
            raise InvalidParameterError(f"tau_baseline must be positive, got {self.tau_baseline}")

    @property
    def alpha(self):
        return 1.0 / (self.tau * self.gamma)

    @property
    def baseline_tau(self):
        return self.tau if self.tau_baseline is None else self.tau_baseline

    def check(self, g):
        """Raise (or warn) if the step sizes are too large for ``g``."""
        dmax = max_degree(g)
        problems = []
        limit = 1.0 / (dmax + self.gamma)
        if self.tau > limit * (1 + 1e-12):
            problems.append(f"tau={self.tau} exceeds 1/(d_max + gamma) = {limit}")
        if self.tau * self.gamma >= 1:
            problems.append(f"tau*gamma={self.tau * self.gamma} must be < 1")
        if self.tau_baseline is not None and self.tau_baseline > (1.0 / dmax) * (1 + 1e-12):
            problems.append(f"tau_baseline={self.tau_baseline} exceeds 1/d_max = {1.0 / dmax}")
        if not problems:
            return
        msg = "; ".join(problems)
        if self.enforce_assumption:
            raise StepSizeError(msg)
        warnings.warn(msg + " (iteration may diverge)", RuntimeWarning, stacklevel=2)


@dataclass(frozen=True)
class Trajectory:
    states: np.ndarray  # (T+1, N)
    algorithm: str

    @property
    def horizon(self):
        return len(self.states) - 1


def default_tau(g, gamma):
    """Largest step size allowed by the stability assumption: ``1/(d_max + gamma)``."""
    if not gamma > 0:
        raise InvalidParameterError(f"gamma must be positive, got {gamma}")
    return 1.0 / (max_degree(g) + gamma)


def build_q(g, cfg):
    """Dense iteration matrix ``(1 - tau*gamma) I - tau L``."""
    cfg.check(g)
    n = g.node_count
    return (1.0 - cfg.tau * cfg.gamma) * np.eye(n) - cfg.tau * laplacian(g)


def _pad(x):
    pad = np.zeros(x.shape[:-1] + (1,), dtype=np.float64)
    return np.concatenate([np.asarray(x, dtype=np.float64), pad], axis=-1)


def apply_laplacian(g, x):
    """``L x`` computed as ``deg_i x_i - sum of neighbor states``."""
    nbr = g.neighbor_table
    return g.degrees * x - _pad(x)[..., nbr].sum(axis=-1)


def apply_incidence_t(g, b):
    """``A^T b``: each node sums the signed measurements on its incident edges."""
    inc, sign = g.incident_edge_table
    return (_pad(b)[..., inc] * sign).sum(axis=-1)


def phi(x, b, x0, g, sigma, nu):
    """Regularized least-squares objective."""
    u, v = g.edge_array[:, 0], g.edge_array[:, 1]
    resid = x[v] - x[u] - b
    return resid @ resid / sigma**2 + (x - x0) @ (x - x0) / nu**2


def gradient_phi(x, b, x0, g, sigma, gamma):
    """``(2/sigma^2) (A^T (A x - b) + gamma (x - x0))``, evaluated edge-locally."""
    x = np.asarray(x, dtype=np.float64)
    u, v = g.edge_array[:, 0], g.edge_array[:, 1]
    resid = x[..., v] - x[..., u] - b
    return 2.0 / sigma**2 * (apply_incidence_t(g, resid) + gamma * (x - x0))


def regularized_offset(g, b, x0, cfg):
    """Constant term ``tau A^T b + tau*gamma x0`` of the regularized step."""
    return cfg.tau * apply_incidence_t(g, b) + cfg.tau * cfg.gamma * np.asarray(x0, dtype=np.float64)


def _regularized_update(g, x, offset, cfg):
    return (1.0 - cfg.tau * cfg.gamma) * x - cfg.tau * apply_laplacian(g, x) + offset


def _baseline_update(g, x, offset, tau):
    return x - tau * apply_laplacian(g, x) + offset


def step_regularized(x, b, x0, g, cfg):
    x = np.asarray(x, dtype=np.float64)
    return _regularized_update(g, x, regularized_offset(g, b, x0, cfg), cfg)


def step_baseline(x, b, g, tau):
    """One gradient step on the unregularized objective ``||Ax - b||^2``."""
    x = np.asarray(x, dtype=np.float64)
    return _baseline_update(g, x, tau * apply_incidence_t(g, b), tau)


def iterate(g, b, x0, cfg, algorithm, horizon, callback):
    """Run ``horizon`` steps from ``x0``, calling ``callback(t, x)`` for t = 0..horizon.

    ``b`` may be ``(M,)`` or ``(R, M)``; states broadcast accordingly.  Nothing
    is retained, so memory stays ``O(R N)`` regardless of the horizon.
    """
    if horizon < 0:
        raise InvalidParameterError(f"horizon must be >= 0, got {horizon}")
    if algorithm not in ALGORITHMS:
        raise InvalidParameterError(f"unknown algorithm {algorithm!r}")
    cfg.check(g)
    b = np.asarray(b, dtype=np.float64)
    x = np.broadcast_to(np.asarray(x0, dtype=np.float64), b.shape[:-1] + (g.node_count,)).copy()
    if algorithm == REGULARIZED:
        offset = regularized_offset(g, b, x0, cfg)

        def update(state):
            return _regularized_update(g, state, offset, cfg)
    else:
        tau = cfg.baseline_tau
        offset = tau * apply_incidence_t(g, b)

        def update(state):
            return _baseline_update(g, state, offset, tau)

    callback(0, x)
    for t in range(1, horizon + 1):
        x = update(x)
        callback(t, x)
    return x


def run(spec, realization, cfg, horizon, algorithm=REGULARIZED):
    """Full trajectory ``x[0..horizon]`` for one realization."""
    states = np.empty((max(horizon, 0) + 1, spec.graph.node_count))

    def keep(t, x):
        states[t] = x

    iterate(spec.graph, realization.b, spec.x0, cfg, algorithm, horizon, keep)
    return Trajectory(states=states, algorithm=algorithm)


def optimal_solution(realization, spec, gamma=None):
    """Regularized least-squares optimum via a Cholesky solve of ``(L + gamma I) x = A^T b + gamma x0``."""
    g = spec.graph
    gamma = problem_gamma(spec) if gamma is None else gamma
    if not gamma > 0:
        raise InvalidParameterError(f"gamma must be positive, got {gamma}")
    mat = laplacian(g) + gamma * np.eye(g.node_count)
    rhs = apply_incidence_t(g, realization.b) + gamma * spec.x0
    try:
        x = scipy.linalg.cho_solve(scipy.linalg.cho_factor(mat), rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"normal-equation solve failed: {exc}") from exc
    resid = np.linalg.norm(mat @ x - rhs)
    if resid > 1e-10 * np.linalg.norm(rhs):
        raise NumericalError(f"normal-equation residual {resid:.3e} too large")
    return x
