"""Closed-form mean-square-error analysis of the regularized iteration.

Everything here is a function of the iteration-matrix eigenvalues
``xi_i = 1 - tau*gamma - tau*lambda_i``.  Logarithms are natural.

The MSE after ``t`` steps is evaluated as

    H_t = H_inf + (1/N) sum_i xi_i^(2t) * (nu^2 - tau sigma^2 / (1 - xi_i))

which is an exact rearrangement of
``(nu^2/N) sum xi^(2t) + (tau sigma^2/N) sum (1 - xi^(2t))/(1 - xi)``.
Every coefficient in the sum is nonnegative, so the computed curve cannot
increase through rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError, NumericalError, StepSizeError

CLOSED_FORM = "closed_form"
EMPIRICAL = "empirical"


@dataclass(frozen=True)
class QSpectrum:
    """Iteration-matrix eigenvalues, descending (``xi[0] = 1 - tau*gamma``)."""

    xi: np.ndarray
    tau: float
    gamma: float

    @property
    def node_count(self):
        return len(self.xi)


@dataclass(frozen=True)
class MseCurve:
    values: np.ndarray
    kind: str
    params: dict = field(default_factory=dict)

    @property
    def horizon(self):
        return len(self.values) - 1


def q_spectrum(spectrum, tau, gamma):
    limit = 1.0 / (spectrum.max_degree + gamma)
    if not tau > 0 or tau > limit * (1 + 1e-12):
        raise StepSizeError(f"tau={tau} must lie in (0, 1/(d_max + gamma)] = (0, {limit}]")
    lam = np.asarray(spectrum.eigenvalues, dtype=np.float64)
    # ascending lambda gives descending xi
    xi = (1.0 - tau * gamma) - tau * lam
    xi.setflags(write=False)
    return QSpectrum(xi=xi, tau=float(tau), gamma=float(gamma))


def _mode_split(qs, tau, sigma, nu):
    """Per-mode limit ``tau sigma^2/(1 - xi)`` and transient weight ``nu^2 - limit``."""
    xi = np.asarray(qs.xi, dtype=np.float64)
    limit = tau * sigma**2 / (1.0 - xi)
    weight = np.maximum(nu**2 - limit, 0.0)
    return xi, limit, weight


def closed_form_mse(qs, tau, sigma, nu, horizon):
    """Exact ``H_0..H_horizon``; powers are advanced by one multiplication per step."""
    if horizon < 0:
        raise InvalidParameterError(f"horizon must be >= 0, got {horizon}")
    xi, limit, weight = _mode_split(qs, tau, sigma, nu)
    n = len(xi)
    h_inf = limit.sum() / n
    sq = xi * xi
    power = np.ones_like(xi)
    values = np.empty(horizon + 1)
    for t in range(horizon + 1):
        values[t] = h_inf + (power @ weight) / n
        power *= sq
    params = {"tau": tau, "gamma": qs.gamma, "sigma": sigma, "nu": nu, "N": n}
    return MseCurve(values=values, kind=CLOSED_FORM, params=params)


def mse_increment(qs, tau, sigma, nu, t):
    """``H_{t+1} - H_t`` via ``(tau sigma^2/N) sum xi^(2t) h(xi)``, ``h(xi) = alpha xi^2 + xi + 1 - alpha``."""
    xi = np.asarray(qs.xi, dtype=np.float64)
    a = alpha(tau, qs.gamma)
    h = a * xi**2 + xi + 1.0 - a
    return tau * sigma**2 / len(xi) * np.sum(xi ** (2 * t) * h)


def asymptotic_mse(spectrum, sigma, gamma):
    """``(sigma^2/N) sum 1/(gamma + lambda_i)``; the step size does not enter."""
    if not gamma > 0:
        raise InvalidParameterError(f"gamma must be positive, got {gamma}")
    lam = np.asarray(spectrum.eigenvalues, dtype=np.float64)
    return sigma**2 / len(lam) * np.sum(1.0 / (gamma + lam))


def alpha(tau, gamma):
    if not tau * gamma > 0:
        raise InvalidParameterError(f"tau*gamma must be positive, got {tau * gamma}")
    return 1.0 / (tau * gamma)


def stopping_time_bound(alpha, epsilon):
    """Graph-independent upper bound ``(alpha/2) ln(2 alpha / epsilon)``."""
    if not epsilon > 0:
        raise InvalidParameterError(f"epsilon must be positive, got {epsilon}")
    if not alpha > 1:
        raise InvalidParameterError(f"alpha must exceed 1, got {alpha}")
    return alpha / 2.0 * math.log(2.0 * alpha / epsilon)


def tightest_intermediate_bound(alpha, epsilon):
    """``ln(2 alpha/epsilon) / ln(1/(1 - 1/alpha)^2)``, never larger than the universal bound."""
    if not epsilon > 0:
        raise InvalidParameterError(f"epsilon must be positive, got {epsilon}")
    if not alpha > 1:
        raise InvalidParameterError(f"alpha must exceed 1, got {alpha}")
    return math.log(2.0 * alpha / epsilon) / (-2.0 * math.log1p(-1.0 / alpha))


def stopping_time_exact(qs, tau, sigma, nu, epsilon):
    """Smallest integer ``t`` with ``H_t < (1 + epsilon) H_inf``."""
    if not epsilon > 0:
        raise InvalidParameterError(f"epsilon must be positive, got {epsilon}")
    xi, limit, weight = _mode_split(qs, tau, sigma, nu)
    n = len(xi)
    h_inf = limit.sum() / n
    # compare the transient excess directly; it is what must fall below epsilon * H_inf
    target = epsilon * h_inf * n
    a = alpha(tau, qs.gamma)
    cap = max(10 * math.ceil(stopping_time_bound(a, epsilon)), 10)
    sq = xi * xi
    power = np.ones_like(xi)
    for t in range(cap + 1):
        if power @ weight < target:
            return t
        power *= sq
    raise NumericalError(f"H_t did not reach (1 + {epsilon}) H_inf within {cap} steps")
