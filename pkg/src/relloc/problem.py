"""Statistical model: Gaussian prior on the true positions and i.i.d. edge noise.

Random draws are organised in blocks of ``BLOCK_SIZE`` trials.  Block ``k`` of a
run seeded with ``seed`` owns ``SeedSequence(seed, spawn_key=(k,))``, which is
split into one child stream for the prior draw and one for the noise.  Trial
``r`` reads row ``r % BLOCK_SIZE`` of block ``r // BLOCK_SIZE``, so a trial's
randomness never depends on how many trials are requested in total.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .graph import Graph

BLOCK_SIZE = 1024


@dataclass(frozen=True)
class ProblemSpec:
    """Prior mean ``x0``, prior stddev ``nu`` and noise stddev ``sigma`` on a graph.

    ``x0=None`` means the zero vector.
    """

    graph: Graph
    nu: float
    sigma: float
    x0: np.ndarray | None = None

    def __post_init__(self):
        if not self.nu > 0:
            raise InvalidParameterError(f"nu must be positive, got {self.nu}")
        if not self.sigma > 0:
            raise InvalidParameterError(f"sigma must be positive, got {self.sigma}")
        n = self.graph.node_count
        x0 = np.zeros(n) if self.x0 is None else np.array(self.x0, dtype=np.float64)
        if x0.shape != (n,):
            raise InvalidParameterError(f"x0 must have length {n}, got shape {x0.shape}")
        x0.setflags(write=False)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "nu", float(self.nu))
        object.__setattr__(self, "sigma", float(self.sigma))


@dataclass(frozen=True)
class Realization:
    """Ground truth, noise and measurements; ``b - A @ x_bar == noise`` bit for bit."""

    x_bar: np.ndarray
    noise: np.ndarray
    b: np.ndarray


def gamma(spec):
    """Regularization ratio sigma^2 / nu^2."""
    return spec.sigma**2 / spec.nu**2


def _edge_differences(g, x):
    u, v = g.edge_array[:, 0], g.edge_array[:, 1]
    return x[..., v] - x[..., u]


def block_streams(rng_seed, block):
    """Generators for the prior and noise draws of one block."""
    ss = np.random.SeedSequence(rng_seed, spawn_key=(block,))
    prior_ss, noise_ss = ss.spawn(2)
    return np.random.Generator(np.random.PCG64(prior_ss)), np.random.Generator(np.random.PCG64(noise_ss))


def sample_block(spec, rng_seed, block, count):
    """First ``count`` trials of a block as ``(x_bar, noise, b)`` arrays.

    Shapes are ``(count, N)``, ``(count, M)`` and ``(count, M)``.
    """
    if not 0 <= count <= BLOCK_SIZE:
        raise InvalidParameterError(f"block holds at most {BLOCK_SIZE} trials, asked for {count}")
    g = spec.graph
    prior_rng, noise_rng = block_streams(rng_seed, block)
    x_bar = spec.x0 + spec.nu * prior_rng.standard_normal((count, g.node_count))
    drawn = spec.sigma * noise_rng.standard_normal((count, g.edge_count))
    clean = _edge_differences(g, x_bar)
    b = clean + drawn
    # store the noise that b actually carries, so b - A x_bar reproduces it exactly
    noise = b - clean
    return x_bar, noise, b


def sample_realization(spec, rng_seed):
    """Trial 0 of a Monte Carlo run seeded with ``rng_seed``."""
    x_bar, noise, b = sample_block(spec, rng_seed, 0, 1)
    return Realization(x_bar=x_bar[0], noise=noise[0], b=b[0])


def trial_realization(spec, rng_seed, trial):
    """Realization used by trial ``trial`` of a Monte Carlo run."""
    block, row = divmod(trial, BLOCK_SIZE)
    x_bar, noise, b = sample_block(spec, rng_seed, block, row + 1)
    return Realization(x_bar=x_bar[row], noise=noise[row], b=b[row])


def empirical_moments(spec, trials, rng_seed):
    """Sample mean and per-coordinate unbiased variance of x_bar over ``trials`` draws."""
    if trials < 2:
        raise InvalidParameterError(f"need at least 2 trials, got {trials}")
    draws = []
    for block, start in enumerate(range(0, trials, BLOCK_SIZE)):
        count = min(BLOCK_SIZE, trials - start)
        draws.append(sample_block(spec, rng_seed, block, count)[0])
    x = np.concatenate(draws)
    return x.mean(axis=0), x.var(axis=0, ddof=1)
