"""Monte Carlo estimates of the per-iteration squared error ``(1/N)||x[t] - x_bar||^2``.

Trials are processed in fixed blocks (see :mod:`relloc.problem`).  Blocks may
run on a thread pool, but their statistics are merged strictly in block order,
so results are bit-identical for any thread count.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .problem import BLOCK_SIZE, sample_block
from .solver import ALGORITHMS, BASELINE, REGULARIZED, iterate

log = logging.getLogger(__name__)

MAX_RETAINED = 20
THREADS_ENV = "RELLOC_THREADS"


@dataclass(frozen=True)
class EmpiricalCurve:
    """Per-iteration sample mean and standard error over ``trials`` realizations.

    With a single trial the standard error is reported as 0, not NaN.
    ``samples`` holds the individual curves of the first few trials, shape
    ``(k, T+1)``.
    """

    mean: np.ndarray
    stderr: np.ndarray
    trials: int
    algorithm: str
    samples: np.ndarray | None = None

    @property
    def horizon(self):
        return len(self.mean) - 1


@dataclass
class _BlockStats:
    count: int
    mean: np.ndarray
    m2: np.ndarray
    samples: dict


def thread_count(threads=None):
    if threads is not None:
        return max(int(threads), 1)
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return 1
    try:
        return max(int(raw), 1)
    except ValueError:
        log.warning("ignoring non-integer %s=%r", THREADS_ENV, raw)
        return 1


def _run_block(spec, cfg, algorithms, horizon, rng_seed, block, count, keep):
    x_bar, _, b = sample_block(spec, rng_seed, block, count)
    n = spec.graph.node_count
    out = {}
    for algo in algorithms:
        mean = np.empty(horizon + 1)
        m2 = np.empty(horizon + 1)
        kept = np.empty((keep, horizon + 1)) if keep else None

        def record(t, x):
            err = ((x - x_bar) ** 2).sum(axis=1) / n
            mu = err.mean()
            mean[t] = mu
            m2[t] = ((err - mu) ** 2).sum()
            if keep:
                kept[:, t] = err[:keep]

        iterate(spec.graph, b, spec.x0, cfg, algo, horizon, record)
        out[algo] = _BlockStats(count, mean, m2, {"curves": kept})
    return out


def _merge(acc, new):
    """Chan's pairwise update of count/mean/M2."""
    if acc is None:
        return _BlockStats(new.count, new.mean.copy(), new.m2.copy(), new.samples)
    total = acc.count + new.count
    delta = new.mean - acc.mean
    acc.mean = acc.mean + delta * (new.count / total)
    acc.m2 = acc.m2 + new.m2 + delta**2 * (acc.count * new.count / total)
    acc.count = total
    return acc


def _simulate(spec, cfg, algorithms, horizon, trials, rng_seed, samples, threads):
    if trials < 1:
        raise InvalidParameterError(f"trials must be >= 1, got {trials}")
    if horizon < 0:
        raise InvalidParameterError(f"horizon must be >= 0, got {horizon}")
    for algo in algorithms:
        if algo not in ALGORITHMS:
            raise InvalidParameterError(f"unknown algorithm {algo!r}")
    cfg.check(spec.graph)
    keep = min(max(int(samples), 0), MAX_RETAINED, trials)
    jobs = []
    for block, start in enumerate(range(0, trials, BLOCK_SIZE)):
        count = min(BLOCK_SIZE, trials - start)
        jobs.append((block, count, keep if block == 0 else 0))

    def work(job):
        block, count, k = job
        return _run_block(spec, cfg, algorithms, horizon, rng_seed, block, count, k)

    workers = min(thread_count(threads), len(jobs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, jobs))
    else:
        results = [work(job) for job in jobs]

    curves = []
    for algo in algorithms:
        acc = None
        for res in results:
            acc = _merge(acc, res[algo])
        if trials > 1:
            stderr = np.sqrt(np.maximum(acc.m2, 0.0) / (trials - 1) / trials)
        else:
            stderr = np.zeros(horizon + 1)
        kept = results[0][algo].samples["curves"]
        curves.append(EmpiricalCurve(acc.mean, stderr, trials, algo, kept))
    return curves


def empirical_mse(spec, cfg, algorithm, horizon, trials, rng_seed, samples=0, threads=None):
    """Empirical MSE curve of one algorithm.

    ``threads`` defaults to the ``RELLOC_THREADS`` environment variable (1 if unset).
    """
    (curve,) = _simulate(spec, cfg, (algorithm,), horizon, trials, rng_seed, samples, threads)
    return curve


def compare_algorithms(spec, cfg, horizon, trials, rng_seed, samples=0, threads=None):
    """Regularized and baseline curves computed on the same realizations."""
    reg, base = _simulate(spec, cfg, (REGULARIZED, BASELINE), horizon, trials, rng_seed, samples, threads)
    return reg, base


def interior_minimum(values):
    """Index and value of the minimum of a curve."""
    idx = int(np.argmin(values))
    return idx, float(values[idx])
