import numpy as np
import pytest

from relloc.errors import InvalidParameterError
from relloc.graph import build_cycle, build_path, incidence_matrix
from relloc.problem import (
    BLOCK_SIZE,
    ProblemSpec,
    empirical_moments,
    gamma,
    sample_block,
    sample_realization,
    trial_realization,
)


@pytest.mark.parametrize(
    "sigma, nu, expected",
    [(1.0, 1.0, 1.0), (1.0, 20.0, 0.0025), (2.0, 1.0, 4.0)],
)
def test_gamma(sigma, nu, expected):
    spec = ProblemSpec(build_path(3), nu=nu, sigma=sigma)
    assert gamma(spec) == pytest.approx(expected, rel=1e-15)


def test_spec_validation():
    g = build_path(3)
    with pytest.raises(InvalidParameterError):
        ProblemSpec(g, nu=0.0, sigma=1.0)
    with pytest.raises(InvalidParameterError):
        ProblemSpec(g, nu=1.0, sigma=-1.0)
    with pytest.raises(InvalidParameterError):
        ProblemSpec(g, nu=1.0, sigma=1.0, x0=np.zeros(4))
    np.testing.assert_array_equal(ProblemSpec(g, nu=1.0, sigma=1.0).x0, np.zeros(3))


def test_degenerate_prior_and_noise():
    g = build_cycle(6)
    x0 = np.arange(6.0)
    r = sample_realization(ProblemSpec(g, nu=1e-12, sigma=1.0, x0=x0), 3)
    np.testing.assert_allclose(r.x_bar, x0, atol=1e-9)
    r = sample_realization(ProblemSpec(g, nu=1.0, sigma=1e-12, x0=x0), 3)
    np.testing.assert_allclose(r.b, incidence_matrix(g) @ r.x_bar, atol=1e-9)


def test_deterministic_and_consistent():
    spec = ProblemSpec(build_cycle(8), nu=3.0, sigma=0.5, x0=np.linspace(-1, 1, 8))
    r1, r2 = sample_realization(spec, 11), sample_realization(spec, 11)
    for name in ("x_bar", "noise", "b"):
        np.testing.assert_array_equal(getattr(r1, name), getattr(r2, name))
    a = incidence_matrix(spec.graph)
    x_bar, noise, b = sample_block(spec, 5, 2, 300)
    # stored noise is exactly what the measurements carry
    np.testing.assert_array_equal(b - x_bar @ a.T, noise)
    assert not np.array_equal(sample_realization(spec, 12).x_bar, r1.x_bar)


def test_trials_are_prefix_stable():
    spec = ProblemSpec(build_cycle(5), nu=1.0, sigma=1.0)
    small = sample_block(spec, 9, 0, 10)
    large = sample_block(spec, 9, 0, 200)
    for a, b in zip(small, large):
        np.testing.assert_array_equal(a, b[:10])
    r = trial_realization(spec, 9, BLOCK_SIZE + 3)
    np.testing.assert_array_equal(r.x_bar, sample_block(spec, 9, 1, 4)[0][3])
    np.testing.assert_array_equal(trial_realization(spec, 9, 0).b, sample_realization(spec, 9).b)


def test_empirical_moments_unit_prior():
    x0 = np.array([0.5, -1.0, 2.0, 0.0])
    spec = ProblemSpec(build_cycle(4), nu=1.0, sigma=1.0, x0=x0)
    mean, var = empirical_moments(spec, 100_000, 42)
    assert np.all(np.abs(mean - x0) < 0.02)
    assert np.all((var > 0.97) & (var < 1.03))


def test_empirical_moments_wide_prior():
    spec = ProblemSpec(build_cycle(4), nu=20.0, sigma=1.0)
    _, var = empirical_moments(spec, 100_000, 43)
    np.testing.assert_allclose(var, 400.0, rtol=0.03)


def test_empirical_moments_needs_two_trials():
    with pytest.raises(InvalidParameterError):
        empirical_moments(ProblemSpec(build_cycle(4), nu=1.0, sigma=1.0), 1, 0)


def test_gaussian_draws_and_independence():
    trials = 100_000
    spec = ProblemSpec(build_cycle(3), nu=1.0, sigma=1.0)
    chunks = [sample_block(spec, 77, k, min(BLOCK_SIZE, trials - s))
              for k, s in enumerate(range(0, trials, BLOCK_SIZE))]
    dev = np.concatenate([c[0] for c in chunks])
    noise = np.concatenate([c[1] for c in chunks])
    se = 1 / np.sqrt(trials)
    for z in (dev, noise):
        assert np.all(np.abs(z.mean(axis=0)) < 4 * se)
        # standard error of the sample variance of a unit normal is sqrt(2/R)
        assert np.all(np.abs(z.var(axis=0, ddof=1) - 1) < 4 * np.sqrt(2 / trials))
    cross = (dev - dev.mean(0)).T @ (noise - noise.mean(0)) / (trials - 1)
    assert np.all(np.abs(cross) < 4 * se)
