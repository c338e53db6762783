import numpy as np
import pytest

from relloc.errors import InvalidParameterError, StepSizeError
from relloc.graph import (
    Graph,
    build_complete,
    build_cycle,
    incidence_matrix,
    laplacian,
    max_degree,
    spectrum,
)
from relloc.problem import ProblemSpec, Realization, gamma, sample_realization
from relloc.solver import (
    BASELINE,
    REGULARIZED,
    SolverConfig,
    build_q,
    default_tau,
    gradient_phi,
    optimal_solution,
    phi,
    run,
    step_baseline,
    step_regularized,
)

from conftest import random_graph


def dense_step(g, x, b, x0, tau, gam):
    """Matrix form Q x + tau A^T b + tau gamma x0."""
    a = incidence_matrix(g).astype(float)
    q = (1 - tau * gam) * np.eye(g.node_count) - tau * a.T @ a
    return q @ x + tau * a.T @ b + tau * gam * x0


def random_instance(rng, nmax=50):
    g = random_graph(rng)
    while g.node_count > nmax:
        g = random_graph(rng)
    nu = float(rng.uniform(0.5, 5))
    sigma = float(rng.uniform(0.2, 2))
    spec = ProblemSpec(g, nu=nu, sigma=sigma, x0=rng.normal(size=g.node_count))
    real = sample_realization(spec, int(rng.integers(10**6)))
    gam = gamma(spec)
    tau = default_tau(g, gam) * float(rng.uniform(0.3, 1.0))
    return spec, real, SolverConfig(tau, gam)


@pytest.mark.parametrize(
    "graph, gam, expected",
    [
        (build_cycle(10), 0.0025, 1 / 2.0025),
        (Graph(2, ((0, 1),)), 1.0, 0.5),
        (build_complete(5), 1.0, 0.2),
    ],
)
def test_default_tau(graph, gam, expected):
    assert default_tau(graph, gam) == pytest.approx(expected, rel=1e-15)


def test_default_tau_cycle_value():
    assert default_tau(build_cycle(160), 0.0025) == pytest.approx(0.499376, abs=1e-6)


def test_build_q_single_edge(single_edge):
    q = build_q(single_edge, SolverConfig(0.5, 1.0))
    np.testing.assert_allclose(q, [[0, 0.5], [0.5, 0]], atol=1e-15)


def test_build_q_small_tau():
    g = build_cycle(5)
    np.testing.assert_allclose(build_q(g, SolverConfig(1e-12, 1.0)), np.eye(5), atol=1e-11)


def test_build_q_eigenvalues():
    g = build_cycle(12)
    cfg = SolverConfig(0.3, 0.5)
    xi = np.linalg.eigvalsh(build_q(g, cfg))
    expected = np.sort(1 - cfg.tau * cfg.gamma - cfg.tau * spectrum(g).eigenvalues)
    np.testing.assert_allclose(xi, expected, atol=1e-12)


def test_step_size_enforced(single_edge):
    with pytest.raises(StepSizeError):
        build_q(single_edge, SolverConfig(0.51, 1.0))
    with pytest.warns(RuntimeWarning):
        build_q(single_edge, SolverConfig(0.51, 1.0, enforce_assumption=False))
    with pytest.raises(InvalidParameterError):
        SolverConfig(0.0, 1.0)


def test_gradient_zero_cases(rng):
    spec, real, cfg = random_instance(rng)
    g = spec.graph
    xs = optimal_solution(real, spec, cfg.gamma)
    grad = gradient_phi(xs, real.b, spec.x0, g, spec.sigma, cfg.gamma)
    assert np.abs(grad).max() <= 1e-9
    a = incidence_matrix(g)
    x = rng.normal(size=g.node_count)
    np.testing.assert_array_equal(gradient_phi(x, a @ x, x, g, 1.0, 0.7), 0.0)


def central_difference(f, x, h=1e-5):
    out = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        out[i] = (f(x + e) - f(x - e)) / (2 * h)
    return out


@pytest.mark.parametrize("seed", range(20))
def test_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    g = build_cycle(5) if seed % 2 else random_graph(rng)
    while g.node_count > 10:
        g = random_graph(rng)
    sigma, nu = rng.uniform(0.5, 2), rng.uniform(0.5, 2)
    x, x0 = rng.normal(size=g.node_count), rng.normal(size=g.node_count)
    b = rng.normal(size=g.edge_count)
    fd = central_difference(lambda z: phi(z, b, x0, g, sigma, nu), x)
    grad = gradient_phi(x, b, x0, g, sigma, sigma**2 / nu**2)
    assert np.linalg.norm(grad - fd) <= 1e-6 * np.linalg.norm(grad)


def test_step_single_edge(single_edge):
    cfg = SolverConfig(0.5, 1.0)
    x1 = step_regularized(np.zeros(2), np.array([1.0]), np.zeros(2), single_edge, cfg)
    np.testing.assert_allclose(x1, [-0.5, 0.5], atol=1e-15)


def test_optimal_solution_single_edge(single_edge):
    spec = ProblemSpec(single_edge, nu=1.0, sigma=1.0)
    real = Realization(x_bar=np.zeros(2), noise=np.array([1.0]), b=np.array([1.0]))
    np.testing.assert_allclose(optimal_solution(real, spec, 1.0), [-1 / 3, 1 / 3], atol=1e-15)


def test_optimal_solution_consistent_data():
    g = build_cycle(7)
    x0 = np.arange(7.0)
    spec = ProblemSpec(g, nu=2.0, sigma=1.0, x0=x0)
    real = Realization(x_bar=x0, noise=np.zeros(7), b=incidence_matrix(g) @ x0)
    np.testing.assert_allclose(optimal_solution(real, spec), x0, atol=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_step_invariants(seed):
    rng = np.random.default_rng(100 + seed)
    spec, real, cfg = random_instance(rng)
    g = spec.graph
    xs = optimal_solution(real, spec, cfg.gamma)
    assert spec.x0.sum() == pytest.approx(xs.sum(), rel=1e-9, abs=1e-9)
    fixed = step_regularized(xs, real.b, spec.x0, g, cfg)
    assert np.linalg.norm(fixed - xs) <= 1e-9 * (1 + np.linalg.norm(xs))

    x = rng.normal(size=g.node_count)
    local = step_regularized(x, real.b, spec.x0, g, cfg)
    dense = dense_step(g, x, real.b, spec.x0, cfg.tau, cfg.gamma)
    np.testing.assert_allclose(local, dense, rtol=0, atol=1e-12 * max(1, np.abs(dense).max()))
    lhs = local.sum()
    rhs = (1 - cfg.tau * cfg.gamma) * x.sum() + cfg.tau * cfg.gamma * spec.x0.sum()
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)

    base = step_baseline(x, real.b, g, cfg.tau)
    assert base.sum() == pytest.approx(x.sum(), rel=1e-9, abs=1e-9)
    a = incidence_matrix(g)
    np.testing.assert_allclose(base, x - cfg.tau * laplacian(g) @ x + cfg.tau * a.T @ real.b, atol=1e-12)


def test_batched_step_matches_rows(rng):
    spec, real, cfg = random_instance(rng)
    g = spec.graph
    xs = rng.normal(size=(4, g.node_count))
    bs = rng.normal(size=(4, g.edge_count))
    batch = step_regularized(xs, bs, spec.x0, g, cfg)
    for k in range(4):
        np.testing.assert_array_equal(batch[k], step_regularized(xs[k], bs[k], spec.x0, g, cfg))


def test_baseline_noiseless_fixed_point():
    g = build_cycle(9)
    x_bar = np.random.default_rng(1).normal(size=9)
    b = incidence_matrix(g) @ x_bar
    np.testing.assert_allclose(step_baseline(x_bar, b, g, 0.4), x_bar, atol=1e-14)


def test_baseline_is_gamma_limit(rng):
    spec, real, cfg = random_instance(rng)
    g = spec.graph
    x = rng.normal(size=g.node_count)
    reg = step_regularized(x, real.b, spec.x0, g, SolverConfig(cfg.tau, 1e-15))
    np.testing.assert_allclose(reg, step_baseline(x, real.b, g, cfg.tau), atol=1e-9)


def test_run_horizon_zero(rng):
    spec, real, cfg = random_instance(rng)
    traj = run(spec, real, cfg, 0)
    assert traj.states.shape == (1, spec.graph.node_count)
    np.testing.assert_array_equal(traj.states[0], spec.x0)


def test_run_converges_single_edge(single_edge):
    spec = ProblemSpec(single_edge, nu=1.0, sigma=1.0, x0=np.array([0.3, -0.1]))
    real = sample_realization(spec, 5)
    traj = run(spec, real, SolverConfig(0.5, 1.0), 10_000)
    assert traj.horizon == 10_000
    xs = optimal_solution(real, spec, 1.0)
    assert np.linalg.norm(traj.states[-1] - xs) <= 1e-8


@pytest.mark.parametrize("algorithm", [REGULARIZED, BASELINE])
def test_run_preserves_barycenter(algorithm, rng):
    for _ in range(5):
        spec, real, cfg = random_instance(rng)
        traj = run(spec, real, cfg, 200, algorithm)
        sums = traj.states.sum(axis=1)
        ref = spec.x0.sum()
        assert np.all(np.abs(sums - ref) <= 1e-9 * max(1.0, abs(ref), np.abs(traj.states).sum(axis=1).max()))


def test_run_rejects_bad_inputs(rng):
    spec, real, cfg = random_instance(rng)
    with pytest.raises(InvalidParameterError):
        run(spec, real, cfg, -1)
    with pytest.raises(InvalidParameterError):
        run(spec, real, cfg, 3, "momentum")


def test_tau_baseline_limit():
    g = build_cycle(6)
    cfg = SolverConfig(0.4, 0.1, tau_baseline=0.6)
    with pytest.raises(StepSizeError):
        cfg.check(g)
    assert SolverConfig(0.4, 0.1, tau_baseline=0.5).baseline_tau == 0.5
    assert max_degree(g) == 2
