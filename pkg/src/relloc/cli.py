"""``relloc`` command-line entry point.

    relloc analyze|simulate|compare|sweep [--config FILE] [--KEY VALUE ...] --out DIR

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analysis, montecarlo
from .config import KEYS, build_graph, load_config
from .errors import ConfigError, GraphConstructionError, InvalidParameterError, NumericalError
from .graph import max_degree, spectrum
from .output import write_csv, write_summary
from .problem import ProblemSpec
from .solver import REGULARIZED, SolverConfig, default_tau

log = logging.getLogger("relloc")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


@dataclass
class Setup:
    graph: object
    spec: ProblemSpec
    solver: SolverConfig
    spectrum: object
    qs: object

    @property
    def tau(self):
        return self.solver.tau


def prepare(cfg, family=None, n=None, tau=None):
    g = build_graph(cfg, family, n)
    gamma = cfg.gamma
    tau = tau if tau is not None else (cfg.tau if cfg.tau is not None else default_tau(g, gamma))
    spec = ProblemSpec(g, nu=cfg.nu, sigma=cfg.sigma, x0=np.full(g.node_count, cfg.x0))
    solver = SolverConfig(tau, gamma, cfg.enforce_assumption, cfg.tau_baseline)
    solver.check(g)
    spec_l = spectrum(g)
    if cfg.enforce_assumption:
        qs = analysis.q_spectrum(spec_l, tau, gamma)
    else:
        qs = analysis.QSpectrum(xi=(1 - tau * gamma) - tau * spec_l.eigenvalues, tau=tau, gamma=gamma)
    return Setup(g, spec, solver, spec_l, qs)


def _meta(cfg, setup, command):
    meta = {"command": command, **cfg.resolved()}
    meta["graph.name"] = setup.graph.name
    meta["graph.edges"] = setup.graph.edge_count
    meta["gamma"] = cfg.gamma
    meta["tau.resolved"] = setup.tau
    return meta


def _theory(cfg, setup, horizon):
    curve = analysis.closed_form_mse(setup.qs, setup.tau, cfg.sigma, cfg.nu, horizon)
    h_inf = analysis.asymptotic_mse(setup.spectrum, cfg.sigma, cfg.gamma)
    return curve.values, h_inf


def _out_dir(cfg):
    if not cfg.out:
        raise ConfigError("out", "an output directory is required (--out DIR)")
    path = Path(cfg.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _theory_summary(cfg, setup, h_inf):
    a = analysis.alpha(setup.tau, cfg.gamma)
    return {
        "gamma": cfg.gamma,
        "tau": setup.tau,
        "max_degree": max_degree(setup.graph),
        "alpha": a,
        "H_inf": h_inf,
        "t_star_exact": analysis.stopping_time_exact(setup.qs, setup.tau, cfg.sigma, cfg.nu, cfg.epsilon),
        "intermediate_bound": analysis.tightest_intermediate_bound(a, cfg.epsilon),
        "universal_bound": analysis.stopping_time_bound(a, cfg.epsilon),
    }


def cmd_analyze(cfg):
    out = _out_dir(cfg)
    setup = prepare(cfg)
    values, h_inf = _theory(cfg, setup, cfg.horizon)
    t = np.arange(cfg.horizon + 1)
    meta = _meta(cfg, setup, "analyze")
    columns = {
        "t": t,
        "H_t": values,
        "H_inf": np.full(t.size, h_inf),
        "threshold": np.full(t.size, (1 + cfg.epsilon) * h_inf),
    }
    write_csv(out / "theory.csv", columns, meta)
    summary = _theory_summary(cfg, setup, h_inf)
    write_summary(out / "summary.txt", summary, meta)
    return {"theory.csv": out / "theory.csv", "summary.txt": out / "summary.txt", "summary": summary}


def cmd_simulate(cfg, threads=None):
    out = _out_dir(cfg)
    setup = prepare(cfg)
    values, _ = _theory(cfg, setup, cfg.horizon)
    t = np.arange(cfg.horizon + 1)
    meta = _meta(cfg, setup, "simulate")
    if cfg.trials == 0:
        log.warning("trials = 0: writing closed-form columns only")
        columns = {"t": t, "H_t": values}
    else:
        curve = montecarlo.empirical_mse(
            setup.spec, setup.solver, REGULARIZED, cfg.horizon, cfg.trials, cfg.seed, cfg.samples, threads
        )
        columns = {"t": t, "mean": curve.mean, "stderr": curve.stderr, "H_t": values}
        if curve.samples is not None:
            for k, row in enumerate(curve.samples):
                columns[f"realization_{k}"] = row
    write_csv(out / "empirical.csv", columns, meta)
    return {"empirical.csv": out / "empirical.csv"}


def cmd_compare(cfg, threads=None):
    out = _out_dir(cfg)
    if cfg.trials < 1:
        raise ConfigError("trials", "compare needs at least one trial")
    setup = prepare(cfg)
    reg, base = montecarlo.compare_algorithms(
        setup.spec, setup.solver, cfg.horizon, cfg.trials, cfg.seed, cfg.samples, threads
    )
    t = np.arange(cfg.horizon + 1)
    columns = {
        "t": t,
        "mean_regularized": reg.mean,
        "stderr_regularized": reg.stderr,
        "mean_baseline": base.mean,
        "stderr_baseline": base.stderr,
    }
    if reg.samples is not None:
        for k in range(len(reg.samples)):
            columns[f"regularized_{k}"] = reg.samples[k]
            columns[f"baseline_{k}"] = base.samples[k]
    meta = _meta(cfg, setup, "compare")
    write_csv(out / "compare.csv", columns, meta)

    t_min, v_min = montecarlo.interior_minimum(base.mean)
    a = analysis.alpha(setup.tau, cfg.gamma)
    summary = {
        "gamma": cfg.gamma,
        "tau": setup.tau,
        "tau_baseline": setup.solver.baseline_tau,
        "alpha": a,
        "baseline_min_time": t_min,
        "baseline_min_value": v_min,
        "baseline_final_value": base.mean[-1],
        "baseline_interior_minimum": 0 < t_min < cfg.horizon,
        "regularized_final_value": reg.mean[-1],
        "H_inf": analysis.asymptotic_mse(setup.spectrum, cfg.sigma, cfg.gamma),
        "universal_bound": analysis.stopping_time_bound(a, cfg.epsilon),
    }
    write_summary(out / "summary.txt", summary, meta)
    return {"compare.csv": out / "compare.csv", "summary.txt": out / "summary.txt", "summary": summary}


def sweep_rows(cfg):
    """One theory row per (family, N, epsilon) combination."""
    families = cfg.sweep_family or (cfg.family,)
    sizes = cfg.sweep_n or (cfg.n,)
    epsilons = cfg.sweep_epsilon or (cfg.epsilon,)
    rows = []
    for family in families:
        for n in sizes:
            setup = prepare(cfg, family, n)
            h_inf = analysis.asymptotic_mse(setup.spectrum, cfg.sigma, cfg.gamma)
            a = analysis.alpha(setup.tau, cfg.gamma)
            for eps in epsilons:
                rows.append({
                    "family": family,
                    "N": setup.graph.node_count,
                    "epsilon": eps,
                    "max_degree": max_degree(setup.graph),
                    "tau": setup.tau,
                    "alpha": a,
                    "H_inf": h_inf,
                    "t_star": analysis.stopping_time_exact(setup.qs, setup.tau, cfg.sigma, cfg.nu, eps),
                    "intermediate_bound": analysis.tightest_intermediate_bound(a, eps),
                    "bound": analysis.stopping_time_bound(a, eps),
                })
    return rows


def cmd_sweep(cfg):
    out = _out_dir(cfg)
    rows = sweep_rows(cfg)
    columns = {key: [row[key] for row in rows] for key in rows[0]}
    meta = {"command": "sweep", **cfg.resolved(), "gamma": cfg.gamma}
    write_csv(out / "sweep.csv", columns, meta)
    return {"sweep.csv": out / "sweep.csv", "rows": rows}


COMMANDS = {
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="relloc", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument("--out", dest="out", help="output directory")
    parser.add_argument("-v", "--verbose", action="store_true")
    for key in KEYS:
        if key == "out":
            continue
        parser.add_argument(f"--{key}", dest=key, default=None, metavar="VALUE")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="relloc: %(levelname)s: %(message)s",
    )
    overrides = {key: getattr(args, key) for key in KEYS if getattr(args, key, None) is not None}
    try:
        cfg = load_config(args.config, overrides)
        result = COMMANDS[args.command](cfg)
    except (ConfigError, InvalidParameterError, GraphConstructionError) as exc:
        print(f"relloc: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"relloc: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for name, path in result.items():
        if isinstance(path, Path):
            log.info("wrote %s", path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
