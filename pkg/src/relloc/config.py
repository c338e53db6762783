"""Experiment configuration: flat ``key = value`` files plus command-line overrides.

Example file::

    graph.family = cycle
    graph.n = 160
    nu = 20
    sigma = 1
    epsilon = 0.01
    horizon = 10000
    trials = 200
    seed = 1
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, InvalidParameterError
from .graph import (
    build_complete,
    build_cycle,
    build_erdos_renyi,
    build_path,
    build_torus_grid,
    read_edge_list,
)

FAMILIES = ("cycle", "path", "complete", "torus", "erdos_renyi", "file")


def _int(text):
    return int(text)


def _float(text):
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"{text!r} is not finite")
    return value


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"{text!r} is not a boolean")


def _str(text):
    return text.strip()


def _int_list(text):
    return tuple(int(v) for v in text.replace(",", " ").split())


def _float_list(text):
    return tuple(_float(v) for v in text.replace(",", " ").split())


def _str_list(text):
    return tuple(v for v in text.replace(",", " ").split())


# config key -> (dataclass field, parser)
KEYS = {
    "graph.family": ("family", _str),
    "graph.n": ("n", _int),
    "graph.rows": ("rows", _int),
    "graph.cols": ("cols", _int),
    "graph.p": ("p", _float),
    "graph.path": ("graph_path", _str),
    "graph.seed": ("graph_seed", _int),
    "sigma": ("sigma", _float),
    "nu": ("nu", _float),
    "x0": ("x0", _float),
    "tau": ("tau", _float),
    "tau_baseline": ("tau_baseline", _float),
    "enforce_assumption": ("enforce_assumption", _bool),
    "epsilon": ("epsilon", _float),
    "horizon": ("horizon", _int),
    "trials": ("trials", _int),
    "samples": ("samples", _int),
    "seed": ("seed", _int),
    "out": ("out", _str),
    "sweep.family": ("sweep_family", _str_list),
    "sweep.n": ("sweep_n", _int_list),
    "sweep.epsilon": ("sweep_epsilon", _float_list),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment settings.

    Defaults reproduce the cycle experiment (N=160, nu=20, sigma=1,
    epsilon=0.01).  ``tau=None`` selects ``1/(d_max + gamma)``;
    ``graph_seed=None`` reuses ``seed``; ``x0`` fills the prior mean vector.
    """

    family: str = "cycle"
    n: int = 160
    rows: int | None = None
    cols: int | None = None
    p: float = 0.3
    graph_path: str | None = None
    graph_seed: int | None = None
    sigma: float = 1.0
    nu: float = 20.0
    x0: float = 0.0
    tau: float | None = None
    tau_baseline: float | None = None
    enforce_assumption: bool = True
    epsilon: float = 0.01
    horizon: int = 1000
    trials: int = 100
    samples: int = 5
    seed: int = 0
    out: str | None = None
    sweep_family: tuple = ()
    sweep_n: tuple = ()
    sweep_epsilon: tuple = ()

    def __post_init__(self):
        def bad(key, msg):
            raise ConfigError(key, msg)

        if self.family not in FAMILIES:
            bad("graph.family", f"must be one of {', '.join(FAMILIES)}, got {self.family!r}")
        if self.family == "file" and not self.graph_path:
            bad("graph.path", "required when graph.family = file")
        if self.family == "torus" and (self.rows is None or self.cols is None):
            bad("graph.rows", "torus needs graph.rows and graph.cols")
        if self.rows is not None and self.rows < 2:
            bad("graph.rows", f"must be >= 2, got {self.rows}")
        if self.cols is not None and self.cols < 2:
            bad("graph.cols", f"must be >= 2, got {self.cols}")
        if self.n < 2 or (self.family == "cycle" and self.n < 3):
            bad("graph.n", f"too small for {self.family}: {self.n}")
        if not 0 < self.p <= 1:
            bad("graph.p", f"must lie in (0, 1], got {self.p}")
        for key, value in (("sigma", self.sigma), ("nu", self.nu), ("epsilon", self.epsilon)):
            if not value > 0:
                bad(key, f"must be positive, got {value}")
        if self.tau is not None and not self.tau > 0:
            bad("tau", f"must be positive, got {self.tau}")
        if self.tau_baseline is not None and not self.tau_baseline > 0:
            bad("tau_baseline", f"must be positive, got {self.tau_baseline}")
        if self.horizon < 0:
            bad("horizon", f"must be >= 0, got {self.horizon}")
        if self.trials < 0:
            bad("trials", f"must be >= 0, got {self.trials}")
        if self.samples < 0:
            bad("samples", f"must be >= 0, got {self.samples}")
        for fam in self.sweep_family:
            if fam not in FAMILIES or fam == "file":
                bad("sweep.family", f"cannot sweep family {fam!r}")
        for n in self.sweep_n:
            if n < 2:
                bad("sweep.n", f"node counts must be >= 2, got {n}")
        for eps in self.sweep_epsilon:
            if not eps > 0:
                bad("sweep.epsilon", f"must be positive, got {eps}")

    @property
    def gamma(self):
        return self.sigma**2 / self.nu**2

    def resolved(self):
        """``key -> value`` mapping of every result-affecting setting, for output headers."""
        out = {}
        for key, (name, _) in KEYS.items():
            if key == "out":
                continue
            value = getattr(self, name)
            if isinstance(value, tuple):
                value = ",".join(str(v) for v in value)
            out[key] = value
        return out


def parse_pairs(text, source="<config>"):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}", f"expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(key, f"unknown key ({source}:{lineno})")
        pairs[key] = value
    return pairs


def load_config(path=None, overrides=None):
    """Build an :class:`ExperimentConfig` from an optional file and string overrides."""
    pairs = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError("--config", f"cannot read {path}: {exc}") from exc
        pairs.update(parse_pairs(text, str(path)))
    for key, value in (overrides or {}).items():
        if key not in KEYS:
            raise ConfigError(key, "unknown key")
        pairs[key] = value
    kwargs = {}
    for key, value in pairs.items():
        name, parse = KEYS[key]
        if isinstance(value, str):
            try:
                value = parse(value)
            except ValueError as exc:
                raise ConfigError(key, f"cannot parse {value!r}: {exc}") from exc
        kwargs[name] = value
    return ExperimentConfig(**kwargs)


def _torus_shape(n):
    """Most nearly square ``rows x cols = n`` with both sides >= 2."""
    for rows in range(int(math.isqrt(n)), 1, -1):
        if n % rows == 0:
            return rows, n // rows
    raise ConfigError("graph.n", f"{n} has no factorization rows x cols with both >= 2")


def build_graph(cfg, family=None, n=None):
    """Graph described by ``cfg``; ``family``/``n`` override it for sweeps."""
    sweeping = n is not None
    family = cfg.family if family is None else family
    n = cfg.n if n is None else n
    seed = cfg.seed if cfg.graph_seed is None else cfg.graph_seed
    try:
        if family == "cycle":
            return build_cycle(n)
        if family == "path":
            return build_path(n)
        if family == "complete":
            return build_complete(n)
        if family == "torus":
            if sweeping:
                return build_torus_grid(*_torus_shape(n))
            return build_torus_grid(cfg.rows, cfg.cols)
        if family == "erdos_renyi":
            return build_erdos_renyi(n, cfg.p, seed)
        if family == "file":
            return read_edge_list(cfg.graph_path)
    except InvalidParameterError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("graph", str(exc)) from exc
    raise ConfigError("graph.family", f"unknown family {family!r}")
