"""Undirected connected graphs with a canonical edge orientation.

Edges are stored as ``(u, v)`` with ``u < v``; the incidence matrix puts -1 on
the starting node ``u`` and +1 on the terminating node ``v``.  All matrices are
dense numpy arrays.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import GraphConstructionError, InvalidParameterError, NumericalError

__all__ = [
    "Graph",
    "LaplacianSpectrum",
    "build_cycle",
    "build_path",
    "build_complete",
    "build_torus_grid",
    "build_erdos_renyi",
    "incidence_matrix",
    "laplacian",
    "eigendecomposition",
    "spectrum",
    "max_degree",
    "read_edge_list",
    "write_edge_list",
]

ER_MAX_ATTEMPTS = 100


def _is_connected(n, edges):
    adj = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen = [False] * n
    seen[0] = True
    queue = deque([0])
    count = 1
    while queue:
        i = queue.popleft()
        for j in adj[i]:
            if not seen[j]:
                seen[j] = True
                count += 1
                queue.append(j)
    return count == n


@dataclass(frozen=True)
class Graph:
    """Immutable undirected connected graph on nodes ``0..node_count-1``."""

    node_count: int
    edges: tuple[tuple[int, int], ...]
    name: str = field(default="graph", compare=False)

    def __post_init__(self):
        n = self.node_count
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise InvalidParameterError(f"node_count must be a positive integer, got {n!r}")
        edges = tuple((int(u), int(v)) for u, v in self.edges)
        seen = set()
        for u, v in edges:
            if not 0 <= u < v <= n - 1:
                raise InvalidParameterError(f"edge ({u}, {v}) violates 0 <= u < v <= {n - 1}")
            if (u, v) in seen:
                raise InvalidParameterError(f"duplicate edge ({u}, {v})")
            seen.add((u, v))
        object.__setattr__(self, "node_count", int(n))
        object.__setattr__(self, "edges", edges)
        if not _is_connected(n, edges):
            raise GraphConstructionError(f"{self.name} on {n} nodes is not connected")

    @classmethod
    def from_pairs(cls, n, pairs, name="graph"):
        """Build from arbitrary unordered pairs, orienting each as (min, max)."""
        edges = []
        for a, b in pairs:
            a, b = int(a), int(b)
            if a == b:
                raise InvalidParameterError(f"self-loop at node {a}")
            edges.append((min(a, b), max(a, b)))
        return cls(n, tuple(edges), name=name)

    @property
    def edge_count(self):
        return len(self.edges)

    @cached_property
    def edge_array(self):
        """``(M, 2)`` int array of ``(start, end)`` pairs."""
        arr = np.array(self.edges, dtype=np.intp).reshape(-1, 2)
        arr.setflags(write=False)
        return arr

    @cached_property
    def degrees(self):
        deg = np.zeros(self.node_count, dtype=np.int64)
        np.add.at(deg, self.edge_array[:, 0], 1)
        np.add.at(deg, self.edge_array[:, 1], 1)
        deg.setflags(write=False)
        return deg

    @cached_property
    def neighbor_table(self):
        """Padded ``(N, d_max)`` neighbor indices; padding points at index ``N``.

        Callers append a zero entry to the state vector so padded slots read 0.
        """
        return self._local_tables[0]

    @cached_property
    def incident_edge_table(self):
        """Padded ``(N, d_max)`` incident-edge indices (padding = ``M``) and signs.

        The sign is +1 where the node terminates the edge, -1 where it starts it,
        and 0 in padding slots.
        """
        return self._local_tables[1], self._local_tables[2]

    @cached_property
    def _local_tables(self):
        n, m = self.node_count, self.edge_count
        width = max(int(self.degrees.max()), 1) if m else 1
        nbr = np.full((n, width), n, dtype=np.intp)
        inc = np.full((n, width), m, dtype=np.intp)
        sign = np.zeros((n, width), dtype=np.float64)
        fill = np.zeros(n, dtype=np.intp)
        for e, (u, v) in enumerate(self.edges):
            k = fill[u]
            nbr[u, k], inc[u, k], sign[u, k] = v, e, -1.0
            fill[u] += 1
            k = fill[v]
            nbr[v, k], inc[v, k], sign[v, k] = u, e, 1.0
            fill[v] += 1
        for arr in (nbr, inc, sign):
            arr.setflags(write=False)
        return nbr, inc, sign


@dataclass(frozen=True)
class LaplacianSpectrum:
    """Ascending Laplacian eigenvalues; ``eigenvalues[0]`` is exactly 0."""

    eigenvalues: np.ndarray
    max_degree: int

    @property
    def node_count(self):
        return len(self.eigenvalues)


def build_cycle(n):
    if n < 3:
        raise InvalidParameterError(f"cycle needs n >= 3, got {n}")
    edges = [(i, i + 1) for i in range(n - 1)] + [(0, n - 1)]
    return Graph(n, tuple(edges), name=f"cycle({n})")


def build_path(n):
    if n < 2:
        raise InvalidParameterError(f"path needs n >= 2, got {n}")
    return Graph(n, tuple((i, i + 1) for i in range(n - 1)), name=f"path({n})")


def build_complete(n):
    if n < 2:
        raise InvalidParameterError(f"complete graph needs n >= 2, got {n}")
    edges = tuple((i, j) for i in range(n) for j in range(i + 1, n))
    return Graph(n, edges, name=f"complete({n})")


def build_torus_grid(rows, cols):
    """Grid with wrap-around in both directions.

    With a side of length 2 the wrap-around edge coincides with the direct one
    and is kept once.
    """
    if rows < 2 or cols < 2:
        raise InvalidParameterError(f"torus needs rows, cols >= 2, got {rows}x{cols}")
    pairs = set()
    for r in range(rows):
        for c in range(cols):
            i = r * cols + c
            for j in (r * cols + (c + 1) % cols, ((r + 1) % rows) * cols + c):
                pairs.add((min(i, j), max(i, j)))
    return Graph(rows * cols, tuple(sorted(pairs)), name=f"torus({rows}x{cols})")


def build_erdos_renyi(n, p, rng_seed):
    """G(n, p) conditioned on connectivity.

    Attempt ``k`` (0-based) uses seed ``rng_seed + k``; gives up after 100 tries.
    """
    if n < 2:
        raise InvalidParameterError(f"Erdos-Renyi graph needs n >= 2, got {n}")
    if not 0.0 < p <= 1.0:
        raise InvalidParameterError(f"edge probability must lie in (0, 1], got {p}")
    iu, ju = np.triu_indices(n, k=1)
    for attempt in range(ER_MAX_ATTEMPTS):
        rng = np.random.default_rng(rng_seed + attempt)
        keep = rng.random(iu.size) < p
        edges = tuple(zip(iu[keep].tolist(), ju[keep].tolist()))
        if _is_connected(n, edges):
            return Graph(n, edges, name=f"erdos_renyi({n},{p})")
    raise GraphConstructionError(
        f"no connected G({n}, {p}) found in {ER_MAX_ATTEMPTS} attempts from seed {rng_seed}"
    )


def incidence_matrix(g):
    """``(M, N)`` integer matrix: -1 at the start node, +1 at the end node of each edge."""
    a = np.zeros((g.edge_count, g.node_count), dtype=np.int64)
    rows = np.arange(g.edge_count)
    a[rows, g.edge_array[:, 0]] = -1
    a[rows, g.edge_array[:, 1]] = 1
    return a


def laplacian(g):
    """Integer Laplacian, equal to ``A.T @ A``; accumulated edge by edge."""
    n = g.node_count
    lap = np.zeros((n, n), dtype=np.int64)
    u, v = g.edge_array[:, 0], g.edge_array[:, 1]
    lap[u, v] -= 1
    lap[v, u] -= 1
    lap[np.arange(n), np.arange(n)] = g.degrees
    return lap


def max_degree(g):
    return int(g.degrees.max())


def eigendecomposition(g):
    """Ascending eigenvalues and orthonormal eigenvectors (columns) of the Laplacian."""
    lap = laplacian(g).astype(np.float64)
    try:
        vals, vecs = np.linalg.eigh(lap)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed for {g.name}: {exc}") from exc
    return vals, vecs


def spectrum(g):
    """Validated Laplacian spectrum.

    The smallest eigenvalue is checked against ``1e-9 * lambda_max`` and then
    set to exactly zero.
    """
    vals, _ = eigendecomposition(g)
    vals = vals.copy()
    dmax = max_degree(g) if g.edge_count else 0
    top = vals[-1] if vals.size > 1 else 0.0
    scale = max(top, 1.0)
    if abs(vals[0]) > 1e-9 * scale:
        raise NumericalError(f"smallest Laplacian eigenvalue {vals[0]:.3e} is not zero")
    if vals.size > 1 and vals[1] <= 1e-9 * scale:
        raise NumericalError(f"second Laplacian eigenvalue {vals[1]:.3e} is not positive")
    if top > 2 * dmax + 1e-9 * scale:
        raise NumericalError(f"largest Laplacian eigenvalue {top} exceeds 2*d_max = {2 * dmax}")
    vals[0] = 0.0
    vals.setflags(write=False)
    return LaplacianSpectrum(eigenvalues=vals, max_degree=dmax)


def read_edge_list(path):
    """Parse the ``N M`` header plus ``M`` lines of ``u v``; blank lines are ignored."""
    lines = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines or len(lines[0]) != 2:
        raise InvalidParameterError(f"{path}: first line must be 'N M'")
    try:
        n, m = int(lines[0][0]), int(lines[0][1])
        pairs = [(int(a), int(b)) for a, b in (ln for ln in lines[1:])]
    except ValueError as exc:
        raise InvalidParameterError(f"{path}: malformed edge list ({exc})") from exc
    if len(pairs) != m:
        raise InvalidParameterError(f"{path}: header declares {m} edges, found {len(pairs)}")
    return Graph.from_pairs(n, pairs, name=Path(path).name)


def write_edge_list(g, path):
    body = [f"{g.node_count} {g.edge_count}"] + [f"{u} {v}" for u, v in g.edges]
    Path(path).write_text("\n".join(body) + "\n")
