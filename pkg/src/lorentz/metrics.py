"""Noldus metrics, intrinsification, the pointed metric and proper rescaling."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra, shortest_path
from scipy.spatial import cKDTree

from . import kernels
from .core import FiniteLorentzianSpace, SpaceInputError, sigma


class MetricError(ValueError):
    pass


class DisconnectedGraphError(MetricError):
    pass


class DegenerateExhaustionError(MetricError):
    pass


class RatioDegenerateError(MetricError):
    def __init__(self, witnesses):
        self.witnesses = witnesses
        super().__init__(f"zero distance in exactly one table at {len(witnesses)} pairs, e.g. {witnesses[:5]}")


@dataclass(frozen=True, eq=False)
class MetricTable:
    """Symmetric nonnegative table over the points ``index`` of some space."""

    values: np.ndarray
    index: np.ndarray | None = None
    tol: float = 1e-9

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise MetricError("metric table must be square")
        if not np.array_equal(v, v.T):
            raise MetricError("metric table must be exactly symmetric")
        if (v < 0).any() or (np.diag(v) != 0).any():
            raise MetricError("metric table needs nonnegative entries and zero diagonal")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        idx = np.arange(len(v)) if self.index is None else np.asarray(self.index, dtype=int)
        object.__setattr__(self, "index", idx)

    @property
    def n(self):
        return len(self.values)

    @property
    def satisfies_triangle(self) -> bool:
        return triangle_violation(self.values) <= self.tol

    def restrict(self, positions) -> "MetricTable":
        positions = np.asarray(positions, dtype=int)
        return MetricTable(self.values[np.ix_(positions, positions)], self.index[positions], self.tol)


def triangle_violation(v) -> float:
    """max_{i,j,k} d(i,k) - d(i,j) - d(j,k), clipped at 0."""
    v = np.asarray(v, dtype=float)
    worst = 0.0
    for j in range(len(v)):
        worst = max(worst, float((v - v[:, j][:, None] - v[j][None, :]).max()))
    return worst


@dataclass
class Exhaustion:
    """Nested point subsets ``shells[0] <= shells[1] <= ...`` (as boolean masks)."""

    shells: list
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.shells = [np.asarray(s, dtype=bool) for s in self.shells]

    def __len__(self):
        return len(self.shells)

    def is_nested(self) -> bool:
        return all(not (a & ~b).any() for a, b in zip(self.shells, self.shells[1:]))

    def is_complete(self) -> bool:
        return bool(self.shells) and bool(self.shells[-1].all())

    def shell(self, m: int) -> np.ndarray:
        """``C_m``; indices past the end repeat the last shell."""
        if not self.shells:
            raise MetricError("empty exhaustion")
        return self.shells[min(m, len(self.shells) - 1)]

    def annulus_index(self) -> np.ndarray:
        """First shell index containing each point (len(shells) when none)."""
        n = len(self.shells[0])
        out = np.full(n, len(self.shells))
        for k in range(len(self.shells) - 1, -1, -1):
            out[self.shells[k]] = k
        return out


def _subset(space, U):
    if U is None or (isinstance(U, str) and U == "all"):
        return np.arange(space.n)
    U = np.asarray(U)
    if U.dtype == bool:
        U = np.flatnonzero(U)
    if len(U) == 0:
        raise SpaceInputError("subset must be nonempty")
    return U.astype(int)


def signed_power(s, p):
    return np.sign(s) * np.abs(s) ** p


def noldus_raw(space: FiniteLorentzianSpace, U=None, p: float = 2.0, q: float = 1.0) -> MetricTable:
    """(p, q)-Noldus distance of the points of ``U`` against the test points ``U``."""
    if not (p > 0 and q > 0):
        raise MetricError("Noldus exponents must be positive")
    U = _subset(space, U)
    S = sigma(space)[np.ix_(U, U)]
    F = signed_power(S, p)
    D = kernels.sup_distance(F, F) ** q
    D = 0.5 * (D + D.T)
    np.fill_diagonal(D, 0.0)
    return MetricTable(D, U)


def noldus_compact(space: FiniteLorentzianSpace, K, points=None) -> MetricTable:
    """sup_{z in K} |tau(x,z) - tau(y,z)| over ``points`` (default: all)."""
    K = _subset(space, K)
    pts = _subset(space, points)
    F = space.tau[np.ix_(pts, K)]
    D = kernels.sup_distance(F, F)
    np.fill_diagonal(D, 0.0)
    return MetricTable(np.maximum(D, D.T), pts)


def knn_graph(coords, k: int = 8):
    """Symmetrized k-nearest-neighbour adjacency (boolean) on coordinate rows."""
    coords = np.asarray(coords, dtype=float)
    n = len(coords)
    k = min(k, n - 1)
    _, nb = cKDTree(coords).query(coords, k=k + 1)
    A = np.zeros((n, n), dtype=bool)
    rows = np.repeat(np.arange(n), k)
    A[rows, nb[:, 1:].ravel()] = True
    return A | A.T


def grid_graph(coords, spacing: float, diagonal: bool = True):
    """Adjacency of points within one (or sqrt(2) with ``diagonal``) grid step."""
    r = spacing * (np.sqrt(2) if diagonal else 1.0) * (1 + 1e-9)
    pairs = cKDTree(np.asarray(coords, dtype=float)).query_pairs(r, output_type="ndarray")
    n = len(coords)
    A = np.zeros((n, n), dtype=bool)
    A[pairs[:, 0], pairs[:, 1]] = True
    return A | A.T


def _graph_closure(weights, graph):
    graph = np.asarray(graph, dtype=bool)
    n = len(graph)
    ii, jj = np.nonzero(graph & ~np.eye(n, dtype=bool))
    w = weights[ii, jj]
    # csgraph drops explicit zeros; keep zero-length edges as tiny positives then snap back
    zero = w <= 0
    w = np.where(zero, 1e-300, w)
    G = csr_matrix((w, (ii, jj)), shape=(n, n))
    ncomp, _ = connected_components(G, directed=False)
    if ncomp != 1:
        raise DisconnectedGraphError(f"neighbour graph has {ncomp} components")
    D = shortest_path(G, method="D", directed=False)
    D[D < 1e-200] = 0.0
    D = np.minimum(D, D.T)
    np.fill_diagonal(D, 0.0)
    return D


def intrinsify_metric(table: MetricTable, neighbor_graph=None) -> MetricTable:
    """Shortest-path closure of ``table`` along the edges of ``neighbor_graph``.

    ``None`` means the complete graph.
    """
    v = table.values
    if neighbor_graph is None:
        neighbor_graph = np.ones_like(v, dtype=bool)
    D = _graph_closure(v, neighbor_graph)
    # shortest paths can undercut a direct edge only by rounding; never go below the input on edges
    return MetricTable(D, table.index, table.tol)


def pointed_metric(space: FiniteLorentzianSpace, exhaustion: Exhaustion, M: int = 10):
    """Truncated sum_{m=0}^{M} 2^-m arctan(d_{N, C_m}); returns ``(table, tail_bound)``."""
    if len(exhaustion) == 0:
        raise MetricError("empty exhaustion")
    total = np.zeros((space.n, space.n))
    for m in range(M + 1):
        K = exhaustion.shell(m)
        if not K.any():
            continue
        total += 2.0 ** -m * np.arctan(noldus_compact(space, K).values)
    tail = np.pi / 2 * 2.0 ** -M
    return MetricTable(np.maximum(total, total.T)), tail


def _annulus_width(D, graph, inner, shell):
    """Graph distance inside ``shell`` from ``inner`` to the points of ``shell``
    that have a neighbour outside it. ``None`` if ``shell`` has no outside."""
    edge_out = (graph & ~shell[None, :]).any(axis=1) & shell
    if not edge_out.any():
        return None
    if (edge_out & inner).any():
        return 0.0
    ids = np.flatnonzero(shell)
    sub = graph[np.ix_(ids, ids)]
    ii, jj = np.nonzero(np.triu(sub, 1))
    w = np.maximum(D[ids[ii], ids[jj]], 1e-300)
    G = csr_matrix((w, (ii, jj)), shape=(len(ids), len(ids)))
    src = np.flatnonzero(inner[ids])
    dist = dijkstra(G, directed=False, indices=src, min_only=True)
    return float(dist[edge_out[ids]].min())


def properize(table: MetricTable, exhaustion: Exhaustion, neighbor_graph, return_profile=False):
    """Shell-wise rescaled intrinsic metric.

    ``eps_n`` is the graph length (edge weights from ``table``) of the
    shortest path inside ``C_n`` from ``C_{n-1}`` to a point of ``C_n`` with
    a neighbour outside ``C_n``. The density ``f = 1/eps_n`` sits on the
    annulus ``C_n minus C_{n-1}`` (cumulative max, so ``f`` never decreases
    outward) and an edge ``(u, v)`` costs ``max(f(u), f(v)) D(u, v)``.
    Those crossing paths are edge-disjoint for successive annuli, so
    reaching ``X minus C_{n-1}`` from ``C_1`` costs at least ``n - 2``.
    """
    D = table.values
    shells = exhaustion.shells
    if len(shells) < 3:
        raise DegenerateExhaustionError("need at least three shells")
    n = len(D)
    graph = np.asarray(neighbor_graph, dtype=bool)
    graph = (graph | graph.T) & ~np.eye(n, dtype=bool)
    eps = []
    for k in range(1, len(shells)):
        inner, shell = shells[k - 1], shells[k]
        if not inner.any():
            eps.append(None)
            continue
        e = _annulus_width(D, graph, inner, shell)
        if e is not None and not e > 0:
            raise DegenerateExhaustionError(f"annulus {k} has zero width")
        if e is not None and not np.isfinite(e):
            raise DisconnectedGraphError(f"shell {k} does not connect its core to its boundary")
        eps.append(e)
    known = [e for e in eps if e is not None]
    if not known:
        raise DegenerateExhaustionError("no annulus has a nonempty outside")
    # shells whose outside is empty inherit the previous width
    filled, last = [], known[0]
    for e in eps:
        last = e if e is not None else last
        filled.append(last)
    dens = np.maximum.accumulate(1.0 / np.asarray(filled))
    level = exhaustion.annulus_index()
    f = np.empty(n)
    f[level == 0] = dens[0]
    for k in range(1, len(shells)):
        f[level == k] = dens[k - 1]
    f[level >= len(shells)] = dens[-1]
    W = np.maximum(f[:, None], f[None, :]) * D
    out = MetricTable(_graph_closure(W, neighbor_graph), table.index, table.tol)
    return (out, f) if return_profile else out


def set_distance(table: MetricTable, A, B) -> float:
    A = np.asarray(A)
    B = np.asarray(B)
    return float(table.values[np.ix_(np.flatnonzero(A) if A.dtype == bool else A,
                                     np.flatnonzero(B) if B.dtype == bool else B)].min())


def bilipschitz_estimate(tableA: MetricTable, tableB: MetricTable, region=None):
    """``(c_lo, C_hi)``: min and max of B/A over off-diagonal pairs of ``region``."""
    A = tableA.values
    B = tableB.values
    if A.shape != B.shape:
        raise MetricError("tables must share their point set")
    idx = np.arange(len(A)) if region is None else np.asarray(region, dtype=int)
    a = A[np.ix_(idx, idx)]
    b = B[np.ix_(idx, idx)]
    off = ~np.eye(len(idx), dtype=bool)
    za, zb = (a == 0) & off, (b == 0) & off
    bad = za ^ zb
    if bad.any():
        ii, jj = np.nonzero(bad)
        raise RatioDegenerateError([(int(idx[i]), int(idx[j])) for i, j in zip(ii, jj)])
    use = off & ~za
    if not use.any():
        return 1.0, 1.0
    r = b[use] / a[use]
    return float(r.min()), float(r.max())
