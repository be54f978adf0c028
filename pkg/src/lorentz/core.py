"""Finite Lorentzian spaces: representation, axiom checks, cones and chain-tau."""
from __future__ import annotations

from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from typing import Iterable, Sequence

import numpy as np

from . import kernels

MARKS = ("interior", "past-ideal", "future-ideal")


class SpaceInputError(ValueError):
    """Malformed matrices, chains or subsets."""


class CausalityError(ValueError):
    """The causal graph contains a cycle."""


@dataclass(frozen=True, eq=False)
class FiniteLorentzianSpace:
    """A finite causal set with time separation.

    ``leq[i, j]`` encodes ``i <= j`` and ``tau[i, j]`` the time separation.
    ``links`` are the weighted DAG edges that chain-tau was computed from
    (empty for oracle-tau fixtures that were not intrinsified).
    """

    leq: np.ndarray
    tau: np.ndarray
    coords: np.ndarray | None = None
    base_dist: np.ndarray | None = None
    marks: tuple[str, ...] | None = None
    links: tuple[tuple[int, int, float], ...] = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        leq = np.asarray(self.leq, dtype=bool)
        tau = np.asarray(self.tau, dtype=float)
        if leq.ndim != 2 or leq.shape[0] != leq.shape[1]:
            raise SpaceInputError(f"leq must be square, got {leq.shape}")
        if tau.shape != leq.shape:
            raise SpaceInputError(f"tau shape {tau.shape} != leq shape {leq.shape}")
        if not np.isfinite(tau).all():
            raise SpaceInputError("tau must be finite")
        n = leq.shape[0]
        leq.setflags(write=False)
        tau.setflags(write=False)
        object.__setattr__(self, "leq", leq)
        object.__setattr__(self, "tau", tau)
        if self.coords is not None:
            c = np.asarray(self.coords, dtype=float)
            if c.ndim == 1:
                c = c[:, None]
            if c.shape[0] != n:
                raise SpaceInputError("coords must have one row per point")
            c.setflags(write=False)
            object.__setattr__(self, "coords", c)
        if self.base_dist is not None:
            d = np.asarray(self.base_dist, dtype=float)
            if d.shape != (n, n):
                raise SpaceInputError("base_dist must be n x n")
            d.setflags(write=False)
            object.__setattr__(self, "base_dist", d)
        if self.marks is not None:
            marks = tuple(self.marks)
            if len(marks) != n or any(m not in MARKS for m in marks):
                raise SpaceInputError("marks must be one of %s per point" % (MARKS,))
            object.__setattr__(self, "marks", marks)

    @property
    def n(self) -> int:
        return self.leq.shape[0]

    def subspace(self, idx) -> "FiniteLorentzianSpace":
        """Restriction to the points ``idx`` (in that order)."""
        idx = np.asarray(idx, dtype=int)
        pos = {int(v): k for k, v in enumerate(idx)}
        links = tuple((pos[i], pos[j], w) for i, j, w in self.links if i in pos and j in pos)
        return FiniteLorentzianSpace(
            leq=self.leq[np.ix_(idx, idx)],
            tau=self.tau[np.ix_(idx, idx)],
            coords=None if self.coords is None else self.coords[idx],
            base_dist=None if self.base_dist is None else self.base_dist[np.ix_(idx, idx)],
            marks=None if self.marks is None else tuple(self.marks[i] for i in idx),
            links=links,
            meta=dict(self.meta),
        )

    def relabel(self, perm) -> "FiniteLorentzianSpace":
        """Space whose point ``k`` is this space's point ``perm[k]``."""
        return self.subspace(perm)


@dataclass
class AxiomReport:
    passed: bool
    violations: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)

    def __bool__(self):
        return self.passed


def _check_tol(tol):
    if not tol > 0:
        raise SpaceInputError("axiom tolerance must be positive")


def validate_axioms(space: FiniteLorentzianSpace, tol: float = 1e-9, limit: int = 50,
                    check_order: bool = True) -> AxiomReport:
    """Check the order axioms and the reverse triangle inequality.

    ``check_order=False`` skips antisymmetry of ``leq`` (preorders pass).
    Violations are ``(axiom, witness, defect)`` tuples; at most ``limit`` are
    kept per axiom, the full counts go to ``report.counts``.
    """
    _check_tol(tol)
    leq, tau = space.leq, space.tau
    n = space.n
    out = []
    counts = {}

    def note(axiom, idx, defects):
        counts[axiom] = len(defects)
        for w, d in list(zip(idx, defects))[:limit]:
            out.append((axiom, tuple(int(v) for v in w), float(d)))

    diag = np.arange(n)
    bad = np.flatnonzero(~leq[diag, diag])
    note("reflexive", [(i,) for i in bad], [1.0] * len(bad))

    # i <= k <= j but not i <= j
    L = leq.astype(np.float32)
    closure = (L @ L) > 0
    ii, jj = np.nonzero(closure & ~leq)
    wit = []
    for i, j in zip(ii[:limit], jj[:limit]):
        k = int(np.flatnonzero(leq[i] & leq[:, j])[0])
        wit.append((i, k, j))
    note("transitive", wit, [1.0] * len(ii))
    counts["transitive"] = len(ii)

    ii, jj = np.nonzero((tau > 0) & ~leq)
    note("timelike_in_causal", list(zip(ii, jj)), tau[ii, jj])

    bad = np.flatnonzero(np.abs(tau[diag, diag]) > 0)
    note("tau_diagonal", [(i,) for i in bad], np.abs(tau[bad, bad]))

    ii, jj = np.nonzero(np.triu((tau > 0) & (tau.T > 0), 1))
    note("tau_one_sided", list(zip(ii, jj)), np.minimum(tau[ii, jj], tau[jj, ii]))

    if check_order:
        ii, jj = np.nonzero(np.triu(leq & leq.T, 1))
        note("antisymmetric", list(zip(ii, jj)), [1.0] * len(ii))

    ii, jj = np.nonzero(tau < 0)
    note("tau_nonnegative", list(zip(ii, jj)), -tau[ii, jj])

    count, _, rows = kernels.reverse_triangle_defects(tau, leq, tol, limit)
    counts["reverse_triangle"] = count
    out.extend(("reverse_triangle", (x, y, z), d) for x, y, z, d in rows)

    return AxiomReport(passed=not out, violations=out, counts=counts)


def sigma(space: FiniteLorentzianSpace, x=None, y=None):
    """Antisymmetrized time separation; the full matrix when no ids are given."""
    t = space.tau
    if x is None:
        return 0.5 * (t - t.T)
    return 0.5 * (t[x, y] - t[y, x])


def cones(space: FiniteLorentzianSpace, x: int):
    """``(J+, J-, I+, I-)`` of ``x`` as sorted index arrays."""
    return (
        np.flatnonzero(space.leq[x]),
        np.flatnonzero(space.leq[:, x]),
        np.flatnonzero(space.tau[x] > 0),
        np.flatnonzero(space.tau[:, x] > 0),
    )


def diamond(space: FiniteLorentzianSpace, p: int, q: int) -> np.ndarray:
    return np.flatnonzero(space.leq[p] & space.leq[:, q])


def diamond_mask(space: FiniteLorentzianSpace, lower, upper) -> np.ndarray:
    """Union of J(a, b) over ``a`` in ``lower`` and ``b`` in ``upper``."""
    lower = np.asarray(lower, dtype=int)
    upper = np.asarray(upper, dtype=int)
    if len(lower) == 0 or len(upper) == 0:
        return np.zeros(space.n, dtype=bool)
    return space.leq[lower].any(axis=0) & space.leq[:, upper].any(axis=1)


def causally_convex(space: FiniteLorentzianSpace, subset) -> bool:
    mask = np.zeros(space.n, dtype=bool)
    mask[np.asarray(subset, dtype=int)] = True
    if not mask.any():
        return True
    return not (diamond_mask(space, np.flatnonzero(mask), np.flatnonzero(mask)) & ~mask).any()


def derive_relations(tau) -> tuple[np.ndarray, np.ndarray]:
    """Relations ``nu`` (tau > 0) and ``rho`` (inclusion of timelike cones).

    ``x rho y`` iff ``I+(y) <= I+(x)`` and ``I-(x) <= I-(y)``, i.e. the cone
    inclusions that push-up gives for ``x <= y``.
    """
    tau = np.asarray(tau, dtype=float)
    nu = tau > 0
    A = nu.astype(np.float32)
    notA = 1.0 - A
    fut_ok = (notA @ A.T) == 0   # [x, y]: no z in I+(y) outside I+(x)
    past_ok = (A.T @ notA) == 0  # [x, y]: no z in I-(x) outside I-(y)
    return nu, fut_ok & past_ok


def transitive_reduction(leq) -> np.ndarray:
    """Boolean matrix of links (covering pairs) of a partial order."""
    leq = np.asarray(leq, dtype=bool)
    strict = leq.copy()
    np.fill_diagonal(strict, False)
    S = strict.astype(np.float32)
    return strict & ~((S @ S) > 0)


def links_from_leq(leq, weight) -> list[tuple[int, int, float]]:
    """Links of ``leq`` with weights ``weight[i, j]``."""
    red = transitive_reduction(leq)
    ii, jj = np.nonzero(red)
    return [(int(i), int(j), float(weight[i, j])) for i, j in zip(ii, jj)]


def topological_order(n: int, edges: Iterable[tuple[int, int]]) -> list[int]:
    ts = TopologicalSorter({v: () for v in range(n)})
    for i, j in edges:
        if i == j:
            raise CausalityError(f"self-loop at {i}")
        ts.add(j, i)
    try:
        return list(ts.static_order())
    except CycleError as exc:
        raise CausalityError(f"cycle detected: {exc.args[1]}") from exc


def chain_tau(n: int, links: Sequence[tuple[int, int, float]]):
    """All-pairs longest-path ``(tau, reach)`` over weighted DAG edges."""
    links = list(links)
    order = topological_order(n, ((i, j) for i, j, _ in links))
    if any(w < 0 for _, _, w in links):
        raise SpaceInputError("link weights must be nonnegative")
    by_target = sorted(range(len(links)), key=lambda k: (links[k][1], links[k][0]))
    indptr = np.zeros(n + 1, dtype=np.int_)
    for _, j, _ in links:
        indptr[j + 1] += 1
    indptr = np.cumsum(indptr)
    indices = np.array([links[k][0] for k in by_target], dtype=np.int_)
    weights = np.array([links[k][2] for k in by_target], dtype=float)
    T = kernels.longest_paths(np.asarray(order, dtype=np.int_), indptr, indices, weights)
    best = T.T
    reach = np.isfinite(best)
    tau = np.where(reach, best, 0.0)
    np.fill_diagonal(tau, 0.0)
    return np.ascontiguousarray(tau), reach


def intrinsify_tau(space_or_n, links=None, **kw) -> FiniteLorentzianSpace:
    """Space with tau the sup of chain lengths over the weighted links.

    Accepts either a space carrying ``links`` or ``(n, links)``. The causal
    relation becomes reachability along links.
    """
    if isinstance(space_or_n, FiniteLorentzianSpace):
        sp = space_or_n
        links = sp.links if links is None else links
        n = sp.n
        kw = dict(coords=sp.coords, base_dist=sp.base_dist, marks=sp.marks, meta=dict(sp.meta)) | kw
    else:
        n = int(space_or_n)
    links = tuple((int(i), int(j), float(w)) for i, j, w in links)
    tau, reach = chain_tau(n, links)
    return FiniteLorentzianSpace(leq=reach, tau=tau, links=links, **kw)


def _check_chain(space, chain):
    chain = [int(c) for c in chain]
    if not chain:
        raise SpaceInputError("empty chain")
    for a, b in zip(chain, chain[1:]):
        if a == b or not space.leq[a, b]:
            raise SpaceInputError(f"consecutive pair ({a}, {b}) is not strictly causal")
    return chain


def chain_length(space: FiniteLorentzianSpace, chain) -> float:
    chain = _check_chain(space, chain)
    return float(sum(space.tau[a, b] for a, b in zip(chain, chain[1:])))


def is_maximizer(space: FiniteLorentzianSpace, chain, tol: float = 1e-9) -> bool:
    chain = _check_chain(space, chain)
    total = chain_length(space, chain)
    target = space.tau[chain[0], chain[-1]]
    return abs(total - target) <= tol * (1.0 + target)


def maximizers(space: FiniteLorentzianSpace, p: int, q: int, cap: int = 32, tol: float = 1e-9):
    """Maximal chains realizing tau(p, q), lexicographic on point ids, at most ``cap``."""
    if not space.leq[p, q]:
        return []
    if p == q:
        return [[p]]
    t = space.tau
    target = t[p, q]
    cand = diamond(space, p, q)
    tight = cand[np.abs(t[p, cand] + t[cand, q] - target) <= tol * (1.0 + target)]
    sub = space.leq[np.ix_(tight, tight)]
    red = transitive_reduction(sub)
    # along a tight chain consecutive steps must also add up
    step_ok = np.abs(t[p, tight][:, None] + t[np.ix_(tight, tight)] - t[p, tight][None, :]) <= tol * (1.0 + target)
    red &= step_ok
    pos = {int(v): k for k, v in enumerate(tight)}
    succ = [tight[np.flatnonzero(red[k])].tolist() for k in range(len(tight))]
    out = []

    def walk(path):
        if len(out) >= cap:
            return
        last = path[-1]
        if last == q:
            out.append(list(path))
            return
        for nxt in succ[pos[last]]:
            path.append(nxt)
            walk(path)
            path.pop()

    walk([p])
    return out


def delta(space: FiniteLorentzianSpace, p=None):
    """max(sup_x tau(p, x), sup_x tau(x, p)); vector over all points when ``p`` is None."""
    t = space.tau
    if p is None:
        return np.maximum(t.max(axis=1), t.max(axis=0))
    return float(max(t[p].max(), t[:, p].max()))


def is_connected(space: FiniteLorentzianSpace) -> bool:
    from scipy.sparse.csgraph import connected_components

    ncomp, _ = connected_components(space.leq | space.leq.T, directed=False)
    return ncomp == 1


def is_slab(space: FiniteLorentzianSpace, eps: float, expected_fraction=None,
            frac_tol: float = 0.0, tol: float = 1e-9) -> bool:
    """Finite-level slab test.

    Requires causal-graph connectivity, passing axioms and (when given) the
    fraction of points with delta <= eps to match ``expected_fraction``.
    """
    if not is_connected(space):
        return False
    if not validate_axioms(space, tol):
        return False
    if expected_fraction is not None:
        frac = float(np.mean(delta(space) <= eps))
        if abs(frac - expected_fraction) > frac_tol:
            return False
    return True
