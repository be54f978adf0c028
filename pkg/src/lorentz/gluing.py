"""Ideal boundary points, gluing along a seam, and g.h. checks."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order

from . import kernels
from .core import (AxiomReport, FiniteLorentzianSpace, SpaceInputError, transitive_reduction,
                   validate_axioms)


class SeamMismatchError(ValueError):
    pass


@dataclass
class IdealPoint:
    """An ideal boundary point given by its past set (future side) or future set (past side)."""

    generator: np.ndarray
    label: str = ""


@dataclass
class GluingSpec:
    X_minus: FiniteLorentzianSpace
    X_plus: FiniteLorentzianSpace
    A_minus: np.ndarray
    A_plus: np.ndarray
    tol: float = 0.0

    def __post_init__(self):
        self.A_minus = np.asarray(self.A_minus, dtype=int)
        self.A_plus = np.asarray(self.A_plus, dtype=int)
        if self.A_minus.shape != self.A_plus.shape or self.A_minus.ndim != 1 or len(self.A_minus) == 0:
            raise SpaceInputError("seam map must pair equally many points")
        if len(set(self.A_minus.tolist())) != len(self.A_minus) or len(set(self.A_plus.tolist())) != len(self.A_plus):
            raise SpaceInputError("seam map must be a bijection")
        lm, lp = self.X_minus.leq, self.X_plus.leq
        succ = lm[self.A_minus].sum(axis=1) - 1
        if (succ > 0).any():
            raise SpaceInputError(f"A- points with strict successors: {self.A_minus[succ > 0][:10].tolist()}")
        pred = lp[:, self.A_plus].sum(axis=0) - 1
        if (pred > 0).any():
            raise SpaceInputError(f"A+ points with strict predecessors: {self.A_plus[pred > 0][:10].tolist()}")

    @classmethod
    def from_pairs(cls, X_minus, X_plus, pairs, tol=0.0):
        pairs = np.asarray(pairs, dtype=int).reshape(-1, 2)
        return cls(X_minus, X_plus, pairs[:, 0], pairs[:, 1], tol)


@dataclass
class GluedSpace:
    space: FiniteLorentzianSpace
    seam: np.ndarray
    h_minus: np.ndarray
    h_plus: np.ndarray


def _is_past_set(leq, G):
    # every predecessor of a member is a member
    return not (leq[:, G].any(axis=1) & ~G).any()


def attach_boundary(space: FiniteLorentzianSpace, side: str, ideal_points) -> FiniteLorentzianSpace:
    """Append ideal points on the future (``"+"``) or past (``"-"``) side.

    On the future side each ideal point ``u`` comes with a past set ``G(u)``.
    With ``G(x) = J-(x)`` for base points the time separation is
    ``tau(u, v) = inf_{w in G(u)} sup_{z in G(v)} tau(w, z)`` and
    ``u <= v`` iff every base point below ``u`` is below ``v``. The past side
    is the time-reversed construction.
    """
    if side not in ("+", "-"):
        raise SpaceInputError("side must be '+' or '-'")
    if side == "-":
        rev = FiniteLorentzianSpace(leq=space.leq.T, tau=space.tau.T, coords=space.coords,
                                    base_dist=space.base_dist)
        out = attach_boundary(rev, "+", ideal_points)
        marks = list(space.marks or ["interior"] * space.n) + ["past-ideal"] * (out.n - space.n)
        return FiniteLorentzianSpace(leq=out.leq.T, tau=out.tau.T, coords=out.coords,
                                     base_dist=out.base_dist, marks=marks, meta=dict(space.meta))
    n = space.n
    leq, tau = space.leq, space.tau
    gens = []
    for ip in ideal_points:
        g = ip.generator if isinstance(ip, IdealPoint) else ip
        G = np.zeros(n, dtype=bool)
        g = np.asarray(g)
        if g.dtype == bool:
            G[:] = g
        else:
            G[g.astype(int)] = True
        if not G.any():
            raise SpaceInputError("ideal point with empty generating set")
        if not _is_past_set(leq, G):
            raise SpaceInputError("generating set is not closed under predecessors")
        gens.append(G)
    m = len(gens)
    N = n + m
    # all generating sets: closed pasts of base points, then the ideal sets
    Gall = np.concatenate([leq.T, np.array(gens, dtype=bool).reshape(m, n)], axis=0)  # [u, base]
    # S[w, v] = sup_{z in G(v)} tau(w, z)
    S = np.empty((n, N))
    for v in range(N):
        S[:, v] = tau[:, Gall[v]].max(axis=1)
    T = np.empty((N, N))
    for u in range(N):
        T[u] = S[Gall[u]].min(axis=0)
    np.fill_diagonal(T, 0.0)
    T = np.maximum(T, 0.0)
    T[:n, :n] = tau
    # u <= v iff G(u) is contained in G(v)
    Gf = Gall.astype(np.float32)
    L = (Gf @ (1.0 - Gf).T) == 0
    L[:n, :n] = leq
    marks = list(space.marks or ["interior"] * n) + ["future-ideal"] * m
    bd = None
    if space.base_dist is not None:
        # one-step extension: distance to the nearest generator member
        d = space.base_dist
        bd = np.zeros((N, N))
        bd[:n, :n] = d
        for k, G in enumerate(gens):
            bd[:n, n + k] = bd[n + k, :n] = d[:, G].min(axis=1)
        for a in range(m):
            for b in range(m):
                if a != b:
                    bd[n + a, n + b] = d[np.ix_(gens[a], gens[b])].min()
        bd = np.maximum(bd, bd.T)
        np.fill_diagonal(bd, 0.0)
    return FiniteLorentzianSpace(leq=L, tau=T, base_dist=bd, marks=marks, meta=dict(space.meta))


def _neg(mask, vals):
    return np.where(mask, vals, -np.inf)


def glue(spec: GluingSpec, omit_seam=None) -> GluedSpace:
    """Glue ``X_minus`` to ``X_plus`` by identifying ``A_minus[k] ~ A_plus[k]``.

    Glued points are ``X_minus`` (ids kept) followed by ``X_plus`` without
    its seam points. Cross time separation is the best seam-sum over
    ``J(x, y)`` and 0 when no seam point lies between. ``omit_seam`` lists
    seam positions to leave out of the cross formulas (perturbation runs).
    """
    Xm, Xp = spec.X_minus, spec.X_plus
    Am, Ap = spec.A_minus, spec.A_plus
    tm = Xm.tau[np.ix_(Am, Am)]
    tp = Xp.tau[np.ix_(Ap, Ap)]
    gap = float(np.abs(tm - tp).max()) if len(Am) else 0.0
    if gap > spec.tol or not np.array_equal(Xm.leq[np.ix_(Am, Am)], Xp.leq[np.ix_(Ap, Ap)]):
        raise SeamMismatchError(f"seam time separation disagrees by {gap}")
    nm, np_ = Xm.n, Xp.n
    on_seam = np.zeros(np_, dtype=bool)
    on_seam[Ap] = True
    rest = np.flatnonzero(~on_seam)
    N = nm + len(rest)
    h_minus = np.arange(nm)
    h_plus = np.empty(np_, dtype=int)
    h_plus[Ap] = Am
    h_plus[rest] = nm + np.arange(len(rest))

    use = np.ones(len(Am), dtype=bool)
    if omit_seam is not None:
        use[np.asarray(omit_seam, dtype=int)] = False
    gm, gp = Am[use], Ap[use]

    L = np.zeros((N, N), dtype=bool)
    T = np.zeros((N, N))
    L[:nm, :nm] = Xm.leq
    T[:nm, :nm] = Xm.tau
    L[np.ix_(h_plus, h_plus)] |= Xp.leq
    # seam pairs were filled from X_minus; X_plus agrees there
    T[np.ix_(h_plus[rest], h_plus)] = Xp.tau[rest]
    T[np.ix_(h_plus, h_plus[rest])] = Xp.tau[:, rest]

    # cross relation and tau for x in X_minus, y in X_plus rest
    A = _neg(Xm.leq[:, gm], Xm.tau[:, gm])
    B = _neg(Xp.leq[np.ix_(gp, rest)], Xp.tau[np.ix_(gp, rest)])
    cross = kernels.maxplus(np.ascontiguousarray(A), np.ascontiguousarray(B))
    rel = np.isfinite(cross)
    cols = nm + np.arange(len(rest))
    L[:nm, cols] |= rel
    T[:nm, cols] = np.where(rel, cross, 0.0)

    bd = None
    if Xm.base_dist is not None and Xp.base_dist is not None:
        dm, dp = Xm.base_dist, Xp.base_dist
        bd = np.zeros((N, N))
        bd[:nm, :nm] = dm
        bd[np.ix_(h_plus[rest], h_plus[rest])] = dp[np.ix_(rest, rest)]
        bd[np.ix_(h_plus[rest], Am)] = dp[np.ix_(rest, Ap)]
        bd[np.ix_(Am, h_plus[rest])] = dp[np.ix_(Ap, rest)]
        bd[np.ix_(Am, Am)] = np.maximum(dm[np.ix_(Am, Am)], dp[np.ix_(Ap, Ap)])
        # across the seam: shortest route through one seam point
        c = (dm[:, Am][:, :, None] + dp[np.ix_(Ap, rest)][None, :, :]).min(axis=1)
        bd[:nm, cols] = c
        bd[cols, :nm] = c.T
        bd = np.maximum(bd, bd.T)
    coords = None
    if Xm.coords is not None and Xp.coords is not None and Xm.coords.shape[1] == Xp.coords.shape[1]:
        coords = np.concatenate([Xm.coords, Xp.coords[rest]])
    links = tuple(Xm.links) + tuple((int(h_plus[i]), int(h_plus[j]), w) for i, j, w in Xp.links)
    marks = ["interior"] * N
    space = FiniteLorentzianSpace(leq=L, tau=T, coords=coords, base_dist=bd, marks=marks, links=links,
                                  meta={"glued": True, "seam": Am.tolist()})
    return GluedSpace(space, Am.copy(), h_minus, h_plus)


@dataclass
class GHReport:
    passed: bool
    checks: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)

    def __bool__(self):
        return self.passed


def inextendible_chains_meet(space: FiniteLorentzianSpace, S) -> tuple[bool, list]:
    """Whether every maximal chain of the order meets ``S``; else a witness chain."""
    S_mask = np.zeros(space.n, dtype=bool)
    S_mask[np.asarray(S, dtype=int)] = True
    red = transitive_reduction(space.leq)
    red[S_mask] = False
    red[:, S_mask] = False
    minimal = (space.leq.sum(axis=0) == 1)
    maximal = (space.leq.sum(axis=1) == 1)
    G = csr_matrix(red.astype(np.int8))
    for s in np.flatnonzero(minimal & ~S_mask):
        order, pred = breadth_first_order(G, s, directed=True, return_predecessors=True)
        hit = order[maximal[order]]
        if len(hit):
            end = int(hit[0])
            path = [end]
            while path[-1] != s:
                path.append(int(pred[path[-1]]))
            return False, path[::-1]
    return True, []


def validate_gh(space: FiniteLorentzianSpace, tol: float = 1e-9, seam=None, sample_pairs: int = 2000,
                seed: int = 0) -> GHReport:
    """Finite-level global hyperbolicity checks.

    Runs the axiom suite, antisymmetry of the order, causal convexity of
    (a seeded sample of) diamonds, a Lipschitz bound of tau against
    ``base_dist`` when present, and, when ``seam`` is given, that every
    inextendible chain meets it.
    """
    checks, wit = {}, {}
    rep: AxiomReport = validate_axioms(space, tol)
    checks["axioms"] = rep.passed
    wit["axioms"] = rep.violations[:20]
    anti = np.argwhere(np.triu(space.leq & space.leq.T, 1))
    checks["antisymmetric"] = len(anti) == 0
    wit["antisymmetric"] = anti[:20].tolist()
    P, Q = np.nonzero(space.leq & ~np.eye(space.n, dtype=bool))
    if len(P) > sample_pairs:
        sel = np.random.default_rng(seed).choice(len(P), sample_pairs, replace=False)
        P, Q = P[sel], Q[sel]
    bad = []
    for p, q in zip(P, Q):
        D = space.leq[p] & space.leq[:, q]
        idx = np.flatnonzero(D)
        inner = space.leq[idx].any(axis=0) & space.leq[:, idx].any(axis=1)
        if (inner & ~D).any():
            bad.append((int(p), int(q)))
            if len(bad) >= 20:
                break
    checks["diamonds_convex"] = not bad
    wit["diamonds_convex"] = bad
    if space.base_dist is not None:
        d = space.base_dist
        off = ~np.eye(space.n, dtype=bool)
        if (d[off] <= 0).any():
            checks["lipschitz"] = False
            wit["lipschitz"] = np.argwhere((d <= 0) & off)[:20].tolist()
        else:
            # |tau(x, z) - tau(y, z)| <= C d(x, y), C over all pairs
            F = np.concatenate([space.tau, space.tau.T], axis=1)
            diff = kernels.sup_distance(F, F)
            C = float((diff[off] / d[off]).max())
            checks["lipschitz"] = bool(np.isfinite(C))
            wit["lipschitz_constant"] = C
    if seam is not None:
        ok, chain = inextendible_chains_meet(space, seam)
        checks["cauchy_seam"] = ok
        wit["cauchy_seam"] = chain
    return GHReport(all(checks.values()), checks, wit)


def is_synoptic(space: FiniteLorentzianSpace, region=None):
    """``(True, None)`` if all pairs of ``region`` share a causal future and past point, else a witness."""
    idx = np.arange(space.n) if region is None else np.asarray(region, dtype=int)
    Lf = space.leq[idx].astype(np.float32)
    fut = (Lf @ Lf.T) > 0
    Lp = space.leq[:, idx].T.astype(np.float32)
    past = (Lp @ Lp.T) > 0
    bad = np.argwhere(~(fut & past))
    if len(bad):
        a, b = bad[0]
        kind = "future" if not fut[a, b] else "past"
        return False, (int(idx[a]), int(idx[b]), kind)
    return True, None
