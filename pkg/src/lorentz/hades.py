"""Shadow profiles on a Cauchy slice: E_S, A_S and isometry reconstruction."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import kernels
from .core import FiniteLorentzianSpace, SpaceInputError, sigma


class AmbiguousMatchError(ValueError):
    def __init__(self, point, candidates):
        self.point = point
        self.candidates = candidates
        super().__init__(f"point {point} matches {len(candidates)} candidates: {list(candidates)[:10]}")


@dataclass(frozen=True, eq=False)
class CauchySlice:
    ids: np.ndarray
    noncompact_emulation: bool = False

    def __post_init__(self):
        ids = np.asarray(self.ids, dtype=int).ravel()
        if len(ids) == 0 or len(np.unique(ids)) != len(ids):
            raise SpaceInputError("slice must be a nonempty set of distinct ids")
        object.__setattr__(self, "ids", ids)

    def check(self, space: FiniteLorentzianSpace) -> None:
        if self.ids.max() >= space.n:
            raise SpaceInputError("slice ids out of range")
        sub = space.leq[np.ix_(self.ids, self.ids)]
        if (sub & ~np.eye(len(self.ids), dtype=bool)).any():
            raise SpaceInputError("slice is not an antichain")


@dataclass
class ShadowProfile:
    values: np.ndarray
    support: np.ndarray
    strict_support: np.ndarray


def profiles(space: FiniteLorentzianSpace, S: CauchySlice, points=None) -> np.ndarray:
    """Matrix ``E[p, k] = sigma(S[k], p)`` over ``points`` (default: all)."""
    S.check(space)
    pts = np.arange(space.n) if points is None else np.asarray(points, dtype=int)
    return np.ascontiguousarray(sigma(space)[np.ix_(S.ids, pts)].T)


def supports(space: FiniteLorentzianSpace, S: CauchySlice, points=None) -> np.ndarray:
    """Boolean ``A[p, k]``: ``S[k] <= p``."""
    pts = np.arange(space.n) if points is None else np.asarray(points, dtype=int)
    return np.ascontiguousarray(space.leq[np.ix_(S.ids, pts)].T)


def shadow(space: FiniteLorentzianSpace, S: CauchySlice, p: int) -> ShadowProfile:
    E = profiles(space, S, [p])[0]
    return ShadowProfile(E, S.ids[supports(space, S, [p])[0]], S.ids[E > 0])


def future_of(space: FiniteLorentzianSpace, S: CauchySlice) -> np.ndarray:
    return space.leq[S.ids].any(axis=0)


@dataclass
class MonotoneReport:
    passed: bool
    pairs: int = 0
    strict_pairs: int = 0
    strict_found: int = 0
    closed_cone_pairs: int = 0
    order_violations: list = field(default_factory=list)
    support_violations: list = field(default_factory=list)
    missing_strict: list = field(default_factory=list)


def check_monotone(space: FiniteLorentzianSpace, S: CauchySlice, region=None, tol: float = 1e-9,
                   limit: int = 50) -> MonotoneReport:
    """Componentwise increase of ``E_S`` and ``A_S`` along the order.

    For ``p << q`` a strict increase is required at some ``s`` in
    ``I-(p)`` intersected with ``S``, or in ``J-(p)`` intersected with ``S``
    when the former is empty (points of ``S`` itself).
    """
    fut = future_of(space, S)
    R = np.flatnonzero(fut if region is None else fut & _mask(space.n, region))
    E = profiles(space, S, R)
    A = supports(space, S, R)
    Ip = space.tau[np.ix_(S.ids, R)].T > 0  # s << p
    closed = ~Ip.any(axis=1)
    Ip[closed] = A[closed]
    rep = MonotoneReport(True)
    leq = space.leq[np.ix_(R, R)]
    tau = space.tau[np.ix_(R, R)]
    for a in range(len(R)):
        bs = np.flatnonzero(leq[a])
        bs = bs[bs != a]
        if len(bs) == 0:
            continue
        rep.pairs += len(bs)
        bad = (E[bs] < E[a] - tol).any(axis=1)
        for b in bs[bad][:limit - len(rep.order_violations)]:
            rep.order_violations.append((int(R[a]), int(R[b])))
        sbad = (A[a][None, :] & ~A[bs]).any(axis=1)
        for b in bs[sbad][:limit - len(rep.support_violations)]:
            rep.support_violations.append((int(R[a]), int(R[b])))
        strict = tau[a, bs] > 0
        rep.strict_pairs += int(strict.sum())
        if closed[a]:
            rep.closed_cone_pairs += int(strict.sum())
        sb = bs[strict]
        hit = ((E[sb] > E[a] + tol) & Ip[a][None, :]).any(axis=1)
        rep.strict_found += int(hit.sum())
        for b in sb[~hit][:limit - len(rep.missing_strict)]:
            rep.missing_strict.append((int(R[a]), int(R[b])))
    rep.passed = not (rep.order_violations or rep.support_violations or rep.missing_strict)
    return rep


def _mask(n, subset):
    subset = np.asarray(subset)
    if subset.dtype == bool:
        return subset
    m = np.zeros(n, dtype=bool)
    m[subset.astype(int)] = True
    return m


@dataclass
class InjectivityReport:
    collisions: list = field(default_factory=list)
    support_collisions: list = field(default_factory=list)
    min_gap: float = np.inf


def check_injective(space: FiniteLorentzianSpace, S: CauchySlice, region=None, tol: float = 1e-9,
                    limit: int = 1000) -> InjectivityReport:
    """Pairs in ``region`` (intersected with ``I+(S)``) whose ``E_S`` profiles agree within ``tol`` or whose ``A_S`` agree.

    ``support_collisions`` entries are ``(p, q, relation)`` with relation
    one of ``"timelike"``, ``"null"`` (causal with tau = 0) or ``"unrelated"``.
    """
    # E_S vanishes on S itself, so only the timelike future is in scope
    fut = (space.tau[S.ids] > 0).any(axis=0)
    R = np.flatnonzero(fut if region is None else fut & _mask(space.n, region))
    E = profiles(space, S, R)
    rep = InjectivityReport()
    if len(R) >= 2:
        D = kernels.sup_distance(E, E)
        np.fill_diagonal(D, np.inf)
        rep.min_gap = float(D.min())
        for a, b in np.argwhere(np.triu(D <= tol, 1))[:limit]:
            rep.collisions.append((int(R[a]), int(R[b]), float(D[a, b])))
    A = supports(space, S, R)
    groups = {}
    for k, row in enumerate(A):
        groups.setdefault(row.tobytes(), []).append(k)
    for members in groups.values():
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                if len(rep.support_collisions) >= limit:
                    break
                p, q = R[members[i]], R[members[j]]
                rep.support_collisions.append((int(p), int(q), relation(space, p, q)))
    return rep


def relation(space: FiniteLorentzianSpace, p: int, q: int) -> str:
    if space.tau[p, q] > 0 or space.tau[q, p] > 0:
        return "timelike"
    if space.leq[p, q] or space.leq[q, p]:
        return "null"
    return "unrelated"


def counterexample_search(space: FiniteLorentzianSpace, S: CauchySlice, region=None):
    """A_S collisions between points that are not timelike related.

    Timelike collisions contradict strict monotonicity and only arise from
    sampling gaps; the remaining ones are genuine non-injectivity witnesses.
    """
    rep = check_injective(space, S, region, limit=10 ** 6)
    return [(p, q, rel) for p, q, rel in rep.support_collisions if rel != "timelike"]


@dataclass
class IsometryReport:
    mapping: dict
    unmatched: list
    tau_defect: float


def reconstruct_isometry(space1: FiniteLorentzianSpace, S1: CauchySlice, space2: FiniteLorentzianSpace,
                         S2: CauchySlice, matching=None, tol: float = 1e-9, strict: bool = True) -> IsometryReport:
    """Match points of ``J+(S1)`` to points of ``space2`` with equal shadow profiles.

    A profile is the vector ``E_S`` together with the indicator of ``A_S``
    (the latter separates the points of ``S``, whose ``E_S`` vanish).
    ``matching[k]`` is the position in ``S2`` identified with ``S1[k]``
    (identity when omitted). Ambiguous matches raise unless ``strict`` is
    False, in which case the point is left unmatched.
    """
    m = np.arange(len(S1.ids)) if matching is None else np.asarray(matching, dtype=int)
    if len(m) != len(S1.ids) or len(S2.ids) != len(S1.ids) or sorted(m.tolist()) != list(range(len(m))):
        raise SpaceInputError("matching must be a bijection between the slices")
    if not tol < 0.5:
        raise SpaceInputError("profile tolerance must be below 0.5")
    R1 = np.flatnonzero(future_of(space1, S1))
    R2 = np.flatnonzero(future_of(space2, S2))
    E1 = np.concatenate([profiles(space1, S1, R1), supports(space1, S1, R1)], axis=1)
    E2 = np.concatenate([profiles(space2, S2, R2)[:, m], supports(space2, S2, R2)[:, m]], axis=1)
    tree = cKDTree(E2)
    hits = tree.query_ball_point(E1, r=tol, p=np.inf)
    mapping, unmatched = {}, []
    for k, cand in enumerate(hits):
        if len(cand) == 1:
            mapping[int(R1[k])] = int(R2[cand[0]])
        elif len(cand) == 0:
            unmatched.append(int(R1[k]))
        elif strict:
            raise AmbiguousMatchError(int(R1[k]), [int(R2[c]) for c in cand])
        else:
            unmatched.append(int(R1[k]))
    if mapping:
        a = np.fromiter(mapping.keys(), int)
        b = np.fromiter(mapping.values(), int)
        defect = float(np.abs(space1.tau[np.ix_(a, a)] - space2.tau[np.ix_(b, b)]).max())
    else:
        defect = 0.0
    return IsometryReport(mapping, unmatched, defect)
