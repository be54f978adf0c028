"""Correspondences, tau-distortion and the Gromov-Hausdorff-type distance d-."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import FiniteLorentzianSpace, SpaceInputError

EXHAUSTIVE_MAX = 7


class InfeasibleMarksError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Correspondence:
    """Relation between two point sets, surjective on both sides."""

    pairs: np.ndarray
    n1: int
    n2: int

    def __post_init__(self):
        p = np.unique(np.asarray(self.pairs, dtype=int).reshape(-1, 2), axis=0)
        if len(p) == 0 or p.min() < 0 or p[:, 0].max() >= self.n1 or p[:, 1].max() >= self.n2:
            raise SpaceInputError("correspondence pairs out of range")
        if len(np.unique(p[:, 0])) != self.n1 or len(np.unique(p[:, 1])) != self.n2:
            raise SpaceInputError("correspondence must cover both point sets")
        object.__setattr__(self, "pairs", p)

    def compose(self, other: "Correspondence") -> "Correspondence":
        """``other o self``: pairs (x, z) with (x, y) in self and (y, z) in other."""
        if self.n2 != other.n1:
            raise SpaceInputError("correspondences are not composable")
        out = {(int(x), int(z)) for x, y in self.pairs for y2, z in other.pairs if y == y2}
        return Correspondence(np.array(sorted(out)), self.n1, other.n2)

    def inverse(self) -> "Correspondence":
        return Correspondence(self.pairs[:, ::-1], self.n2, self.n1)


@dataclass
class MarkedPair:
    A: list = field(default_factory=list)
    B: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.A) != len(self.B):
            raise SpaceInputError("marked subset lists must have equal length")

    def allowed(self, n1: int, n2: int) -> np.ndarray:
        """Pairs (x, y) consistent with every mark: x in A_i iff y in B_i."""
        ok = np.ones((n1, n2), dtype=bool)
        for a, b in zip(self.A, self.B):
            ma = np.zeros(n1, dtype=bool)
            mb = np.zeros(n2, dtype=bool)
            ma[_ids(a, n1)] = True
            mb[_ids(b, n2)] = True
            ok &= ma[:, None] == mb[None, :]
        return ok


def _ids(s, n):
    s = np.asarray(s)
    if s.dtype == bool:
        return np.flatnonzero(s)
    return s.astype(int).ravel()


def _tau(s):
    return s.tau if isinstance(s, FiniteLorentzianSpace) else np.asarray(s, dtype=float)


def distortion(rho: Correspondence, space1, space2) -> float:
    t1, t2 = _tau(space1), _tau(space2)
    x, y = rho.pairs[:, 0], rho.pairs[:, 1]
    return float(np.abs(t1[np.ix_(x, x)] - t2[np.ix_(y, y)]).max())


def admissible(rho: Correspondence, marks: MarkedPair | None) -> bool:
    if marks is None or not marks.A:
        return True
    ok = marks.allowed(rho.n1, rho.n2)
    return bool(ok[rho.pairs[:, 0], rho.pairs[:, 1]].all())


@dataclass
class DMinusResult:
    upper: float
    lower: float
    rho: Correspondence | None
    exact: bool


def lower_bound(t1, t2, allowed) -> float:
    """Valid lower bound from diameters and row/column maxima (eccentricities)."""
    e1 = np.stack([t1.max(axis=1), t1.max(axis=0)], axis=1)
    e2 = np.stack([t2.max(axis=1), t2.max(axis=0)], axis=1)
    gap = np.abs(e1[:, None, :] - e2[None, :, :]).max(axis=2)
    gap = np.where(allowed, gap, np.inf)
    lb = max(gap.min(axis=1).max(), gap.min(axis=0).max(), abs(t1.max() - t2.max()))
    return float(lb)


def _exhaustive(t1, t2, allowed, seed_value=np.inf):
    """Branch and bound over minimal correspondences.

    Every minimal correspondence is the graph of a map ``f: X1 -> X2`` plus
    one preimage for each point missed by ``f``; distortion only grows
    when pairs are added, so these suffice.
    """
    n1, n2 = t1.shape[0], t2.shape[0]
    best = [seed_value + 1e-12, None]
    px, py = [], []

    def cost(x, y, cur):
        c = cur
        for a, b in zip(px, py):
            d = max(abs(t1[x, a] - t2[y, b]), abs(t1[a, x] - t2[b, y]))
            if d > c:
                c = d
                if c >= best[0]:
                    return c
        return c

    order_y = [np.argsort(np.abs(t1[x].max() - t2.max(axis=1)), kind="stable") for x in range(n1)]

    def fill(missing, k, cur):
        if k == len(missing):
            if cur < best[0]:
                best[0] = cur
                best[1] = list(zip(px, py))
            return
        y = missing[k]
        for x in range(n1):
            if not allowed[x, y]:
                continue
            c = cost(x, y, cur)
            if c >= best[0]:
                continue
            px.append(x)
            py.append(y)
            fill(missing, k + 1, c)
            px.pop()
            py.pop()

    def assign(x, cur):
        if x == n1:
            covered = set(py)
            fill([y for y in range(n2) if y not in covered], 0, cur)
            return
        for y in order_y[x]:
            if not allowed[x, y]:
                continue
            c = cost(x, y, cur)
            if c >= best[0]:
                continue
            px.append(x)
            py.append(int(y))
            assign(x + 1, c)
            px.pop()
            py.pop()

    assign(0, 0.0)
    return best


def _evaluate(t1, t2, X, Y):
    D = np.abs(t1[np.ix_(X, X)] - t2[np.ix_(Y, Y)])
    return float(D.max()), float(D.mean())


def _greedy(t1, t2, allowed):
    """Grow a correspondence point by point, keeping the running distortion low.

    ``M[x, y]`` is the distortion that pair ``(x, y)`` would add against the
    pairs chosen so far; the most constrained unassigned ``x`` (largest cost, then fewest
    near-optimal partners) goes next.
    """
    n1, n2 = t1.shape[0], t2.shape[0]
    e1 = np.stack([t1.max(axis=1), t1.max(axis=0)], axis=1)
    e2 = np.stack([t2.max(axis=1), t2.max(axis=0)], axis=1)
    M = np.abs(e1[:, None, :] - e2[None, :, :]).max(axis=2)
    M = np.where(allowed, M, np.inf)
    pairs = set()
    todo = np.ones(n1, dtype=bool)

    def add(x, y):
        pairs.add((int(x), int(y)))
        np.maximum(M, np.abs(t1[:, x][:, None] - t2[:, y][None, :]), out=M)
        np.maximum(M, np.abs(t1[x, :][:, None] - t2[y, :][None, :]), out=M)

    while todo.any():
        rows = np.flatnonzero(todo)
        lo = M[rows].min(axis=1)
        ties = (M[rows] <= lo[:, None] + 1e-12).sum(axis=1)
        x = rows[np.lexsort((ties, -lo))[0]]
        add(x, int(np.argmin(M[x])))
        todo[x] = False
    covered = {b for _, b in pairs}
    for y in range(n2):
        if y not in covered:
            add(int(np.argmin(M[:, y])), y)
    return pairs


def _local_search(t1, t2, allowed, budget, seed):
    rng = np.random.default_rng(seed)
    n1, n2 = t1.shape[0], t2.shape[0]

    def score(pairs):
        X = np.fromiter((a for a, _ in pairs), int, len(pairs))
        Y = np.fromiter((b for _, b in pairs), int, len(pairs))
        return _evaluate(t1, t2, X, Y)

    def valid(pairs):
        return len({a for a, _ in pairs}) == n1 and len({b for _, b in pairs}) == n2

    seeds = [_greedy(t1, t2, allowed)]
    m1, m2 = t1.max(), t2.max()
    if m1 > 0 and m2 > 0:
        # scale-free seed: survives a uniform rescaling of one side
        seeds.append(_greedy(t1 / m1, t2 / m2, allowed))
    cur = min(seeds, key=score)
    cs = score(cur)
    best, bs = set(cur), cs
    ax, ay = np.nonzero(allowed)
    for _ in range(budget):
        move = rng.integers(3)
        cand = set(cur)
        if move == 0:
            a, b = sorted(cur)[rng.integers(len(cur))]
            ys = np.flatnonzero(allowed[a])
            cand.discard((a, b))
            cand.add((a, int(ys[rng.integers(len(ys))])))
        elif move == 1:
            k = rng.integers(len(ax))
            cand.add((int(ax[k]), int(ay[k])))
        else:
            if len(cur) <= max(n1, n2):
                continue
            cand.discard(sorted(cur)[rng.integers(len(cur))])
        if not valid(cand):
            continue
        s = score(cand)
        if s <= cs:
            cur, cs = cand, s
            if s < bs:
                best, bs = set(cand), s
    return best, bs[0]


def d_minus(space1, marks1=None, space2=None, marks2=None, budget: int = 2000, seed: int = 0,
            exhaustive: bool | None = None) -> DMinusResult:
    """Infimal tau-distortion over admissible correspondences.

    ``marks1[i]`` and ``marks2[i]`` are the i-th distinguished subsets of the
    two spaces. Spaces with at most seven points each are searched
    exhaustively; otherwise a seeded local search gives the upper value.
    """
    t1, t2 = _tau(space1), _tau(space2)
    n1, n2 = t1.shape[0], t2.shape[0]
    if n1 == 0 or n2 == 0:
        raise SpaceInputError("spaces must be nonempty")
    marks = MarkedPair(list(marks1 or []), list(marks2 or []))
    allowed = marks.allowed(n1, n2)
    if not allowed.any(axis=1).all() or not allowed.any(axis=0).all():
        raise InfeasibleMarksError("some point has no admissible partner")
    lb = lower_bound(t1, t2, allowed)
    if exhaustive is None:
        exhaustive = n1 <= EXHAUSTIVE_MAX and n2 <= EXHAUSTIVE_MAX
    hp, hv = _local_search(t1, t2, allowed, budget if not exhaustive else min(budget, 200), seed)
    if exhaustive:
        val, pairs = _exhaustive(t1, t2, allowed, hv)
        if pairs is None:
            val, pairs = hv, sorted(hp)
        rho = Correspondence(np.array(sorted(pairs)), n1, n2)
        v = distortion(rho, t1, t2)
        return DMinusResult(v, v, rho, True)
    rho = Correspondence(np.array(sorted(hp)), n1, n2)
    return DMinusResult(hv, min(lb, hv), rho, False)


def heuristic_upper(space1, marks1, space2, marks2, budget=2000, seed=0) -> float:
    t1, t2 = _tau(space1), _tau(space2)
    allowed = MarkedPair(list(marks1 or []), list(marks2 or [])).allowed(t1.shape[0], t2.shape[0])
    return _local_search(t1, t2, allowed, budget, seed)[1]


def pointed_gh(dp1, dp2, i_max: int = 4, budget: int = 2000, shells1=None, shells2=None, seed: int = 0):
    """Truncated ``sum_i 2^-i arctan d-`` with marks ``{p, q}`` and the shells ``C_i``.

    Returns ``(upper, lower, tail_bound)``.
    """
    from .exhaustion import natural_exhaustion

    ex1 = shells1 if shells1 is not None else natural_exhaustion(dp1, i_max)
    ex2 = shells2 if shells2 is not None else natural_exhaustion(dp2, i_max)
    up = lo = 0.0
    for i in range(i_max + 1):
        m1 = [[dp1.p, dp1.q], ex1.shell(i)]
        m2 = [[dp2.p, dp2.q], ex2.shell(i)]
        r = d_minus(dp1.space, m1, dp2.space, m2, budget=budget, seed=seed)
        up += 2.0 ** -i * np.arctan(r.upper)
        lo += 2.0 ** -i * np.arctan(r.lower)
    return up, lo, np.pi / 2 * 2.0 ** -i_max
