"""Geodesic extension, the steps A_n and the natural compact exhaustion."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import (FiniteLorentzianSpace, SpaceInputError, causally_convex, diamond_mask,
                   is_maximizer, sigma)
from .metrics import Exhaustion

STOP_REASONS = ("tripled", "boundary_of_B", "no_extension")


class EmptyStepWarning(UserWarning):
    pass


@dataclass(frozen=True)
class DoublyPointedSpace:
    space: FiniteLorentzianSpace
    p: int
    q: int

    def __post_init__(self):
        if not self.space.tau[self.p, self.q] > 0:
            raise SpaceInputError("a doubly pointed space needs tau(p, q) > 0")

    def relabel(self, perm) -> "DoublyPointedSpace":
        perm = np.asarray(perm, dtype=int)
        inv = np.empty_like(perm)
        inv[perm] = np.arange(len(perm))
        return DoublyPointedSpace(self.space.relabel(perm), int(inv[self.p]), int(inv[self.q]))


@dataclass
class ExtensionResult:
    chain: list
    past_end: int
    future_end: int
    stopped: dict
    length: float


def _mask(n, subset):
    m = np.zeros(n, dtype=bool)
    subset = np.asarray(subset)
    if subset.dtype == bool:
        return subset.copy()
    m[subset.astype(int)] = True
    return m


def b_minus(space: FiniteLorentzianSpace, eps: float) -> np.ndarray:
    """Points with some tau > eps to the future and some tau > eps to the past (mask)."""
    if not eps > 0:
        raise SpaceInputError("eps must be positive")
    t = space.tau
    return (t > eps).any(axis=1) & (t > eps).any(axis=0)


def delta_n_pairs(space: FiniteLorentzianSpace, K, n: int) -> np.ndarray:
    """Pairs ``(p, q)`` of ``K`` with ``sigma(p, q) >= 1/n`` as an (m, 2) array."""
    if n < 1:
        raise SpaceInputError("n must be >= 1")
    idx = np.flatnonzero(_mask(space.n, K))
    s = sigma(space)[np.ix_(idx, idx)]
    # relative slack so that sigma == 1/n survives rounding of tau/2
    a, b = np.nonzero(s >= 1.0 / n - 1e-12 * (1.0 + s))
    return np.stack([idx[a], idx[b]], axis=1)


def _tight_future(tau, p, q, tol):
    """All w != q with tau(p,w) = tau(p,q) + tau(q,w) and tau(q,w) > tol."""
    row = tau[q]
    tpw = tau[p]
    ok = (row > tol) & (np.abs(tpw - tau[p, q] - row) <= tol * (1.0 + tpw))
    return np.flatnonzero(ok)


def _stop_reason(tau, anchor, end, allowed, budget, tol):
    w = _tight_future(tau, anchor, end, tol)
    if len(w) == 0:
        return "no_extension"
    inside = w[allowed[w]]
    if len(inside) and (tau[end, inside] > budget + tol).any():
        return "tripled"
    if len(inside) < len(w):
        return "boundary_of_B"
    return "no_extension"


def _connect(space, a, b, tol):
    """Lexicographically first maximal chain from a to b."""
    from .core import maximizers

    ch = maximizers(space, a, b, cap=1, tol=tol)
    return ch[0] if ch else [a, b]


def extend_geodesic(space: FiniteLorentzianSpace, chain, n: int, tol: float = 1e-9) -> ExtensionResult:
    """Extend a maximizer inside ``B(X, -1/n)`` up to three times its length.

    The future end is extended first (relative to the past endpoint), then
    the past end relative to the new future endpoint, so the result stays
    maximal. Each end picks the admissible point with the largest
    tau-increment, ties going to the smallest id.
    """
    chain = [int(c) for c in chain]
    if len(chain) < 2 or not is_maximizer(space, chain, tol):
        raise SpaceInputError("extend_geodesic needs a maximizer with at least two points")
    t = space.tau
    p, q = chain[0], chain[-1]
    L = float(t[p, q])
    if not L > 0:
        raise SpaceInputError("maximizer must have positive length")
    B = b_minus(space, 1.0 / n)
    budget = np.array([L])
    val, best, _ = kernels.extension_scan(t, [p], [q], B, budget, tol, None)
    fut = int(best[0]) if best[0] >= 0 else q
    stop_f = "tripled" if fut != q and val[0] >= L - tol * (1 + L) else _stop_reason(t, p, fut, B, L - t[q, fut], tol)
    tT = np.ascontiguousarray(t.T)
    val, best, _ = kernels.extension_scan(tT, [fut], [p], B, budget, tol, None)
    past = int(best[0]) if best[0] >= 0 else p
    stop_p = "tripled" if past != p and val[0] >= L - tol * (1 + L) else _stop_reason(tT, fut, past, B, L - t[past, p], tol)
    head = _connect(space, past, p, tol)[:-1] if past != p else []
    tail = _connect(space, q, fut, tol)[1:] if fut != q else []
    out = head + chain + tail
    return ExtensionResult(out, past, fut, {"past": stop_p, "future": stop_f}, float(t[past, fut]))


def extension_endpoints(space: FiniteLorentzianSpace, pairs, n: int, tol: float = 1e-9):
    """``(Z-, Z+)`` masks of extended endpoints over all pairs (all ties kept).

    Extension of a maximizer only depends on its endpoints, so the capped
    enumeration of maximizers per pair does not change the result.
    """
    N = space.n
    zp = np.zeros(N, dtype=np.uint8)
    zm = np.zeros(N, dtype=np.uint8)
    pairs = np.asarray(pairs, dtype=np.intp).reshape(-1, 2)
    if len(pairs) == 0:
        return zm.astype(bool), zp.astype(bool)
    t = space.tau
    B = b_minus(space, 1.0 / n)
    P, Q = pairs[:, 0], pairs[:, 1]
    L = t[P, Q]
    val, best, ties = kernels.extension_scan(t, P, Q, B, L, tol, zp)
    # past extension is anchored at every tied future endpoint of its pair
    ends = np.where(best >= 0, best, Q)
    Wp, Wq, Wl = [ends], [P], [L]
    for k in np.flatnonzero(ties > 1):
        p, q = P[k], Q[k]
        row = t[q]
        cand = np.flatnonzero(B & (row == val[k]))
        cand = cand[np.abs(t[p, cand] - t[p, q] - row[cand]) <= tol * (1.0 + t[p, cand])]
        cand = cand[cand != best[k]]
        Wp.append(cand)
        Wq.append(np.full(len(cand), p))
        Wl.append(np.full(len(cand), L[k]))
    tT = np.ascontiguousarray(t.T)
    kernels.extension_scan(tT, np.concatenate(Wp).astype(np.intp), np.concatenate(Wq).astype(np.intp),
                           B, np.concatenate(Wl), tol, zm)
    return zm.astype(bool), zp.astype(bool)


def exhaustion_step(space: FiniteLorentzianSpace, K, n: int, tol: float = 1e-9) -> np.ndarray:
    """``A_n(K)``: union of diamonds between extended past and future endpoints."""
    pairs = delta_n_pairs(space, K, n)
    if len(pairs) == 0:
        warnings.warn(f"no pair of K has sigma >= 1/{n}; A_{n}(K) is empty", EmptyStepWarning, stacklevel=2)
        return np.zeros(space.n, dtype=bool)
    zm, zp = extension_endpoints(space, pairs, n, tol)
    return diamond_mask(space, np.flatnonzero(zm), np.flatnonzero(zp))


def natural_exhaustion(dp: DoublyPointedSpace, n_max: int, mode: str = "sequential",
                       tol: float = 1e-9) -> Exhaustion:
    """Shells ``C_0 = J(p, q)`` and ``C_n = A_n(C_{n-1})`` (union-closed).

    ``mode="repeated"`` instead applies ``A_n`` n times to ``J(p, q)``.
    """
    if mode not in ("sequential", "repeated"):
        raise SpaceInputError(f"unknown mode {mode!r}")
    sp = dp.space
    C0 = diamond_mask(sp, [dp.p], [dp.q])
    shells = [C0]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EmptyStepWarning)
        for n in range(1, n_max + 1):
            if mode == "sequential":
                nxt = exhaustion_step(sp, shells[-1], n, tol)
            else:
                nxt = C0
                for _ in range(n):
                    nxt = exhaustion_step(sp, nxt, n, tol) | nxt
            shells.append(nxt | shells[-1])
    return Exhaustion(shells, meta={"p": dp.p, "q": dp.q, "mode": mode})


def shells_convex(space: FiniteLorentzianSpace, ex: Exhaustion) -> list[bool]:
    return [causally_convex(space, np.flatnonzero(s)) for s in ex.shells]


@dataclass
class WellposednessReport:
    stop_witnesses: list = field(default_factory=list)
    branch_witnesses: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)
    stop_rate: np.ndarray | None = None  # per endpoint q: stop witnesses / timelike pasts, nan if none


def wellposedness_diagnostics(space: FiniteLorentzianSpace, theta: float = 0.2, tol: float = 1e-9,
                              candidates=None, max_branch: int = 10000) -> WellposednessReport:
    """Stop and branch witnesses among timelike pairs.

    A stop witness is ``(p, q)`` with ``I+(q)`` nonempty but no ``w`` such
    that ``p -> q -> w`` is maximal. A branch witness ``(p, m, w1, w2)`` has
    both ``p -> m -> w_i`` maximal with ``tau(p, m) >= theta tau(p, w_i)``
    while no maximizer from ``m`` passes through both ``w1`` and ``w2``.
    ``candidates`` restricts the middle/end point ``q`` (or ``m``).
    """
    t = space.tau
    N = space.n
    allq = np.arange(N) if candidates is None else np.flatnonzero(_mask(N, candidates))
    rep = WellposednessReport(stop_rate=np.full(N, np.nan))
    n_pairs = 0
    for q in allq:
        ps = np.flatnonzero(t[:, q] > tol)
        if len(ps) == 0:
            continue
        ws = np.flatnonzero(t[q] > tol)
        n_pairs += len(ps)
        rep.stop_rate[q] = 0.0
        if len(ws) == 0:
            continue
        tpw = t[np.ix_(ps, ws)]
        ok = np.abs(tpw - t[ps, q][:, None] - t[q, ws][None, :]) <= tol * (1.0 + tpw)
        stopped = np.flatnonzero(~ok.any(axis=1))
        rep.stop_rate[q] = len(stopped) / len(ps)
        for k in stopped:
            rep.stop_witnesses.append((int(ps[k]), int(q)))
        if len(rep.branch_witnesses) >= max_branch:
            continue
        long_enough = ok & (t[ps, q][:, None] >= theta * tpw - tol)
        for k in np.flatnonzero(long_enough.sum(axis=1) >= 2):
            W = ws[long_enough[k]]
            tw = t[q, W]
            # w1, w2 lie on one maximizer from q iff w1 <= w2 and tau(q,w2) = tau(q,w1) + tau(w1,w2)
            sub = t[np.ix_(W, W)]
            same = np.abs(tw[None, :] - tw[:, None] - sub) <= tol * (1.0 + tw[None, :])
            same &= space.leq[np.ix_(W, W)]
            same |= same.T
            np.fill_diagonal(same, True)
            a, b = np.nonzero(np.triu(~same))
            if len(a):
                rep.branch_witnesses.append((int(ps[k]), int(q), int(W[a[0]]), int(W[b[0]])))
                if len(rep.branch_witnesses) >= max_branch:
                    break
    rep.counts = {"pairs": n_pairs, "stop": len(rep.stop_witnesses), "branch": len(rep.branch_witnesses)}
    return rep
