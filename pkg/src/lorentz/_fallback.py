"""Pure numpy implementations of the hot kernels.

Signatures and results match :mod:`lorentz._kernels` exactly; the compiled
module is preferred when it imports.
"""
import numpy as np

NO_PATH = -np.inf


def longest_paths(order, indptr, indices, weights):
    """All-pairs longest path over a weighted DAG.

    ``indptr``/``indices``/``weights`` hold the predecessor lists in CSR
    form: the predecessors of ``v`` are ``indices[indptr[v]:indptr[v+1]]``.
    Returns ``T`` with ``T[v, s]`` the longest path weight from ``s`` to
    ``v`` (transposed layout), ``-inf`` where ``v`` is unreachable.
    """
    n = len(order)
    T = np.full((n, n), NO_PATH)
    np.fill_diagonal(T, 0.0)
    for v in order:
        lo, hi = indptr[v], indptr[v + 1]
        if lo == hi:
            continue
        preds = indices[lo:hi]
        cand = T[preds] + weights[lo:hi, None]
        np.maximum(T[v], cand.max(axis=0), out=T[v])
    return T


def reverse_triangle_defects(tau, leq, tol, limit):
    """Scan x <= y <= z for tau(x,z) < tau(x,y) + tau(y,z) - tol.

    Returns ``(count, max_defect, witnesses)``; at most ``limit`` witness
    rows ``(x, y, z, defect)`` are kept.
    """
    n = tau.shape[0]
    count = 0
    worst = 0.0
    rows = []
    for y in range(n):
        past = np.flatnonzero(leq[:, y])
        past = past[past != y]
        fut = np.flatnonzero(leq[y])
        fut = fut[fut != y]
        if len(past) == 0 or len(fut) == 0:
            continue
        d = tau[past, y][:, None] + tau[y, fut][None, :] - tau[np.ix_(past, fut)]
        bad = d > tol
        if bad.any():
            count += int(bad.sum())
            worst = max(worst, float(d.max()))
            if len(rows) < limit:
                ii, jj = np.nonzero(bad)
                for i, j in zip(ii[: limit - len(rows)], jj[: limit - len(rows)]):
                    rows.append((int(past[i]), y, int(fut[j]), float(d[i, j])))
    return count, worst, rows


def sup_distance(F, G, chunk=256):
    """Pairwise sup-norm distance between the rows of ``F`` and ``G``."""
    F = np.ascontiguousarray(F, dtype=float)
    G = np.ascontiguousarray(G, dtype=float)
    out = np.zeros((F.shape[0], G.shape[0]))
    if F.shape[1] == 0:
        return out
    for i in range(0, F.shape[0], chunk):
        blk = F[i:i + chunk]
        out[i:i + chunk] = np.abs(blk[:, None, :] - G[None, :, :]).max(axis=2)
    return out


def maxplus(A, B):
    """``out[i, j] = max_k A[i, k] + B[k, j]``; ``-inf`` entries never win."""
    out = np.full((A.shape[0], B.shape[1]), NO_PATH)
    for k in range(A.shape[1]):
        a = A[:, k]
        b = B[k]
        if np.isneginf(a).all() or np.isneginf(b).all():
            continue
        np.maximum(out, a[:, None] + b[None, :], out=out)
    return out


def extension_scan(tau, P, Q, allowed, budget, tol, mark):
    """Future geodesic-extension scan for the pairs ``(P[i], Q[i])``.

    For each pair, looks for ``w`` with ``allowed[w]``, ``tol < tau(q,w) <=
    budget[i] + tol`` and ``tau(p,w) == tau(p,q) + tau(q,w)`` up to a relative
    tolerance. Returns ``(value, best, ties)``: the largest admissible
    ``tau(q,w)`` (``-1`` when none), the smallest index attaining it (``-1``)
    and the number of indices attaining it. When
    ``mark`` is given, every attaining index is flagged in it, and ``q``
    itself when nothing qualifies.
    """
    P = np.asarray(P, dtype=np.intp)
    Q = np.asarray(Q, dtype=np.intp)
    m = len(P)
    value = np.full(m, -1.0)
    best = np.full(m, -1, dtype=np.intp)
    ties = np.zeros(m, dtype=np.intp)
    allowed = np.asarray(allowed, dtype=bool)
    for q in np.unique(Q):
        sel = np.flatnonzero(Q == q)
        row = tau[q]
        ws = np.flatnonzero(allowed & (row > tol))
        if len(ws) == 0:
            if mark is not None:
                mark[q] = 1
            continue
        tq = row[ws]
        ps = P[sel]
        tpw = tau[np.ix_(ps, ws)]
        tpq = tau[ps, q][:, None]
        ok = np.abs(tpw - tpq - tq[None, :]) <= tol * (1.0 + tpw)
        ok &= tq[None, :] <= budget[sel][:, None] + tol
        vals = np.where(ok, tq[None, :], -1.0)
        vmax = vals.max(axis=1)
        has = vmax > -1.0
        arg = np.argmax(vals, axis=1)
        value[sel] = np.where(has, vmax, -1.0)
        best[sel] = np.where(has, ws[arg], -1)
        hit = (vals == vmax[:, None]) & has[:, None]
        ties[sel] = hit.sum(axis=1)
        if mark is not None:
            if (~has).any():
                mark[q] = 1
            mark[ws[hit.any(axis=0)]] = 1
    return value, best, ties
