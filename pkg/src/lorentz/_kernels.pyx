# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see :mod:`lorentz._fallback` for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, INFINITY

cnp.import_array()


def longest_paths(order, indptr, indices, weights):
    cdef Py_ssize_t n = len(order)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Tarr = np.full((n, n), -np.inf)
    cdef double[:, ::1] T = Tarr
    cdef const long[::1] od = np.ascontiguousarray(order, dtype=np.int_)
    cdef const long[::1] ip = np.ascontiguousarray(indptr, dtype=np.int_)
    cdef const long[::1] ix = np.ascontiguousarray(indices, dtype=np.int_)
    cdef const double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t a, k, s, v, u
    cdef double c, wt
    with nogil:
        for s in range(n):
            T[s, s] = 0.0
        for a in range(n):
            v = od[a]
            for k in range(ip[v], ip[v + 1]):
                u = ix[k]
                wt = w[k]
                for s in range(n):
                    c = T[u, s] + wt
                    if c > T[v, s]:
                        T[v, s] = c
    return Tarr


def reverse_triangle_defects(tau, leq, double tol, Py_ssize_t limit):
    cdef const double[:, ::1] t = np.ascontiguousarray(tau, dtype=np.float64)
    cdef const cnp.uint8_t[:, ::1] L = np.ascontiguousarray(leq, dtype=np.uint8)
    cdef Py_ssize_t n = t.shape[0]
    cdef Py_ssize_t x, y, z, np_, nf, i, j
    cdef long count = 0
    cdef double worst = 0.0, d, txy
    cdef long[::1] past = np.empty(n, dtype=np.int_)
    cdef long[::1] fut = np.empty(n, dtype=np.int_)
    rows = []
    for y in range(n):
        np_ = 0
        nf = 0
        for x in range(n):
            if x != y and L[x, y]:
                past[np_] = x
                np_ += 1
            if x != y and L[y, x]:
                fut[nf] = x
                nf += 1
        for i in range(np_):
            x = past[i]
            txy = t[x, y]
            for j in range(nf):
                z = fut[j]
                d = txy + t[y, z] - t[x, z]
                if d > tol:
                    count += 1
                    if d > worst:
                        worst = d
                    if len(rows) < limit:
                        rows.append((int(x), int(y), int(z), float(d)))
    return int(count), float(worst), rows


def sup_distance(F, G):
    cdef const double[:, ::1] f = np.ascontiguousarray(F, dtype=np.float64)
    cdef const double[:, ::1] g = np.ascontiguousarray(G, dtype=np.float64)
    cdef Py_ssize_t n = f.shape[0], m = g.shape[0], k = f.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] outarr = np.zeros((n, m))
    cdef double[:, ::1] out = outarr
    cdef Py_ssize_t i, j, c
    cdef double best, d
    with nogil:
        for i in range(n):
            for j in range(m):
                best = 0.0
                for c in range(k):
                    d = fabs(f[i, c] - g[j, c])
                    if d > best:
                        best = d
                out[i, j] = best
    return outarr


def maxplus(A, B):
    cdef const double[:, ::1] a = np.ascontiguousarray(A, dtype=np.float64)
    cdef const double[:, ::1] b = np.ascontiguousarray(B, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0], K = a.shape[1], m = b.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] outarr = np.full((n, m), -np.inf)
    cdef double[:, ::1] out = outarr
    cdef Py_ssize_t i, j, k
    cdef double aik, c
    with nogil:
        for i in range(n):
            for k in range(K):
                aik = a[i, k]
                if aik == -INFINITY:
                    continue
                for j in range(m):
                    c = aik + b[k, j]
                    if c > out[i, j]:
                        out[i, j] = c
    return outarr


def extension_scan(tau, P, Q, allowed, budget, double tol, mark):
    cdef const double[:, ::1] t = np.ascontiguousarray(tau, dtype=np.float64)
    cdef const long[::1] pp = np.ascontiguousarray(P, dtype=np.int_)
    cdef const long[::1] qq = np.ascontiguousarray(Q, dtype=np.int_)
    cdef const cnp.uint8_t[::1] al = np.ascontiguousarray(allowed, dtype=np.uint8)
    cdef const double[::1] bud = np.ascontiguousarray(budget, dtype=np.float64)
    cdef Py_ssize_t m = pp.shape[0], n = t.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] valarr = np.full(m, -1.0)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] bestarr = np.full(m, -1, dtype=np.intp)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] tiearr = np.zeros(m, dtype=np.intp)
    cdef double[::1] val = valarr
    cdef cnp.intp_t[::1] best = bestarr
    cdef cnp.intp_t[::1] ties = tiearr
    cdef cnp.uint8_t[::1] mk
    cdef bint domark = mark is not None
    if domark:
        mk = mark
    cdef Py_ssize_t i, w, p, q, bw
    cdef double tpq, tqw, tpw, bv, lim
    with nogil:
        for i in range(m):
            p = pp[i]
            q = qq[i]
            tpq = t[p, q]
            lim = bud[i] + tol
            bv = -1.0
            bw = -1
            for w in range(n):
                if not al[w]:
                    continue
                tqw = t[q, w]
                if tqw <= tol or tqw > lim:
                    continue
                tpw = t[p, w]
                if fabs(tpw - tpq - tqw) <= tol * (1.0 + tpw):
                    if tqw > bv:
                        bv = tqw
                        bw = w
            val[i] = bv
            best[i] = bw
            if bw < 0:
                if domark:
                    mk[q] = 1
                continue
            for w in range(bw, n):
                if not al[w]:
                    continue
                tqw = t[q, w]
                if tqw != bv:
                    continue
                tpw = t[p, w]
                if fabs(tpw - tpq - tqw) <= tol * (1.0 + tpw):
                    ties[i] += 1
                    if domark:
                        mk[w] = 1
    return valarr, bestarr, tiearr
