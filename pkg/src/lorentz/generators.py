"""Deterministic sampled fixtures with closed-form oracles."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .core import (FiniteLorentzianSpace, SpaceInputError, chain_tau,
                   links_from_leq)

KINDS = ("minkowski_slab", "minkowski_diamond", "cylinder", "triangle_extension",
         "conformal_Y", "cigar_product")

# relative floor under which Delta t^2 - d^2 counts as null (grid null lines)
NULL_SNAP = 1e-12


class GenerationError(ValueError):
    pass


@dataclass
class GeneratorSpec:
    kind: str
    n: int = 500
    sampling: str = "poisson"
    seed: int | None = None
    dimension: int = 1
    params: dict = field(default_factory=dict)
    tau_mode: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise GenerationError(f"unknown kind {self.kind!r}")
        if self.n < 2:
            raise GenerationError("density N must be at least 2")
        if self.sampling not in ("grid", "poisson"):
            raise GenerationError(f"unknown sampling {self.sampling!r}")
        if self.sampling == "poisson" and self.seed is None:
            raise GenerationError("poisson sampling requires a seed")
        if self.tau_mode not in (None, "chain", "oracle"):
            raise GenerationError(f"unknown tau_mode {self.tau_mode!r}")

    def to_dict(self):
        return asdict(self)


@dataclass
class Oracle:
    """Closed-form tau and causality on coordinate rows.

    ``error`` is the declared tolerance for comparisons against sampled tau
    (axiom slack for oracle-tau fixtures, quadrature error otherwise).
    """

    tau_fn: Callable
    causal_fn: Callable
    error: float = 1e-9
    exact: bool = True

    def tau(self, a, b):
        return self.tau_fn(np.atleast_2d(a), np.atleast_2d(b))

    def causal(self, a, b):
        return self.causal_fn(np.atleast_2d(a), np.atleast_2d(b))

    def matrix(self, coords):
        return self.tau_fn(coords[:, None, :], coords[None, :, :])

    def causal_matrix(self, coords):
        return self.causal_fn(coords[:, None, :], coords[None, :, :])


def _snap_sqrt(dt, d):
    s = dt * dt - d * d
    s = np.where(s <= NULL_SNAP * np.maximum(dt * dt, 1e-300), 0.0, s)
    return np.sqrt(s)


def _causal(dt, d):
    scale = np.maximum(np.abs(dt), 1.0)
    return (dt >= -1e-12) & (dt * dt - d * d >= -NULL_SNAP * scale * scale) & ((dt > 1e-12) | (d < 1e-12))


def minkowski_oracle() -> Oracle:
    def geom(a, b):
        dt = b[..., 0] - a[..., 0]
        dx = np.sqrt(((b[..., 1:] - a[..., 1:]) ** 2).sum(axis=-1))
        return dt, dx

    def tau(a, b):
        dt, dx = geom(a, b)
        return np.where(_causal(dt, dx) & (dt > 0), _snap_sqrt(np.maximum(dt, 0), dx), 0.0)

    def causal(a, b):
        return _causal(*geom(a, b))

    return Oracle(tau, causal)


def cylinder_oracle(circ: float = 2 * math.pi) -> Oracle:
    def geom(a, b):
        dt = b[..., 0] - a[..., 0]
        dth = np.abs(b[..., 1] - a[..., 1]) % circ
        return dt, np.minimum(dth, circ - dth)

    def tau(a, b):
        # max over windings k of sqrt(dt^2 - (dtheta + circ k)^2): the shortest winding wins
        dt, d = geom(a, b)
        return np.where(_causal(dt, d) & (dt > 0), _snap_sqrt(np.maximum(dt, 0), d), 0.0)

    def causal(a, b):
        return _causal(*geom(a, b))

    return Oracle(tau, causal)


def cylinder_tau_windings(dt: float, dtheta: float, circ: float = 2 * math.pi, kmax: int = 4) -> float:
    """Direct max over windings; used to cross-check the oracle."""
    best = 0.0
    for k in range(-kmax, kmax + 1):
        s = dt * dt - (dtheta + circ * k) ** 2
        if dt > 0 and s > 0:
            best = max(best, math.sqrt(s))
    return best


# ---------------------------------------------------------------- sampling

def sprinkle(rng: np.random.Generator, lows, highs, expected: float, cells: int = 16):
    """Poisson points in a box, drawn cell by cell along the first axis in fixed order."""
    lows = np.asarray(lows, dtype=float)
    highs = np.asarray(highs, dtype=float)
    edges = np.linspace(lows[0], highs[0], cells + 1)
    out = []
    for c in range(cells):
        k = rng.poisson(expected / cells)
        u = rng.random((k, len(lows)))
        lo = lows.copy()
        hi = highs.copy()
        lo[0], hi[0] = edges[c], edges[c + 1]
        out.append(lo + u * (hi - lo))
    return np.concatenate(out) if out else np.zeros((0, len(lows)))


def _sort_rows(pts):
    if len(pts) == 0:
        return pts
    order = np.lexsort(pts.T[::-1])
    return pts[order]


def _finish(coords, oracle, tau_mode, spec, edges=None, marks=None, local_radius=None):
    """Build the space.

    Oracle mode stores the closed-form tau and the light-cone order. Chain mode intrinsifies over
    ``edges``; by default these are the causal pairs within coordinate
    distance ``local_radius`` (a localizing neighbourhood), or the links of
    the order when ``local_radius`` is None. The order is then reachability
    along the edges, which keeps the reverse triangle inequality exact.
    """
    if len(coords) == 0:
        raise GenerationError("empty sample")
    leq = oracle.causal_matrix(coords)
    np.fill_diagonal(leq, True)
    otau = oracle.matrix(coords)
    np.fill_diagonal(otau, 0.0)
    meta = {"generator": spec.to_dict() if spec is not None else None,
            "tau_mode": tau_mode, "oracle_error": oracle.error}
    if tau_mode == "oracle":
        links = tuple(links_from_leq(leq, otau))
        return FiniteLorentzianSpace(leq=leq, tau=otau, coords=coords, marks=marks,
                                     links=links, meta=meta)
    if edges is None:
        if local_radius is None:
            edges = links_from_leq(leq, otau)
        else:
            edges = _local_edges(coords, oracle.tau_fn, local_radius)
            meta["local_radius"] = local_radius
    tau, reach = chain_tau(len(coords), edges)
    return FiniteLorentzianSpace(leq=reach, tau=tau, coords=coords, marks=marks,
                                 links=tuple(edges), meta=meta)


def _local_radius(P, extent):
    if P.get("edges", "local") == "links":
        return None
    return P.get("local_radius", 0.15 * extent)


def _grid_axis(lo, hi, h):
    k = int(math.floor((hi - lo) / h + 1e-9))
    return lo + h * np.arange(k + 1)


# ---------------------------------------------------------------- Minkowski

def gen_minkowski(spec: GeneratorSpec):
    """Minkowski slab, half-space slab or causal diamond.

    params: slab ``t0, t1, x_extent`` (box ``[-x_extent, x_extent]^d``, or
    ``[0, x_extent]`` in the first spatial axis with ``half=True``);
    diamond ``p``, ``q`` tip coordinates (same spatial position).
    """
    d = spec.dimension
    P = spec.params
    oracle = minkowski_oracle()
    tau_mode = spec.tau_mode or ("chain" if spec.sampling == "poisson" else "oracle")
    if spec.kind == "minkowski_slab":
        t0, t1 = P.get("t0", 0.0), P.get("t1", 1.0)
        X = P.get("x_extent", 5.0)
        half = P.get("half", False)
        if not t1 > t0 or X <= 0:
            raise GenerationError("degenerate slab region")
        xlo = np.full(d, -X)
        if half:
            xlo[0] = 0.0
        xhi = np.full(d, X)
        if spec.sampling == "grid":
            vol = (t1 - t0) * np.prod(xhi - xlo)
            h = P.get("h") or (vol / spec.n) ** (1.0 / (d + 1))
            axes = [_grid_axis(t0, t1, h)] + [_grid_axis(xlo[i], xhi[i], h) for i in range(d)]
            pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d + 1)
        else:
            rng = np.random.default_rng(spec.seed)
            pts = sprinkle(rng, np.r_[t0, xlo], np.r_[t1, xhi], spec.n)
        coords = _sort_rows(pts)
        return _finish(coords, oracle, tau_mode, spec, local_radius=_local_radius(P, t1 - t0)), oracle
    # diamond
    p = np.asarray(P.get("p", [0.0] + [0.0] * d), dtype=float)
    q = np.asarray(P.get("q", [2.0] + [0.0] * d), dtype=float)
    if not (q[0] - p[0] > 0 and np.allclose(p[1:], q[1:])):
        raise GenerationError("diamond tips must be vertically timelike related")
    H = q[0] - p[0]
    if spec.sampling == "grid" and d == 1:
        # light-cone lattice: exact null lines through every point
        m = max(int(round(math.sqrt(spec.n))) - 1, 1)
        u = np.arange(m + 1) * (H / m)
        U, V = np.meshgrid(u, u, indexing="ij")
        t = p[0] + 0.5 * (U + V).ravel()
        x = p[1] + 0.5 * (U - V).ravel()
        pts = _sort_rows(np.stack([t, x], axis=1))
        coords = np.concatenate([pts[:1], pts[-1:], pts[1:-1]])
    else:
        if spec.sampling == "grid":
            vol_box = H * H ** d
            h = (vol_box / spec.n / (2.0 ** d) * 2) ** (1.0 / (d + 1))
            axes = [_grid_axis(p[0], q[0], h)] + [_grid_axis(p[1 + i] - H / 2, p[1 + i] + H / 2, h) for i in range(d)]
            pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d + 1)
        else:
            rng = np.random.default_rng(spec.seed)
            # box volume / diamond volume in 1+d
            ball = math.pi ** (d / 2) / math.gamma(d / 2 + 1)
            vol_d = 2 * ball * (H / 2) ** (d + 1) / (d + 1)
            vol_box = H * H ** d
            pts = sprinkle(rng, np.r_[p[0], p[1:] - H / 2], np.r_[q[0], p[1:] + H / 2],
                           spec.n * vol_box / vol_d)
        r = np.sqrt(((pts[:, 1:] - p[1:]) ** 2).sum(axis=1))
        inside = (r <= pts[:, 0] - p[0]) & (r <= q[0] - pts[:, 0])
        pts = _sort_rows(pts[inside])
        far = np.abs(pts - p).max(axis=1) > 1e-12
        far &= np.abs(pts - q).max(axis=1) > 1e-12
        coords = np.concatenate([p[None], q[None], pts[far]])
    return _finish(coords, oracle, tau_mode, spec, local_radius=_local_radius(P, H)), oracle


# ---------------------------------------------------------------- cylinder

def gen_cylinder(spec: GeneratorSpec):
    """R x S^1 with circumference 2 pi; params ``t0``, ``t1``."""
    P = spec.params
    circ = P.get("circumference", 2 * math.pi)
    t0, t1 = P.get("t0", 0.0), P.get("t1", 2 * math.pi)
    oracle = cylinder_oracle(circ)
    tau_mode = spec.tau_mode or "oracle"
    if spec.sampling == "grid":
        h = P.get("h") or math.sqrt((t1 - t0) * circ / spec.n)
        m = max(int(round(circ / h)), 3)
        h = circ / m
        ts = _grid_axis(t0, t1, h)
        th = h * np.arange(m)
        T, TH = np.meshgrid(ts, th, indexing="ij")
        coords = np.stack([T.ravel(), TH.ravel()], axis=1)
    else:
        rng = np.random.default_rng(spec.seed)
        coords = sprinkle(rng, [t0, 0.0], [t1, circ], spec.n)
    coords = _sort_rows(coords)
    return _finish(coords, oracle, tau_mode, spec), oracle


# ---------------------------------------------------------------- triangle extension

def _local_edges(coords, tau_fn, radius, weight_fn=None, keep=None):
    """Causal pairs with coordinate distance <= radius, weighted by tau (times weight_fn(mid))."""
    from scipy.spatial import cKDTree

    tree = cKDTree(coords)
    pairs = tree.query_pairs(radius, output_type="ndarray")
    if len(pairs) == 0:
        return []
    a, b = pairs[:, 0], pairs[:, 1]
    swap = coords[a, 0] > coords[b, 0]
    a, b = np.where(swap, b, a), np.where(swap, a, b)
    ca, cb = coords[a], coords[b]
    causal = minkowski_oracle().causal_fn(ca, cb) & (cb[:, 0] > ca[:, 0])
    a, b, ca, cb = a[causal], b[causal], ca[causal], cb[causal]
    w = tau_fn(ca, cb)
    if weight_fn is not None:
        w = w * weight_fn(0.5 * (ca + cb))
    ok = np.ones(len(a), dtype=bool) if keep is None else keep(ca, cb)
    return [(int(i), int(j), float(x)) for i, j, x, k in zip(a, b, w, ok) if k]


def gen_triangle_extension(base: FiniteLorentzianSpace, maximizer, D: float,
                           h: float | None = None, radius: float = 3.0):
    """Glue a flat null-edged triangle to ``base`` along an arclength maximizer.

    The triangle is ``{x1 >= 0, x1 <= x0 <= D - x1}``; its timelike edge is
    identified with the maximizer points at their tau-arclength. Tau is
    recomputed by chain intrinsification through the seam.
    """
    chain = [int(c) for c in maximizer]
    if not D > 0:
        raise SpaceInputError("triangle height D must be positive")
    tt = base.tau
    arclen = np.array([tt[chain[0], c] for c in chain])
    if arclen[-1] < D - 1e-9:
        raise SpaceInputError(f"maximizer tau-length {arclen[-1]:.6g} shorter than D={D}")
    seam = [c for c, s in zip(chain, arclen) if s <= D + 1e-9]
    seam_t = arclen[: len(seam)]
    if h is None:
        h = D / max(len(seam) - 1, 4)
    pts = []
    j = 1
    while j * h <= D / 2 + 1e-12:
        x1 = j * h
        x0 = x1
        while x0 <= D - x1 + 1e-12:
            pts.append((x0, x1))
            x0 += h
        j += 1
    tri = np.array(pts, dtype=float).reshape(-1, 2)
    nb = base.n
    seam_chart = np.stack([seam_t, np.zeros(len(seam))], axis=1)
    chart = np.concatenate([seam_chart, tri])
    ids = np.concatenate([np.asarray(seam), nb + np.arange(len(tri))])
    mo = minkowski_oracle()
    edges = []
    for i, j, w in _local_edges(chart, mo.tau_fn, radius * h + 1e-9):
        edges.append((int(ids[i]), int(ids[j]), w))
    if base.links:
        edges.extend(base.links)
    else:
        ii, jj = np.nonzero(base.leq & ~np.eye(nb, dtype=bool))
        edges.extend((int(i), int(j), float(tt[i, j])) for i, j in zip(ii, jj))
    n = nb + len(tri)
    tau, reach = chain_tau(n, edges)
    meta = {"generator": {"kind": "triangle_extension", "D": D, "h": h},
            "seam": [int(s) for s in seam], "triangle_chart": tri.tolist(),
            "tau_mode": "chain", "oracle_error": base.meta.get("oracle_error", 1e-9)}
    return FiniteLorentzianSpace(leq=reach, tau=tau, links=tuple(edges), meta=meta)


def gen_triangle_fixture(spec: GeneratorSpec):
    """Triangle extension of a sampled Minkowski diamond along its tip-to-tip maximizer."""
    from .core import maximizers

    base_spec = GeneratorSpec("minkowski_diamond", n=spec.n, sampling=spec.sampling,
                              seed=spec.seed, params=dict(spec.params.get("base", {})))
    base, oracle = gen_minkowski(base_spec)
    D = spec.params.get("D", None)
    chain = maximizers(base, 0, 1, cap=1)[0]
    if D is None:
        D = float(base.tau[0, 1])
    out = gen_triangle_extension(base, chain, D, h=spec.params.get("h"))
    out.meta["generator"] = spec.to_dict()
    return out, oracle


# ---------------------------------------------------------------- conformal Y

def plateau_f(theta):
    """Nonnegative C^1 profile: 0 on the timelike quarter sectors, 1 near the spatial axis."""
    th = np.mod(theta, 2 * np.pi)
    x = th / np.pi  # in units of pi
    knots = [(0.0, 1.0), (1 / 8, 1.0), (1 / 4, 0.0), (3 / 4, 0.0), (7 / 8, 1.0),
             (9 / 8, 1.0), (5 / 4, 0.0), (7 / 4, 0.0), (15 / 8, 1.0), (2.0, 1.0)]
    out = np.zeros_like(x, dtype=float)
    for (a, fa), (b, fb) in zip(knots, knots[1:]):
        sel = (x >= a) & (x <= b)
        s = (x[sel] - a) / (b - a)
        s = s * s * (3 - 2 * s)
        out[sel] = fa + (fb - fa) * s
    return out


def conformal_factor(pts):
    pts = np.atleast_2d(pts)
    x0, x1 = pts[..., 0], pts[..., 1]
    theta = np.arctan2(x0, x1)
    f = plateau_f(theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        bump = np.where(f > 0, np.abs(x1) ** -0.5 * f, 0.0)
    return 1.0 + bump


def _segment_clearance(ca, cb):
    d = cb - ca
    L2 = (d * d).sum(axis=1)
    s = np.clip(-(ca * d).sum(axis=1) / np.maximum(L2, 1e-300), 0.0, 1.0)
    c = ca + s[:, None] * d
    return np.sqrt((c * c).sum(axis=1))


def gen_conformal_Y(spec: GeneratorSpec):
    """1+1 Minkowski rescaled by omega = 1 + |x1|^(-1/2) f(theta), punctured at 0.

    params: ``extent`` (square half-width), ``radius`` (edge reach in units of
    the spacing), ``puncture`` (excluded radius; default half a spacing),
    ``conformal`` (False gives the flat control sample with the same hole).
    """
    P = spec.params
    a = P.get("extent", 1.0)
    if spec.sampling == "grid":
        h = P.get("h") or 2 * a / (math.sqrt(spec.n) - 1)
        ax = _grid_axis(-a, a, h)
        T, X = np.meshgrid(ax, ax, indexing="ij")
        pts = np.stack([T.ravel(), X.ravel()], axis=1)
    else:
        rng = np.random.default_rng(spec.seed)
        pts = sprinkle(rng, [-a, -a], [a, a], spec.n)
        h = 2 * a / math.sqrt(spec.n)
    r0 = P.get("puncture", 0.5 * h)
    if P.get("reject_origin", False) and (np.abs(pts).max(axis=1) == 0).any():
        raise GenerationError("sample contains the singular origin")
    pts = _sort_rows(pts[np.sqrt((pts ** 2).sum(axis=1)) > r0])
    radius = P.get("radius", 3.0) * h + 1e-9
    mo = minkowski_oracle()
    weight = conformal_factor if P.get("conformal", True) else None
    edges = _local_edges(pts, mo.tau_fn, radius, weight_fn=weight,
                         keep=lambda ca, cb: _segment_clearance(ca, cb) > r0)
    oracle = Oracle(mo.tau_fn, mo.causal_fn, error=P.get("quadrature_error", 0.05), exact=False)
    tau, reach = chain_tau(len(pts), edges)
    meta = {"generator": spec.to_dict(), "tau_mode": "chain", "oracle_error": oracle.error,
            "puncture": r0, "spacing": h}
    space = FiniteLorentzianSpace(leq=reach, tau=tau, coords=pts, links=tuple(edges), meta=meta)
    return space, oracle


# ---------------------------------------------------------------- cigar

def cigar_graph(m: int = 12, cap_rings: int = 4, length: float = 10.0, ring_step: float | None = None):
    """Hemisphere-capped half cylinder (radius 1) sampled on a geodesic grid.

    Returns ``(xyz, rs, dist)``: embedding coordinates, (meridian arclength
    from the tip, longitude) and all-pairs graph distances.
    """
    step = ring_step or (math.pi / 2) / cap_rings
    nodes = [(0.0, 0.0)]  # (arclength from tip, longitude)
    rings = []
    r = step
    while r <= length + math.pi / 2 + 1e-9:
        rings.append(r)
        r += step
    for r in rings:
        for k in range(m):
            nodes.append((r, 2 * math.pi * k / m))
    rs = np.array(nodes)

    def embed(r, s):
        if r <= math.pi / 2:
            rho, z = math.sin(r), -math.cos(r)
        else:
            rho, z = 1.0, r - math.pi / 2
        return (rho * math.cos(s), rho * math.sin(s), z)

    xyz = np.array([embed(r, s) for r, s in nodes])
    idx = lambda ring, k: 1 + ring * m + (k % m)
    rows, cols = [], []
    for k in range(m):
        rows.append(0)
        cols.append(idx(0, k))
    for ri in range(len(rings)):
        for k in range(m):
            rows += [idx(ri, k)]
            cols += [idx(ri, k + 1)]
            if ri + 1 < len(rings):
                rows += [idx(ri, k), idx(ri, k), idx(ri, k)]
                cols += [idx(ri + 1, k), idx(ri + 1, k + 1), idx(ri + 1, k - 1)]
    rows = np.array(rows)
    cols = np.array(cols)
    w = np.sqrt(((xyz[rows] - xyz[cols]) ** 2).sum(axis=1))
    G = coo_matrix((w, (rows, cols)), shape=(len(rs), len(rs))).tocsr()
    ncomp, _ = connected_components(G, directed=False)
    if ncomp != 1:
        raise GenerationError("disconnected cigar sample")
    dist = shortest_path(G, method="D", directed=False)
    return xyz, rs, dist


def cigar_oracle(rs, dist) -> Oracle:
    """Static-product oracle on ``(t, r, s)`` rows whose ``(r, s)`` are cigar nodes."""
    from scipy.spatial import cKDTree

    tree = cKDTree(rs)

    def node(x):
        d, k = tree.query(x[..., 1:3].reshape(-1, 2))
        if (d > 1e-9).any():
            raise GenerationError("coordinates are not cigar nodes")
        return k.reshape(x.shape[:-1])

    def spatial(a, b):
        a, b = np.broadcast_arrays(a, b)
        return dist[node(a), node(b)]

    def tau_fn(a, b):
        a, b = np.broadcast_arrays(a, b)
        dt = b[..., 0] - a[..., 0]
        dc = spatial(a, b)
        return np.where(_causal(dt, dc) & (dt > 0), _snap_sqrt(np.maximum(dt, 0), dc), 0.0)

    def causal_fn(a, b):
        a, b = np.broadcast_arrays(a, b)
        return _causal(b[..., 0] - a[..., 0], spatial(a, b))

    orc = Oracle(tau_fn, causal_fn, error=1e-9)
    orc.spatial_dist = dist
    return orc


def gen_cigar_product(spec: GeneratorSpec):
    """(R x C, -dt^2 + g_C) with C a sampled cigar; tau = sqrt(dt^2 - d_C^2).

    Coordinates are ``(t, r, s)`` with ``r`` the meridian arclength from the
    cap tip. The ``t = 0`` layer is always present (grid in t otherwise, or
    Poisson times per spatial node).
    """
    P = spec.params
    m = P.get("m", 12)
    T = P.get("t_max", 2.0)
    length = P.get("length", 5.0 * T)
    xyz, rs, dist = cigar_graph(m=m, cap_rings=P.get("cap_rings", 4), length=length,
                                ring_step=P.get("ring_step"))
    ns = len(rs)
    if spec.sampling == "grid":
        # time step equal to the ring spacing, so meridian null relations are exact
        dt_step = P.get("dt") or rs[1 + m, 0] - rs[1, 0]
        levels = min(max(int(round(spec.n / ns)), 2), int(math.floor(T / dt_step + 1e-9)) + 1)
        ts = dt_step * np.arange(levels)
        tcol = np.repeat(ts, ns)
        scol = np.tile(np.arange(ns), levels)
    else:
        rng = np.random.default_rng(spec.seed)
        extra = rng.poisson(max(spec.n - ns, 0) / ns, size=ns)
        tcol = np.concatenate([np.zeros(ns)] + [rng.random(k) * T for k in extra])
        scol = np.concatenate([np.arange(ns)] + [np.full(k, j) for j, k in enumerate(extra)])
        order = np.lexsort((scol, tcol))
        tcol, scol = tcol[order], scol[order]
    coords = np.stack([tcol, rs[scol, 0], rs[scol, 1]], axis=1)

    dt = tcol[None, :] - tcol[:, None]
    dc = dist[np.ix_(scol, scol)]
    leq = _causal(dt, dc)
    np.fill_diagonal(leq, True)
    tau = np.where(leq & (dt > 0), _snap_sqrt(np.maximum(dt, 0), dc), 0.0)
    np.fill_diagonal(tau, 0.0)
    oracle = cigar_oracle(rs, dist)
    links = tuple(links_from_leq(leq, tau)) if P.get("links", False) else ()
    meta = {"generator": spec.to_dict(), "tau_mode": "oracle", "oracle_error": 1e-9,
            "spatial_nodes": scol.tolist(), "length": length}
    space = FiniteLorentzianSpace(leq=leq, tau=tau, coords=coords, links=links, meta=meta)
    return space, oracle


def generate(spec: GeneratorSpec):
    """Dispatch on ``spec.kind``; returns ``(space, oracle)``."""
    if spec.kind in ("minkowski_slab", "minkowski_diamond"):
        return gen_minkowski(spec)
    if spec.kind == "cylinder":
        return gen_cylinder(spec)
    if spec.kind == "triangle_extension":
        return gen_triangle_fixture(spec)
    if spec.kind == "conformal_Y":
        return gen_conformal_Y(spec)
    return gen_cigar_product(spec)
