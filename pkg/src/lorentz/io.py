"""JSON interchange for spaces and artifacts, CSV for matrices, run manifests."""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .core import FiniteLorentzianSpace, SpaceInputError, chain_tau

FORMAT_VERSION = 1


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def canonical(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, separators=(",", ":"))


def digest(obj) -> str:
    return hashlib.sha256(canonical(obj).encode()).hexdigest()


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def space_to_dict(space: FiniteLorentzianSpace) -> dict:
    """Chain-tau spaces are stored by their links; others by explicit pairs and matrix."""
    chain = space.meta.get("tau_mode") == "chain" and len(space.links) > 0
    if chain:
        tau, reach = chain_tau(space.n, space.links)
        chain = np.array_equal(tau, space.tau) and np.array_equal(reach, space.leq)
    d = {
        "format": FORMAT_VERSION,
        "n": space.n,
        "coords": None if space.coords is None else space.coords.tolist(),
        "links": [[int(i), int(j), float(w)] for i, j, w in space.links],
        "marks": None if space.marks is None else list(space.marks),
        "meta": _jsonable(space.meta),
    }
    if chain:
        d["leq"] = "derived"
        d["tau"] = "chain"
    else:
        ii, jj = np.nonzero(space.leq & ~np.eye(space.n, dtype=bool))
        d["leq"] = np.stack([ii, jj], axis=1).tolist()
        d["tau"] = space.tau.tolist()
    if space.base_dist is not None:
        d["base_dist"] = space.base_dist.tolist()
    return d


def space_from_dict(d: dict) -> FiniteLorentzianSpace:
    try:
        n = int(d["n"])
        links = tuple((int(i), int(j), float(w)) for i, j, w in d.get("links") or [])
        tau_spec = d.get("tau", "chain")
        leq_spec = d.get("leq", "derived")
    except (KeyError, TypeError, ValueError) as exc:
        raise SpaceInputError(f"malformed space document: {exc}") from exc
    if any(not (0 <= i < n and 0 <= j < n) for i, j, _ in links):
        raise SpaceInputError("link endpoint out of range")
    reach = None
    if tau_spec == "chain":
        tau, reach = chain_tau(n, links)
    else:
        tau = np.asarray(tau_spec, dtype=float)
        if tau.shape != (n, n):
            raise SpaceInputError("tau matrix has the wrong shape")
    if leq_spec == "derived":
        if reach is None:
            reach = chain_tau(n, links)[1] if links else _closure(tau > 0)
        leq = reach
    else:
        pairs = np.asarray(leq_spec, dtype=int).reshape(-1, 2)
        if len(pairs) and (pairs.min() < 0 or pairs.max() >= n):
            raise SpaceInputError("leq pair out of range")
        leq = np.eye(n, dtype=bool)
        leq[pairs[:, 0], pairs[:, 1]] = True
    bd = d.get("base_dist")
    return FiniteLorentzianSpace(leq=leq, tau=tau, coords=d.get("coords"),
                                 base_dist=None if bd is None else np.asarray(bd, dtype=float),
                                 marks=d.get("marks"), links=links, meta=dict(d.get("meta") or {}))


def _closure(rel):
    n = len(rel)
    R = rel | np.eye(n, dtype=bool)
    while True:
        Rf = R.astype(np.float32)
        nxt = (Rf @ Rf) > 0
        if np.array_equal(nxt, R):
            return R
        R = nxt


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise SpaceInputError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise SpaceInputError(f"{path}: invalid JSON ({exc})") from exc


def load_space(path) -> FiniteLorentzianSpace:
    doc = read_json(path)
    return space_from_dict(doc.get("space", doc))


def write_json(path, payload: dict, manifest: dict | None = None) -> str:
    """Write ``payload`` with an embedded manifest and its hash; returns the hash."""
    body = dict(payload)
    h = None
    if manifest is not None:
        h = digest(manifest)
        body["manifest"] = manifest
        body["manifest_hash"] = h
    Path(path).write_text(canonical(body) + "\n")
    return h


def write_csv(path, M, row_ids=None, col_ids=None, manifest_hash: str | None = None):
    """Row-major matrix with a header row of column ids and an id column."""
    M = np.asarray(M)
    rows = np.arange(M.shape[0]) if row_ids is None else row_ids
    cols = np.arange(M.shape[1]) if col_ids is None else col_ids
    lines = []
    if manifest_hash:
        lines.append(f"# manifest_hash={manifest_hash}")
    lines.append(",".join(["id"] + [str(c) for c in cols]))
    for r, row in zip(rows, M):
        lines.append(",".join([str(r)] + [repr(float(v)) if M.dtype.kind == "f" else str(v) for v in row]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path):
    """``(matrix, row_ids, col_ids, manifest_hash)`` from :func:`write_csv` output."""
    text = Path(path).read_text().splitlines()
    h = None
    if text and text[0].startswith("# manifest_hash="):
        h = text[0].split("=", 1)[1]
        text = text[1:]
    header = text[0].split(",")[1:]
    rows, vals = [], []
    for line in text[1:]:
        parts = line.split(",")
        rows.append(parts[0])
        vals.append([float(v) for v in parts[1:]])
    return np.array(vals).reshape(len(rows), len(header)), rows, header, h
