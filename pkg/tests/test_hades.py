import numpy as np
import pytest

from lorentz.core import FiniteLorentzianSpace, SpaceInputError
from lorentz.generators import GeneratorSpec, generate
from lorentz.hades import (AmbiguousMatchError, CauchySlice, check_injective, check_monotone,
                           counterexample_search, reconstruct_isometry, relation, shadow)


@pytest.fixture(scope="module")
def slab():
    sp, _ = generate(GeneratorSpec("minkowski_slab", sampling="grid", tau_mode="oracle",
                                   params={"t0": 0, "t1": 2, "x_extent": 2.0, "h": 0.25}))
    return sp


def _at(sp, t, x):
    return int(np.flatnonzero((np.abs(sp.coords[:, 0] - t) < 1e-12) & (np.abs(sp.coords[:, 1] - x) < 1e-12))[0])


def _level(sp, t):
    return CauchySlice(np.flatnonzero(np.abs(sp.coords[:, 0] - t) < 1e-12))


def test_shadow_closed_form(slab):
    S = _level(slab, 0)
    prof = shadow(slab, S, _at(slab, 1, 0))
    k = int(np.flatnonzero(S.ids == _at(slab, 0, 0))[0])
    assert prof.values[k] == pytest.approx(0.5, abs=1e-12)
    xs = slab.coords[S.ids, 1]
    inside = np.abs(xs) < 1
    np.testing.assert_allclose(prof.values[inside], 0.5 * np.sqrt(1 - xs[inside] ** 2), atol=1e-12)
    assert (prof.values[~inside] == 0).all()


def test_shadow_of_slice_point(slab):
    S = _level(slab, 0)
    p = _at(slab, 0, 0.5)
    prof = shadow(slab, S, p)
    assert (prof.values == 0).all()
    assert prof.support.tolist() == [p]
    assert len(prof.strict_support) == 0


def test_shadow_below_slice(slab):
    S = _level(slab, 1)
    p = _at(slab, 0, 0)
    prof = shadow(slab, S, p)
    assert len(prof.support) == 0
    assert (prof.values <= 0).all() and (prof.values < 0).any()


def test_shadow_is_relabeling_equivariant(slab):
    S = _level(slab, 0)
    perm = np.random.default_rng(0).permutation(slab.n)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(slab.n)
    p = _at(slab, 1.5, 0.25)
    a = shadow(slab, S, p)
    b = shadow(slab.relabel(perm), CauchySlice(inv[S.ids]), int(inv[p]))
    np.testing.assert_array_equal(a.values, b.values)


def test_slice_must_be_antichain(slab):
    with pytest.raises(SpaceInputError):
        shadow(slab, CauchySlice([_at(slab, 0, 0), _at(slab, 1, 0)]), 0)
    with pytest.raises(SpaceInputError):
        CauchySlice([])


def test_monotone_vertical_pair(slab):
    S = _level(slab, 0)
    p, q = _at(slab, 1, 0), _at(slab, 2, 0)
    rep = check_monotone(slab, S, region=[p, q])
    assert rep.passed and rep.strict_pairs == 1 and rep.strict_found == 1
    k = int(np.flatnonzero(S.ids == _at(slab, 0, 0))[0])
    gap = shadow(slab, S, q).values[k] - shadow(slab, S, p).values[k]
    assert gap == pytest.approx(0.5, abs=1e-12)


def test_monotone_null_pair(slab):
    S = _level(slab, 0)
    p, q = _at(slab, 1, 0), _at(slab, 1.5, 0.5)
    assert relation(slab, p, q) == "null"
    rep = check_monotone(slab, S, region=[p, q])
    assert rep.passed and rep.pairs == 1 and rep.strict_pairs == 0
    assert (shadow(slab, S, q).values >= shadow(slab, S, p).values - 1e-12).all()


def test_monotone_whole_slab(slab):
    rep = check_monotone(slab, _level(slab, 0))
    assert rep.passed and rep.strict_found == rep.strict_pairs > 0


def test_injective_on_slab_interior(slab):
    S = _level(slab, 0)
    region = np.flatnonzero((np.abs(slab.coords[:, 1]) <= 1) & (slab.coords[:, 0] <= 1))
    rep = check_injective(slab, S, region, tol=1e-9)
    assert rep.collisions == [] and rep.min_gap > 1e-9


def test_duplicate_point_collides(slab):
    d = _at(slab, 1, 0)
    idx = np.append(np.arange(slab.n), d)
    leq = slab.leq[np.ix_(idx, idx)].copy()
    tau = slab.tau[np.ix_(idx, idx)]
    twin = FiniteLorentzianSpace(leq=leq, tau=tau, coords=slab.coords[idx])
    rep = check_injective(twin, _level(twin, 0), tol=1e-9)
    assert (d, slab.n, 0.0) in [tuple(c) for c in rep.collisions]
    assert counterexample_search(twin, _level(twin, 0))


def test_reconstruct_relabeled_copy(slab):
    S = _level(slab, 0)
    perm = np.random.default_rng(1).permutation(slab.n)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(slab.n)
    rep = reconstruct_isometry(slab, S, slab.relabel(perm), CauchySlice(inv[S.ids]))
    assert len(rep.mapping) == slab.n and rep.unmatched == [] and rep.tau_defect == 0
    assert all(rep.mapping[k] == inv[k] for k in rep.mapping)


def test_reconstruct_truncated_copy(slab):
    S = _level(slab, 0)
    t = slab.coords[:, 0]
    keep = np.flatnonzero(t <= np.quantile(t, 0.9) - 1e-12)
    cut = slab.subspace(keep)
    pos = {int(v): k for k, v in enumerate(keep)}
    rep = reconstruct_isometry(slab, S, cut, CauchySlice([pos[int(s)] for s in S.ids]))
    assert rep.tau_defect == 0
    assert all(keep[v] == k for k, v in rep.mapping.items())
    assert set(rep.mapping) == set(keep.tolist())
    assert set(rep.unmatched) == set(np.setdiff1d(np.arange(slab.n), keep).tolist())


def test_reconstruct_perturbed_point(slab):
    tol = 1e-6
    S = _level(slab, 0)
    p = _at(slab, 1, 0)
    tau = slab.tau.copy()
    live = tau[S.ids, p] > 0
    tau[S.ids[live], p] += 10 * tol
    bent = FiniteLorentzianSpace(leq=slab.leq, tau=tau, coords=slab.coords)
    rep = reconstruct_isometry(slab, S, bent, S, tol=tol)
    assert p in rep.unmatched or rep.tau_defect >= 5 * tol


def test_reconstruct_ambiguity_and_tolerance(slab):
    d = _at(slab, 1, 0)
    idx = np.append(np.arange(slab.n), d)
    twin = FiniteLorentzianSpace(leq=slab.leq[np.ix_(idx, idx)], tau=slab.tau[np.ix_(idx, idx)],
                                 coords=slab.coords[idx])
    S = _level(slab, 0)
    with pytest.raises(AmbiguousMatchError) as err:
        reconstruct_isometry(slab, S, twin, S)
    assert err.value.point == d and sorted(err.value.candidates) == [d, slab.n]
    rep = reconstruct_isometry(slab, S, twin, S, strict=False)
    assert d in rep.unmatched
    with pytest.raises(SpaceInputError):
        reconstruct_isometry(slab, S, slab, S, tol=0.5)
    with pytest.raises(SpaceInputError):
        reconstruct_isometry(slab, S, slab, S, matching=np.zeros(len(S.ids), int))
