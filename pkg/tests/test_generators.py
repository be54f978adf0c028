import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lorentz.core import delta, maximizers, validate_axioms
from lorentz.generators import (KINDS, GenerationError, GeneratorSpec, cigar_graph, cigar_oracle,
                                cylinder_oracle, cylinder_tau_windings, generate, gen_triangle_extension,
                                minkowski_oracle, plateau_f)


def _at(c, *x):
    return int(np.argmin(np.abs(c - np.asarray(x)).sum(axis=1)))


@pytest.mark.parametrize("kind", KINDS)
def test_same_spec_same_sample(kind):
    a, _ = generate(GeneratorSpec(kind, n=600, seed=11))
    b, _ = generate(GeneratorSpec(kind, n=600, seed=11))
    assert np.array_equal(a.tau, b.tau) and np.array_equal(a.leq, b.leq)
    c, _ = generate(GeneratorSpec(kind, n=600, seed=12))
    assert c.n != a.n or not np.array_equal(c.tau, a.tau)


def test_spec_validation():
    with pytest.raises(GenerationError):
        GeneratorSpec("minkowski_slab", n=100)  # poisson without seed
    with pytest.raises(GenerationError):
        GeneratorSpec("nope", n=100, seed=0)
    with pytest.raises(GenerationError):
        GeneratorSpec("cylinder", n=1, seed=0)
    with pytest.raises(GenerationError):
        generate(GeneratorSpec("minkowski_slab", n=100, seed=0, params={"t0": 1, "t1": 0}))


def test_diamond_tips():
    sp, _ = generate(GeneratorSpec("minkowski_diamond", n=300, sampling="grid"))
    assert sp.tau[0, 1] == 2.0
    assert np.allclose(sp.coords[:2], [[0, 0], [2, 0]])


def test_slab_height_bounds_delta():
    sp, _ = generate(GeneratorSpec("minkowski_slab", n=500, seed=2))
    assert delta(sp).max() <= 1.0 + 1e-12


def test_minkowski_oracle_closed_form():
    o = minkowski_oracle()
    assert float(o.tau([0, 0], [1, 0])[0]) == 1.0
    assert float(o.tau([0, 0], [2, 1])[0]) == pytest.approx(math.sqrt(3))
    assert float(o.tau([0, 0], [1, 2])[0]) == 0.0
    assert o.causal([0, 0], [1, 1])[0] and not o.causal([1, 1], [0, 0])[0]


def test_cylinder_examples():
    o = cylinder_oracle()
    assert float(o.tau([0, 0], [3, 0])[0]) == 3.0
    # half way round at dt = pi: null via both windings
    assert float(o.tau([0, 0], [math.pi, math.pi])[0]) == 0.0
    assert cylinder_tau_windings(math.pi, math.pi) == 0.0
    a = float(o.tau([0, 0], [5, 1.0])[0])
    b = float(o.tau([0, 0], [5, 2 * math.pi - 1.0])[0])
    assert a == pytest.approx(b)


@settings(max_examples=80, deadline=None)
@given(st.floats(0.01, 12), st.floats(0, 2 * math.pi - 1e-6))
def test_cylinder_oracle_matches_winding_max(dt, th):
    o = cylinder_oracle()
    assert float(o.tau([0, 0], [dt, th])[0]) == pytest.approx(cylinder_tau_windings(dt, th), abs=1e-9)


def test_triangle_extension():
    base, _ = generate(GeneratorSpec("minkowski_diamond", n=200, sampling="grid", tau_mode="chain"))
    chain = maximizers(base, 0, 1, cap=1)[0]
    out = gen_triangle_extension(base, chain, float(base.tau[0, 1]))
    assert validate_axioms(out).passed
    seam = out.meta["seam"]
    assert np.array_equal(out.tau[np.ix_(seam, seam)], base.tau[np.ix_(seam, seam)])
    new = np.arange(base.n, out.n)
    assert (delta(out)[new] > 0).any()
    on_chain = set(seam)
    assert not on_chain & set(new.tolist())


def test_triangle_height_checked():
    base, _ = generate(GeneratorSpec("minkowski_diamond", n=100, sampling="grid", tau_mode="chain"))
    chain = maximizers(base, 0, 1, cap=1)[0]
    with pytest.raises(ValueError):
        gen_triangle_extension(base, chain, 5.0)


def test_plateau_profile():
    th = np.linspace(0, 2 * np.pi, 400)
    f = plateau_f(th)
    assert f.min() >= 0 and f.max() <= 1
    timelike = ((th >= np.pi / 4) & (th <= 3 * np.pi / 4)) | ((th >= 5 * np.pi / 4) & (th <= 7 * np.pi / 4))
    assert np.all(f[timelike] == 0)
    assert plateau_f(np.array([0.0, np.pi]))[0] == 1


def test_conformal_Y_flat_sector_and_puncture():
    taus = []
    for r0 in (0.3, 0.2, 0.1):
        sp, orc = generate(GeneratorSpec("conformal_Y", n=1681, sampling="grid", params={"puncture": r0}))
        c = sp.coords
        a, b = _at(c, 0.3, 0), _at(c, 0.9, 0.1)
        exact = float(orc.tau_fn(c[[a]], c[[b]])[0])
        assert abs(sp.tau[a, b] - exact) <= orc.error * exact
        p, q = _at(c, -0.6, 0), _at(c, 0.6, 0)
        taus.append(sp.tau[p, q])
    # detours near the puncture are lengthened, more so the closer they may pass
    assert taus[0] > 1.2
    assert taus[0] <= taus[1] <= taus[2]


def test_conformal_Y_axioms_and_control():
    sp, _ = generate(GeneratorSpec("conformal_Y", n=400, seed=5))
    assert validate_axioms(sp).passed
    flat, _ = generate(GeneratorSpec("conformal_Y", n=400, seed=5, params={"conformal": False}))
    assert flat.n == sp.n
    assert (sp.tau >= flat.tau - 1e-12).all()


def test_cigar_examples():
    xyz, rs, dist = cigar_graph(m=6, cap_rings=3, length=5.0)
    o = cigar_oracle(rs, dist)
    node = np.r_[0.0, rs[3]]
    assert float(o.tau(node, node + [2, 0, 0])[0]) == pytest.approx(2.0)
    far = int(np.argmax(dist[3]))
    assert dist[3, far] > 1
    assert float(o.tau(node, np.r_[0.5 * dist[3, far], rs[far]])[0]) == 0.0
    with pytest.raises(GenerationError):
        o.tau([0, 0.123, 0.456], [1, 0.123, 0.456])


def test_cigar_fixture_has_time_zero_layer():
    sp, _ = generate(GeneratorSpec("cigar_product", n=600, seed=1))
    ns = len(set(sp.meta["spatial_nodes"]))
    assert (sp.coords[:, 0] == 0).sum() == ns
    assert validate_axioms(sp).passed
