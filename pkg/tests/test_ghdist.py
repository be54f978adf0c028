import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lorentz.core import FiniteLorentzianSpace, SpaceInputError
from lorentz.exhaustion import DoublyPointedSpace
from lorentz.generators import GeneratorSpec, generate
from lorentz.ghdist import (Correspondence, InfeasibleMarksError, MarkedPair, admissible, d_minus,
                            distortion, pointed_gh)

from conftest import chain_space


def two_chain(t):
    return np.array([[0.0, t], [0.0, 0.0]])


def _all_correspondences(n1, n2):
    cells = list(itertools.product(range(n1), range(n2)))
    for r in range(max(n1, n2), len(cells) + 1):
        for sub in itertools.combinations(cells, r):
            a = {x for x, _ in sub}
            b = {y for _, y in sub}
            if len(a) == n1 and len(b) == n2:
                yield Correspondence(np.array(sub), n1, n2)


def _brute(t1, t2):
    return min(distortion(c, t1, t2) for c in _all_correspondences(len(t1), len(t2)))


def test_identity_distortion_is_zero(diamond4):
    rho = Correspondence(np.stack([np.arange(4)] * 2, axis=1), 4, 4)
    assert distortion(rho, diamond4, diamond4) == 0.0


def test_two_chains_ordered_matching():
    rho = Correspondence(np.array([[0, 0], [1, 1]]), 2, 2)
    assert distortion(rho, two_chain(1.0), two_chain(2.0)) == 1.0


def test_swap_on_chain():
    rho = Correspondence(np.array([[0, 1], [1, 0]]), 2, 2)
    assert distortion(rho, two_chain(1.0), two_chain(1.0)) == 1.0


def test_correspondence_must_be_surjective():
    with pytest.raises(SpaceInputError):
        Correspondence(np.array([[0, 0]]), 2, 1)
    with pytest.raises(SpaceInputError):
        Correspondence(np.array([[0, 3]]), 1, 2)


def test_compose_and_inverse():
    a = Correspondence(np.array([[0, 1], [1, 0], [2, 0]]), 3, 2)
    b = Correspondence(np.array([[0, 0], [1, 1]]), 2, 2)
    c = a.compose(b)
    assert c.pairs.tolist() == [[0, 1], [1, 0], [2, 0]]
    assert a.inverse().pairs.tolist() == [[0, 1], [0, 2], [1, 0]]
    with pytest.raises(SpaceInputError):
        a.compose(a)


def test_admissible():
    marks = MarkedPair([[0]], [[1]])
    assert admissible(Correspondence(np.array([[0, 1], [1, 0]]), 2, 2), marks)
    assert not admissible(Correspondence(np.array([[0, 0], [1, 1]]), 2, 2), marks)
    assert admissible(Correspondence(np.array([[0, 0], [1, 1]]), 2, 2), MarkedPair())
    assert admissible(Correspondence(np.array([[0, 0], [1, 1]]), 2, 2), None)
    with pytest.raises(SpaceInputError):
        MarkedPair([[0]], [])


def test_d_minus_identical_is_exact_zero(diamond4):
    r = d_minus(diamond4, [[0, 3]], diamond4, [[0, 3]])
    assert r.exact and r.upper == 0 and r.lower == 0


def test_d_minus_two_chains_is_one():
    r = d_minus(two_chain(1.0), None, two_chain(2.0), None)
    assert r.exact and r.upper == pytest.approx(1.0)
    assert _brute(two_chain(1.0), two_chain(2.0)) == pytest.approx(1.0)


def test_infeasible_marks():
    with pytest.raises(InfeasibleMarksError):
        d_minus(two_chain(1.0), [[0, 1]], two_chain(1.0), [[]])


def test_scaled_diamond_bounds():
    sp, _ = generate(GeneratorSpec("minkowski_diamond", n=60, seed=4))
    scaled = FiniteLorentzianSpace(leq=sp.leq, tau=1.1 * sp.tau)
    diam = float(sp.tau.max())
    r = d_minus(sp, None, scaled, None, budget=500)
    assert r.upper <= 0.1 * diam + 1e-12
    assert r.lower >= 0.1 * diam - 1e-12
    assert r.lower <= r.upper


def _small_tau(draw, n):
    links = [(i, j, draw(st.sampled_from([0.25, 0.5, 1.0])))
             for i in range(n) for j in range(i + 1, n) if draw(st.booleans())]
    return chain_space(n, links).tau


@st.composite
def small_taus(draw, lo=1, hi=4):
    return _small_tau(draw, draw(st.integers(lo, hi)))


@settings(max_examples=30, deadline=None)
@given(small_taus(), small_taus())
def test_exhaustive_matches_brute_force_and_is_symmetric(t1, t2):
    a = d_minus(t1, None, t2, None)
    b = d_minus(t2, None, t1, None)
    if len(t1) * len(t2) <= 9:
        assert a.upper == pytest.approx(_brute(t1, t2))
    assert a.upper == pytest.approx(b.upper)


@settings(max_examples=25, deadline=None)
@given(small_taus(2, 4), small_taus(2, 4), small_taus(2, 4))
def test_triangle_inequality(t1, t2, t3):
    d12 = d_minus(t1, None, t2, None).upper
    d23 = d_minus(t2, None, t3, None).upper
    d13 = d_minus(t1, None, t3, None).upper
    assert d13 <= d12 + d23 + 1e-12


@settings(max_examples=25, deadline=None)
@given(small_taus(2, 4), small_taus(2, 4), small_taus(2, 4), st.randoms(use_true_random=False))
def test_composition_distortion_subadditive(t1, t2, t3, rnd):
    def random_corr(n1, n2):
        pairs = {(x, rnd.randrange(n2)) for x in range(n1)} | {(rnd.randrange(n1), y) for y in range(n2)}
        return Correspondence(np.array(sorted(pairs)), n1, n2)

    r1 = random_corr(len(t1), len(t2))
    r2 = random_corr(len(t2), len(t3))
    assert distortion(r1.compose(r2), t1, t3) <= distortion(r1, t1, t2) + distortion(r2, t2, t3) + 1e-12


def test_pointed_gh_self_is_zero(diamond4):
    dp = DoublyPointedSpace(diamond4, 0, 3)
    up, lo, tail = pointed_gh(dp, dp, i_max=2)
    assert up == 0 and lo == 0
    assert tail == pytest.approx(np.pi / 8)


def test_pointed_gh_symmetric_on_small_spaces(diamond4):
    other = chain_space(3, [(0, 1, 1.0), (1, 2, 0.5)])
    a = DoublyPointedSpace(diamond4, 0, 3)
    b = DoublyPointedSpace(other, 0, 2)
    ab, ba = pointed_gh(a, b, i_max=2), pointed_gh(b, a, i_max=2)
    assert ab[0] == pytest.approx(ba[0])
    assert ab[0] > 0
