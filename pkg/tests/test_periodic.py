import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hpcris.cyclic import attach_iota, attach_L, build_cyclic_bar
from hpcris.dga import Derivation, GeneratorSpec as G, make_algebra, verbatim_lift
from hpcris.errors import DifferentialNotSquareZero
from hpcris.oracle import fp_rank, oracle_hh_profile, oracle_hp_profile
from hpcris.periodic import fold, hh_profile, hp_profile
from hpcris.ring import BaseRing, HomologyGroup
from hpcris.suite import random_algebra, wuv_example

F3 = BaseRing(3, 1)
Z9 = BaseRing(3, 2)


def _nonzero(d):
    return {k: g for k, g in d.items() if not g.is_zero}


def test_base_ring_profiles():
    A = make_algebra(Z9, [])
    assert hh_profile(A, 3).nonzero() == {(0, 0): HomologyGroup((), 1)}
    assert hp_profile(A, 3).nonzero() == {(0, 0): HomologyGroup((), 1)}


def test_free_one_generator_hh():
    A = make_algebra(F3, [G("x", 0, 1)])
    prof = hh_profile(A, 3)
    assert prof.nonzero() == _nonzero(oracle_hh_profile(A, 3))
    # concentrated in simplicial degrees 0 and 1: total degrees 0, 1 for |x| = 0
    assert {t for (_, t) in prof.nonzero()} <= {0, 1}
    for w in (1, 2, 3):
        assert prof.at(w, 0) == HomologyGroup((), 1) and prof.at(w, 1) == HomologyGroup((), 1)


def test_xy_square_against_oracle():
    A = make_algebra(F3, [G("x", 0, 1), G("y", -1, 2)], Derivation(1, {"y": {("x", "x"): 1}}))
    assert hh_profile(A, 4).nonzero() == _nonzero(oracle_hh_profile(A, 4))
    assert hp_profile(A, 4).nonzero() == _nonzero(oracle_hp_profile(A, 4))


def test_odd_generator_hp_against_oracle():
    A = make_algebra(F3, [G("y", -1, 1)])
    assert hp_profile(A, 3).nonzero() == _nonzero(oracle_hp_profile(A, 3))


def test_p2_plain_hp_accepted():
    A = make_algebra(BaseRing(2, 2), [G("x", 0, 1), G("y", -1, 2)], Derivation(1, {"y": {("x", "x"): 1}}))
    assert hp_profile(A, 3).nonzero() == _nonzero(oracle_hp_profile(A, 3))


def test_fold_square_zero_checks():
    A, _, tw = wuv_example(3)
    lifted, _ = verbatim_lift(A)
    slices = attach_L(build_cyclic_bar(lifted, 4), lifted, tw, "L_dt")
    fold(slices[0], ("b", "B"))
    with pytest.raises(DifferentialNotSquareZero):
        for sl in slices:
            fold(sl, ("b", "B", "L_dt"))
    with pytest.raises(ValueError):
        fold(slices[1], ("b", "B"), (1,))


@settings(max_examples=12, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([(3, 1), (3, 2), (5, 1), (5, 2)]))
def test_weight_zero_anchor_and_oracle(seed, pn):
    A = random_algebra(np.random.default_rng(seed), *pn)
    hp = hp_profile(A, 3)
    assert hp.at(0, 0) == HomologyGroup((), 1) and hp.at(0, 1).is_zero
    assert hp.nonzero() == _nonzero(oracle_hp_profile(A, 3))
    assert hh_profile(A, 3).nonzero() == _nonzero(oracle_hh_profile(A, 3))


@settings(max_examples=12, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_weights_are_independent(seed):
    A = random_algebra(np.random.default_rng(seed), 3, 2)
    slices = build_cyclic_bar(A, 3)
    full = hp_profile(A, 3, slices)
    part = hp_profile(A, 3, [sl for sl in slices if sl.weight != 2])
    assert part.nonzero() == {k: g for k, g in full.nonzero().items() if k[0] != 2}


@settings(max_examples=12, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_euler_characteristic_over_field(seed):
    A = random_algebra(np.random.default_rng(seed), 5, 1)
    for sl in build_cyclic_bar(A, 3):
        fc = fold(sl, ("b", "B", "L_d"))
        h = fc.homology()
        assert len(fc.even) - len(fc.odd) == h[0].num_summands - h[1].num_summands


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_mod_p_summand_bound(seed):
    # dim H(C/p) <= summands(H(C)) + torsion summands(H(C)) for C over Z/p^2
    A = random_algebra(np.random.default_rng(seed), 3, 2)
    for sl in build_cyclic_bar(A, 3):
        fc = fold(sl, ("b", "B", "L_d"))
        h = fc.homology()
        M = fc.matrix % 3
        for par, (src, tgt) in {0: (fc.even, fc.odd), 1: (fc.odd, fc.even)}.items():
            dim = len(src) - fp_rank(M[np.ix_(tgt, src)], 3) - fp_rank(M[np.ix_(src, tgt)], 3)
            g = h[par]
            assert dim <= g.num_summands + len(g.divisors)
