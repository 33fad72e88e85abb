import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hpcris.cris import (
    P2Warning,
    compare_lifts,
    genuine_lift,
    hp_cris_obj,
    lift_difference,
    reduction_matches,
    theorem43_check,
)
from hpcris.dga import Derivation, GeneratorSpec as G, make_algebra, verbatim_lift
from hpcris.errors import (
    DifferentialNotSquareZero,
    LiftsNotCongruentModP,
    NotLiftOfSquareZero,
    NotVerbatimLiftable,
)
from hpcris.periodic import fold, hp_profile
from hpcris.ring import BaseRing, HomologyGroup
from hpcris.suite import commutator_example, random_algebra, twisted_lift, wuv_example

F3 = BaseRing(3, 1)


def _pair_algebra(p=3):
    # d^2 e = p ab: square zero over F_p, not for the verbatim lift
    gens = [G("a", 0, 1), G("b", 0, 1), G("c1", -1, 2), G("c2", -1, 2), G("e", -2, 2)]
    d = Derivation(1, {"c1": {("a", "b"): 1}, "c2": {("a", "b"): p - 1}, "e": {("c1",): 1, ("c2",): 1}})
    return make_algebra(BaseRing(p, 1), gens, d)


def test_verbatim_lift_has_zero_obstruction():
    A = make_algebra(F3, [G("x", 0, 1), G("y", -1, 2)], Derivation(1, {"y": {("x", "x"): 1}}))
    _, dv = verbatim_lift(A)
    cc = hp_cris_obj(A, dv, 3)
    assert cc.obstruction.is_zero()
    assert cc.ring == BaseRing(3, 2)
    assert reduction_matches(cc)


def test_twisted_wuv():
    A, _, tw = wuv_example(3)
    cc = hp_cris_obj(A, tw, 4)
    assert cc.obstruction.on("v") == {("w", "w"): 1}
    assert reduction_matches(cc)
    v = theorem43_check(A, tw, 4)
    assert v.equal and v.direct_lift == "verbatim"
    # the obstruction is visible before folding: b + B + L_dt alone is not a differential
    with pytest.raises(DifferentialNotSquareZero):
        for sl in cc.slices:
            fold(sl, ("b", "B", "L_dt"))


def test_dropping_either_iota_half_breaks_it():
    A, _, tw = wuv_example(3)
    cc = hp_cris_obj(A, tw, 4)
    for ops in (("b", "B", "L_dt", "e_D"), ("b", "B", "L_dt", "E_D")):
        with pytest.raises(DifferentialNotSquareZero):
            for sl in cc.slices:
                fold(sl, ops, (1, 1, 1, 3))


def test_p2_warns_but_builds():
    A, _, tw = wuv_example(2)
    with pytest.warns(P2Warning):
        cc = hp_cris_obj(A, tw, 3)
    assert reduction_matches(cc)


def test_odd_p_does_not_warn():
    A, _, tw = wuv_example(5)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        hp_cris_obj(A, tw, 2)


def test_bad_lifts_rejected():
    A, plain, _ = wuv_example(3)
    with pytest.raises(NotLiftOfSquareZero):
        hp_cris_obj(A, Derivation(1, {"v": {("u",): 2}}), 2)
    with pytest.raises(NotLiftOfSquareZero):
        hp_cris_obj(make_algebra(BaseRing(3, 2), A.generators, A.differential), plain, 2)
    with pytest.raises(LiftsNotCongruentModP):
        lift_difference(A, plain, Derivation(1, {"v": {("u",): 1}, "u": {("w", "w"): 1}}))


def test_same_lift_gives_identity_comparison():
    A, _, tw = wuv_example(3)
    cmp = compare_lifts(A, tw, tw, 3)
    assert cmp.connecting.is_zero() and cmp.equal
    for phi in cmp.phi:
        assert np.array_equal(phi, np.eye(phi.shape[0], dtype=np.int64))


def test_plain_vs_twisted_comparison():
    A, plain, tw = wuv_example(3)
    cmp = compare_lifts(A, plain, tw, 4)
    assert cmp.connecting.on("u") == {("w", "w"): 2}
    assert cmp.equal
    assert any(np.any(phi != np.eye(phi.shape[0], dtype=np.int64)) for phi in cmp.phi)


def test_not_verbatim_liftable():
    A = _pair_algebra(3)
    with pytest.raises(NotVerbatimLiftable):
        genuine_lift(A)
    fixed = Derivation(1, {"c1": {("a", "b"): 1}, "c2": {("a", "b"): 8}, "e": {("c1",): 1, ("c2",): 1}})
    genuine, how = genuine_lift(A, fixed)
    assert how == "user"
    v = theorem43_check(A, fixed, 3)
    assert v.equal and v.direct_lift == "user"
    assert v.direct == hp_profile(genuine, 3)


def test_wuv_profile_exact():
    # Z/3 torsion in weight 3 from both parities, for either lift
    A, plain, tw = wuv_example(3)
    expected = {
        (0, 0): HomologyGroup((), 1),
        (3, 0): HomologyGroup((1,), 0),
        (3, 1): HomologyGroup((1,), 0),
    }
    assert hp_cris_obj(A, tw, 4).profile().nonzero() == expected
    assert hp_cris_obj(A, plain, 4).profile().nonzero() == expected


def test_commutator_example():
    A, lift = commutator_example(3)
    assert theorem43_check(A, lift, 4).equal
    assert reduction_matches(hp_cris_obj(A, lift, 4))


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([3, 5]))
def test_random_lifts(seed, p):
    rng = np.random.default_rng(seed)
    A = random_algebra(rng, p, 1)
    t1, t2 = twisted_lift(A, rng), twisted_lift(A, rng)
    try:
        genuine_lift(A, t1)
    except NotVerbatimLiftable:
        return
    cmp = compare_lifts(A, t1, t2, 3)
    assert cmp.equal
    assert theorem43_check(A, t1, 3).equal


def test_zero_differential_both_sides_agree():
    A = make_algebra(F3, [G("x", 0, 1)])
    _, dv = verbatim_lift(A)
    v = theorem43_check(A, dv, 4)
    assert v.equal and v.direct == hp_profile(make_algebra(BaseRing(3, 2), A.generators), 4)
