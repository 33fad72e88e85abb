import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hpcris.errors import CompositionNotZero
from hpcris.oracle import enumerate_homology, fp_rank, oracle_homology
from hpcris.ring import BaseRing, HomologyGroup, complex_homology, p_valuation, smith_decompose, smith_profile
from hpcris.suite import random_complex, random_invertible, random_matrix


def test_p_valuation():
    assert p_valuation(BaseRing(3, 2), 6) == 1
    assert p_valuation(BaseRing(3, 2), 0) == 2
    assert p_valuation(BaseRing(5, 3), 7) == 0
    assert p_valuation(BaseRing(2, 4), 8) == 3


def test_bad_rings():
    with pytest.raises(ValueError):
        BaseRing(4, 1)
    with pytest.raises(ValueError):
        BaseRing(3, 0)


def test_smith_identity_and_diagonal():
    ring = BaseRing(3, 2)
    sd = smith_decompose(ring, ring.identity(3))
    assert np.array_equal(sd.D, ring.identity(3))
    sd = smith_decompose(ring, np.array([[3]]))
    assert sd.D.tolist() == [[3]] and sd.profile == (1,)


def _check_smith(ring, M):
    sd = smith_decompose(ring, M)
    assert np.array_equal(ring.matmul(ring.matmul(sd.U, sd.D), sd.V), ring.reduce(M))
    assert all(v == 0 for v in smith_profile(ring, sd.U))
    assert all(v == 0 for v in smith_profile(ring, sd.V))
    off = sd.D.copy()
    np.fill_diagonal(off, 0)
    assert not off.any()
    assert list(sd.profile) == sorted(sd.profile)
    for x, v in zip(np.diag(sd.D), sd.profile):
        assert x == (ring.p**v if v < ring.n else 0)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([(3, 2), (5, 2), (2, 3), (3, 1)]), st.integers(1, 7), st.integers(1, 7), st.integers(0, 2**32 - 1))
def test_smith_recomposes(pn, r, c, seed):
    ring = BaseRing(*pn)
    _check_smith(ring, random_matrix(np.random.default_rng(seed), ring, r, c))


def test_homology_examples():
    ring = BaseRing(3, 2)
    # d_in = 0, d_out = 0 on a rank 3 module
    assert complex_homology(ring, np.zeros((3, 0), dtype=np.int64), np.zeros((0, 3), dtype=np.int64)) == HomologyGroup((), 3)
    # 0 -> Z/9 -(3)-> Z/9 -> 0, middle spot: Z/3
    g = complex_homology(ring, np.array([[3]]), np.zeros((0, 1), dtype=np.int64))
    assert g == HomologyGroup((1,), 0)
    # kernel of multiplication by 3 on Z/9
    g = complex_homology(ring, np.zeros((1, 0), dtype=np.int64), np.array([[3]]))
    assert g == HomologyGroup((1,), 0)


def test_composition_not_zero():
    ring = BaseRing(3, 1)
    with pytest.raises(CompositionNotZero):
        complex_homology(ring, np.array([[1]]), np.array([[1]]))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([(3, 1), (3, 2), (5, 2), (2, 2), (2, 3)]), st.integers(0, 2**32 - 1))
def test_homology_against_enumeration(pn, seed):
    ring = BaseRing(*pn)
    rng = np.random.default_rng(seed)
    a, b, c = (int(x) for x in rng.integers(0, 4, size=3))
    d_in, d_out = random_complex(rng, ring, a, b, c)
    h = complex_homology(ring, d_in, d_out)
    assert h == oracle_homology(ring, d_in, d_out)
    if ring.q ** (a + b) <= 100_000:
        assert h == enumerate_homology(ring, d_in, d_out)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([(3, 2), (5, 2), (2, 3)]), st.integers(0, 2**32 - 1))
def test_homology_basis_change_invariance(pn, seed):
    ring = BaseRing(*pn)
    rng = np.random.default_rng(seed)
    d_in, d_out = random_complex(rng, ring, 3, 4, 3)
    S = random_invertible(rng, ring, 4)
    from hpcris.suite import inverse_unimodular

    Si = inverse_unimodular(ring, S)
    h1 = complex_homology(ring, d_in, d_out)
    h2 = complex_homology(ring, ring.matmul(S, d_in), ring.matmul(d_out, Si))
    assert h1 == h2


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 3, 5, 7]), st.integers(0, 2**32 - 1))
def test_field_count_matches_gauss(p, seed):
    ring = BaseRing(p, 1)
    rng = np.random.default_rng(seed)
    d_in, d_out = random_complex(rng, ring, 4, 5, 4)
    h = complex_homology(ring, d_in, d_out)
    assert not h.divisors
    assert h.free_rank == 5 - fp_rank(d_out, p) - fp_rank(d_in, p)


def test_homology_group_canonical():
    assert HomologyGroup.from_exponents(2, [2, 1, 0, 2]) == HomologyGroup((1,), 2)
    assert HomologyGroup((1,), 2).length(2) == 5
    assert HomologyGroup().is_zero
    assert HomologyGroup((1, 1), 0).describe(BaseRing(3, 2)) == "Z/3^1 + Z/3^1"
