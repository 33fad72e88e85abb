import itertools

import numpy as np
import pytest

from hpcris.oracle import in_span, pd_quotient
from hpcris.pd_cyclic import (
    DividedPowerRing,
    LambdaMorphism,
    beta_gamma_maps,
    binomial_law,
    check_binomial_law,
    check_hom_closure,
    check_relations_on_morphisms,
    face,
    identity,
    lambda_hom,
    make_F,
    make_Q,
    pd_module_report,
    printed_binomial_law,
    rn_itself,
    rotation,
    square_zero_extension,
    verify_fil,
    verify_fil_tilde,
)
from hpcris.ring import BaseRing, HomologyGroup


@pytest.mark.parametrize("k", range(1, 6))
def test_hom_from_one_has_k_elements(k):
    assert len(lambda_hom(1, k)) == k


def test_hom_count_small():
    # [m] -> [k]: choose f(0) in k cells, then m - 1 sorted offsets in 0..k
    from math import comb

    for m, k in itertools.product(range(1, 5), repeat=2):
        assert len(lambda_hom(m, k)) == k * comb(k + m - 1, m - 1)


def test_composition_and_relations():
    assert check_hom_closure(4) == []
    assert check_relations_on_morphisms(5) == []
    t = rotation(3)
    assert t @ t @ t == identity(3)
    assert t @ t != identity(3)
    with pytest.raises(ValueError):
        face(1, 0)
    with pytest.raises(ValueError):
        LambdaMorphism.from_values(2, 2, [1, 0])


@pytest.mark.parametrize("base", [BaseRing(3, 1), BaseRing(2, 2)])
def test_Q_is_a_cyclic_module(base):
    Q = make_Q(4, base)
    assert [Q.rank(k) for k in range(1, 5)] == [1, 2, 3, 4]
    assert Q.check_relations() == []
    assert Q.check_functoriality() == []
    for k in range(1, 5):
        T = Q.matrix(rotation(k))
        P = np.eye(k, dtype=np.int64)
        for i in range(1, k + 1):
            P = base.matmul(T, P)
            assert np.array_equal(P, np.eye(k, dtype=np.int64)) == (i == k)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("base", [BaseRing(2, 1), BaseRing(3, 2), BaseRing(5, 1)])
def test_F_ranks_and_algebra(n, base):
    F = make_F(n, 4, base)
    assert [F.rank(k) for k in range(1, 5)] == [1 + k * n for k in range(1, 5)]
    assert F.check_relations() == []
    for k in range(1, 5):
        assert F.check_algebra(k) == []


def test_divided_power_ring():
    R = DividedPowerRing(BaseRing(3, 2), 4)
    assert R.check_axioms() == []
    x = R.basis_vector(1)
    # x * x = 2 x^[2];  x^[2] x^[2] = 6 x^[4]
    assert R.mul(x, x).tolist() == [0, 0, 2, 0, 0]
    assert R.mul(R.basis_vector(2), R.basis_vector(2)).tolist() == [0, 0, 0, 0, 6]
    assert R.mul(R.basis_vector(3), R.basis_vector(2)).tolist() == [0] * 5


def test_law_special_case_r1():
    # x_i^[l] x_j = l x_i^[l+1] + x_j^[l+1]
    for l in range(1, 7):
        assert binomial_law(l, 1) == (l, 1)


def _law_oracle(base, n, l, r):
    """Coefficients (a, b) that the ideal-theoretic quotient accepts, found by search."""
    k = 2
    _, _, (S, _, pos) = pd_quotient(base, n, k)
    N = S.shape[0]
    e0, e1, v = (np.zeros(N, dtype=np.int64) for _ in range(3))
    e0[pos[(l + r, 0)]] = 1
    e1[pos[(0, l + r)]] = 1
    v[pos[(l, r)]] = 1
    return [(a, b) for a in range(base.q) for b in range(base.q) if in_span(base, S, base.reduce(v - a * e0 - b * e1))]


@pytest.mark.parametrize("base", [BaseRing(2, 1), BaseRing(3, 1), BaseRing(3, 2), BaseRing(5, 1)])
def test_corrected_law_against_quotient(base):
    n = 4
    for l in range(1, n):
        for r in range(1, n - l + 1):
            a, b = binomial_law(l, r)
            assert (a % base.q, b % base.q) in _law_oracle(base, n, l, r)


def test_printed_law_fails_against_quotient():
    base = BaseRing(3, 1)
    assert printed_binomial_law(1, 1) == (2, 1)
    assert (2, 1) not in _law_oracle(base, 2, 1, 1)
    assert check_binomial_law(base, 6, law=printed_binomial_law)
    assert check_binomial_law(base, 6) == []


@pytest.mark.parametrize("base", [BaseRing(2, 1), BaseRing(3, 1), BaseRing(5, 2)])
@pytest.mark.parametrize("n,k", [(1, 2), (2, 2), (2, 3), (3, 2)])
def test_quotient_oracle_is_free_of_rank(base, n, k):
    quotient, spans, _ = pd_quotient(base, n, k)
    assert quotient == HomologyGroup((), 1 + k * n)
    assert spans


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("base", [BaseRing(2, 1), BaseRing(3, 2)])
def test_filtrations(n, base):
    fil = verify_fil(n, 3, base)
    assert fil.ok
    for k in range(1, 4):
        # gr^0 = W, gr^i = Q([k]) for 1 <= i <= n
        assert fil.gr_ranks(k)[: n + 1] == [1] + [k] * n
    assert verify_fil_tilde(n, 3, base).ok


def test_report_shape():
    rep = pd_module_report(2, 3, BaseRing(3, 1))
    assert rep["basis: invertible change of basis"] is True
    assert rep["products and structure maps match centered model"] is True
    assert all(rep["Fil"]["checks"].values())
    assert all(rep["Fil~"]["checks"].values())
    assert [row["rank"] for row in rep["rank_table"]] == [3, 5, 7]


@pytest.mark.parametrize("make", [rn_itself, square_zero_extension])
def test_beta_gamma(make):
    base = BaseRing(3, 1)
    A = make(DividedPowerRing(base, 2))
    bg = beta_gamma_maps(A, 2, 3)
    assert bg.ok, bg.checks
