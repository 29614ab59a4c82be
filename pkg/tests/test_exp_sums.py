import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quantcat.errors import WrongPrimeType
from quantcat.exp_sums import ExpSumContext, projection_via_exp_sum, regime, verify_bounds
from quantcat.finite_field import CatMap, Kind, classify_prime, is_odd_prime, legendre, prime_context
from quantcat.hecke import centralizer, characters, projection_matrix

CAT = CatMap(3, 2, 4, 3)
INERT = [p for p in range(3, 60) if is_odd_prime(p) and classify_prime(CAT, p).kind is Kind.INERT]


def exp_ctx(p, A=CAT):
    return ExpSumContext(centralizer(A, prime_context(p)))


def test_wrong_prime_type():
    with pytest.raises(WrongPrimeType):
        exp_ctx(7)
    with pytest.raises(WrongPrimeType):
        exp_ctx(3, CatMap(5, 4, 6, 5))


def test_regimes():
    assert regime(3, 3, 7) == "diagonal"
    assert regime(3, 4, 7) == "diagonal"
    assert regime(0, 0, 7) == "origin"
    assert regime(1, 2, 7) == "generic"
    assert regime(0, 3, 7) == "generic"


@pytest.mark.parametrize("p", INERT[:5])
def test_alpha(p):
    E = exp_ctx(p)
    lam_q = legendre(E.Q, p)
    assert lam_q in (1, -1)
    for i in range(p):
        assert E.alpha(i, i) == pytest.approx(lam_q)
        assert E.alpha(i, -i % p) == pytest.approx(lam_q)
        for x in range(p):
            assert abs(E.alpha(i, x)) == pytest.approx(1)


@pytest.mark.parametrize("p", [3, 5, 11, 13])
def test_table_matches_term_by_term(p):
    E = exp_ctx(p)
    for nu in characters(E.G):
        table = E.exp_sum_table(nu)
        for i in range(p):
            for x in range(p):
                assert abs(table[i, x] - E.exp_sum_naive(nu, i, x)) < 1e-10
                assert abs(table[i, x] - E.exp_sum(nu, i, x)) < 1e-12


@pytest.mark.parametrize("p", [3, 5, 13])
def test_projection_formula_exhaustive(p):
    E = exp_ctx(p)
    worst = 0.0
    for nu in characters(E.G):
        P = projection_matrix(E.G, nu)
        for i in range(p):
            worst = max(worst, np.max(np.abs(projection_via_exp_sum(E, nu, i).values - P[:, i])))
    assert worst < 1e-9


@given(st.sampled_from(INERT), st.data())
@settings(max_examples=30, deadline=None)
def test_projection_formula_random(p, data):
    E = exp_ctx(p)
    chars = characters(E.G)
    nu = chars[data.draw(st.integers(0, len(chars) - 1))]
    i = data.draw(st.integers(0, p - 1))
    P = projection_matrix(E.G, nu)
    assert np.max(np.abs(projection_via_exp_sum(E, nu, i).values - P[:, i])) < 1e-9


@pytest.mark.parametrize("p", [5, 13, 29, 37])
def test_bounds_exhaustive(p):
    rep = verify_bounds(exp_ctx(p), "exhaustive")
    assert rep.passed
    assert rep.max_ratio["generic"] <= 4 + 1e-8
    assert rep.max_ratio["diagonal"] <= 3 + 1e-8
    assert rep.max_ratio["origin"] <= 2 + 1e-8
    assert rep.max_imag_diagonal < 1e-9
    assert sum(rep.count.values()) == (p + 1) * p * p


def test_frozen_maxima_p29():
    rep = verify_bounds(exp_ctx(29), "exhaustive")
    assert rep.max_ratio["generic"] == pytest.approx(3.758, abs=1e-3)
    assert rep.max_ratio["diagonal"] == pytest.approx(2.603, abs=1e-3)
    assert rep.max_ratio["origin"] == pytest.approx(1.980, abs=1e-3)


def test_sampling_is_seeded():
    E = exp_ctx(101)
    a = verify_bounds(E, "sample", samples=2000, seed=5)
    b = verify_bounds(E, "sample", samples=2000, seed=5)
    assert a.max_ratio == b.max_ratio and a.passed
    assert sum(a.count.values()) == 2000
    with pytest.raises(ValueError):
        verify_bounds(E, "bogus")
