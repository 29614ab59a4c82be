import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from quantcat.composite import (
    CompositeContext,
    composite_eigenbasis,
    crt_combine,
    crt_split,
    factor_square_free,
    tensor_operator,
    tensor_state,
)
from quantcat.errors import ContextMismatch, UnsupportedModulus
from quantcat.finite_field import CatMap, prime_context
from quantcat.hecke import gram_matrix
from quantcat.weil import QuantumState, build_unitary, constant_state, delta, identity_operator

CAT = CatMap(3, 2, 4, 3)


def test_factorization():
    assert factor_square_free(15) == [3, 5]
    assert factor_square_free(105) == [3, 5, 7]
    assert factor_square_free(13) == [13]
    for N in (9, 45, 12, 2, 1):
        with pytest.raises(UnsupportedModulus):
            factor_square_free(N)


def test_crt_examples():
    c = CompositeContext(15)
    assert crt_split(7, c) == (1, 2)
    assert crt_split(0, c) == (0, 0)
    with pytest.raises(ContextMismatch):
        crt_combine((1,), c)


@given(st.sampled_from([15, 21, 33, 35, 105]), st.integers(0, 10 ** 6))
def test_crt_round_trip(N, x):
    c = CompositeContext(N)
    assert crt_combine(crt_split(x, c), c) == x % N


def test_tensor_state():
    c = CompositeContext(15)
    one = tensor_state([constant_state(3), constant_state(5)], c)
    assert np.allclose(one.values, 1) and one.norm() == pytest.approx(1)
    d = tensor_state([delta(1, 3), delta(2, 5)], c)
    assert np.flatnonzero(d.values).tolist() == [7]
    with pytest.raises(ContextMismatch):
        tensor_state([constant_state(5), constant_state(3)], c)
    with pytest.raises(ContextMismatch):
        tensor_state([constant_state(3)], c)


def test_tensor_operator():
    c = CompositeContext(15)
    ident = tensor_operator([identity_operator(3), identity_operator(5)], c)
    assert ident.max_deviation(np.eye(15)) == 0
    ops = [build_unitary(prime_context(p), CAT.mod(p)) for p in (3, 5)]
    U = tensor_operator(ops, c)
    assert U.unitarity_defect() < 1e-12
    rng = np.random.default_rng(0)
    f = [QuantumState(rng.normal(size=p) + 0j, p) for p in (3, 5)]
    lhs = U @ tensor_state(f, c)
    rhs = tensor_state([op @ g for op, g in zip(ops, f)], c)
    assert lhs.allclose(rhs)
    with pytest.raises(ContextMismatch):
        tensor_operator([identity_operator(5), identity_operator(3)], c)


@pytest.mark.parametrize("N", [15, 21, 33, 35])
def test_composite_basis(N):
    c = CompositeContext(N)
    basis = composite_eigenbasis(CAT, c)
    assert len(basis.vectors) == N
    assert np.max(np.abs(gram_matrix(basis.states()) - np.eye(N))) < 1e-8
    for v in basis.vectors:
        assert abs(v.sup_norm - math.prod(v.factor_sup_norms)) < 1e-9
    assert basis.product_bound_applicable
    assert max(v.sup_norm for v in basis.vectors) <= basis.product_bound + 1e-8


def test_composite_eigenvectors_of_tensor_cat_map():
    c = CompositeContext(15)
    U = tensor_operator([build_unitary(prime_context(p), CAT.mod(p)) for p in c.primes], c)
    for v in composite_eigenbasis(CAT, c).vectors:
        w = U @ v.state
        lam = w.values @ v.state.values.conj() / 15
        assert np.max(np.abs(w.values - lam * v.state.values)) < 1e-9


def test_product_bound_applicability_flag():
    # A = (3,2,10,7) is upper triangular mod 5
    basis = composite_eigenbasis(CatMap(3, 2, 10, 7), CompositeContext(15))
    assert not basis.product_bound_applicable
