import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from quantcat.errors import InvalidCatMap, InvalidPrime, NotSpecialLinear
from quantcat.finite_field import (
    INF,
    CatMap,
    Fp2Element,
    Kind,
    classify_prime,
    find_nonsquare,
    hilbert90,
    inv,
    legendre,
    mat_inv,
    mat_mul,
    multiplicative_dlog,
    prime_context,
    primitive_root,
    projective_line,
    sqrt_mod,
    torus_generator_and_dlog,
)

PRIMES = [3, 5, 7, 11, 13, 17, 19, 23, 29, 31]
primes = st.sampled_from(PRIMES)


def squares(p):
    return {x * x % p for x in range(1, p)}


@pytest.mark.parametrize("p", PRIMES)
def test_legendre_matches_square_enumeration(p):
    sq = squares(p)
    for a in range(p):
        expected = 0 if a == 0 else (1 if a in sq else -1)
        assert legendre(a, p) == expected


def test_legendre_examples():
    assert legendre(2, 7) == 1
    assert legendre(2, 5) == -1
    assert legendre(0, 11) == 0
    assert all(legendre(1, p) == 1 for p in PRIMES)


@given(primes, st.integers(-500, 500), st.integers(-500, 500))
def test_legendre_is_multiplicative(p, a, b):
    assert legendre(a * b, p) == legendre(a, p) * legendre(b, p)


def test_find_nonsquare_examples():
    assert [find_nonsquare(p) for p in (3, 5, 7)] == [2, 2, 3]


@pytest.mark.parametrize("p", PRIMES)
def test_nonsquare_is_smallest(p):
    D = find_nonsquare(p)
    assert legendre(D, p) == -1
    assert all(legendre(a, p) == 1 for a in range(1, D))


@given(primes, st.integers(1, 10_000))
def test_inverse_and_sqrt(p, a):
    if a % p:
        assert a * inv(a, p) % p == 1
    s = sqrt_mod(a * a, p)
    assert s is not None and s * s % p == a * a % p


@pytest.mark.parametrize("p", [2, 1, 0, 9, 15, -3])
def test_invalid_prime(p):
    with pytest.raises(InvalidPrime):
        prime_context(p)


@pytest.mark.parametrize("p", PRIMES)
def test_primitive_root_order(p):
    g = primitive_root(p)
    assert len({pow(g, k, p) for k in range(p - 1)}) == p - 1
    _, logs = multiplicative_dlog(p)
    assert sorted(logs) == list(range(1, p))
    assert all(pow(g, logs[t], p) == t for t in logs)


def test_context_fields():
    ctx = prime_context(5)
    assert (ctx.p, ctx.r, ctx.D) == (5, 3, 2)
    assert 2 * ctx.r % ctx.p == 1
    assert ctx.additive_char(0) == pytest.approx(1)
    assert ctx.additive_char(2) == pytest.approx(cmath.exp(2j * math.pi / 5))
    assert np.allclose(np.abs(ctx.additive_char(np.arange(5))), 1)


@pytest.mark.parametrize("p", PRIMES)
def test_gauss_sum_oracle(p):
    ctx = prime_context(p)
    assert ctx.gauss_sum(0) == pytest.approx(math.sqrt(p))
    for a in range(1, p):
        direct = sum(cmath.exp(-2j * math.pi * ctx.r * a * x * x / p) for x in range(p)) / math.sqrt(p)
        assert abs(ctx.gauss_sum(a) - direct) < 1e-10
        assert abs(abs(ctx.gauss_sum(a)) - 1) < 1e-10
        assert abs(ctx.gauss_sum(a) - legendre(a, p) * ctx.gauss_sum(1)) < 1e-10


def test_gauss_sum_frozen_values():
    # S(-1) = Lambda(r) eps_p with eps_p = 1 (p = 1 mod 4) or i (p = 3 mod 4)
    assert prime_context(5).gauss_sum(-1) == pytest.approx(-1.0)
    assert prime_context(3).gauss_sum(-1) == pytest.approx(-1j)
    assert prime_context(7).gauss_sum(-1) == pytest.approx(1j)


def test_catmap_validation():
    A = CatMap.parse("3,2,4,3")
    assert A.entries == (3, 2, 4, 3) and A.trace == 6
    with pytest.raises(InvalidCatMap):
        CatMap(1, 1, 1, 1)  # det 0
    with pytest.raises(InvalidCatMap):
        CatMap(1, 2, 0, 1)  # parabolic
    with pytest.raises(InvalidCatMap):
        CatMap(2, 1, 1, 1)  # not I mod 2
    with pytest.raises(InvalidCatMap):
        CatMap.parse("3,2,4")
    with pytest.raises(InvalidCatMap):
        CatMap.parse("a,b,c,d")


@pytest.mark.parametrize("A,p,kind,ut", [
    ((3, 2, 4, 3), 3, Kind.INERT, False),
    ((3, 2, 4, 3), 5, Kind.INERT, False),
    ((3, 2, 4, 3), 7, Kind.SPLIT, False),
    ((5, 4, 6, 5), 3, Kind.RAMIFIED, True),
    ((1, 4, 2, 9), 3, Kind.RAMIFIED, False),
    ((3, 2, 10, 7), 5, Kind.SPLIT, True),
])
def test_classification_examples(A, p, kind, ut):
    c = classify_prime(CatMap(*A), p)
    assert (c.kind, c.upper_triangular) == (kind, ut)


@given(primes)
def test_classification_agrees_with_char_poly(p):
    A = CatMap(3, 2, 4, 3)
    roots = [x for x in range(p) if (x * x - 6 * x + 1) % p == 0]
    kind = classify_prime(A, p).kind
    assert kind is {0: Kind.INERT, 1: Kind.RAMIFIED, 2: Kind.SPLIT}[len(roots)]


def test_classify_rejects_two():
    with pytest.raises(InvalidPrime):
        classify_prime(CatMap(3, 2, 4, 3), 2)


@given(primes, st.data())
def test_matrix_inverse(p, data):
    a, b, c = (data.draw(st.integers(0, p - 1)) for _ in range(3))
    if a == 0:
        return
    d = (1 + b * c) * inv(a, p) % p
    M = (a, b, c, d)
    assert mat_mul(M, mat_inv(M, p), p) == (1, 0, 0, 1)


def test_mat_inv_rejects_non_sl2():
    with pytest.raises(NotSpecialLinear):
        mat_inv((1, 1, 1, 1), 5)


@pytest.mark.parametrize("p", PRIMES)
def test_hilbert90_bijection(p):
    D = find_nonsquare(p)
    assert hilbert90(0, D, p).is_one()
    assert (hilbert90(INF, D, p).a, hilbert90(INF, D, p).b) == (p - 1, 0)
    images = set()
    for t in projective_line(p):
        z = hilbert90(t, D, p)
        assert z.norm() == 1
        images.add((z.a, z.b))
    # all p + 1 norm-one elements, found by brute force
    norm_one = {(a, b) for a in range(p) for b in range(p) if (a * a - D * b * b) % p == 1}
    assert images == norm_one and len(images) == p + 1


@pytest.mark.parametrize("p", PRIMES)
def test_torus_generator(p):
    D = find_nonsquare(p)
    g, dlog = torus_generator_and_dlog(D, p)
    assert len(dlog) == p + 1
    assert dlog[(1, 0)] == 0
    assert dlog[(p - 1, 0)] == (p + 1) // 2
    order = next(k for k in range(1, p + 2) if (g ** k).is_one())
    assert order == p + 1


@given(primes, st.data())
def test_fp2_arithmetic(p, data):
    D = find_nonsquare(p)
    x = Fp2Element(data.draw(st.integers(0, p - 1)), data.draw(st.integers(0, p - 1)), D, p)
    y = Fp2Element(data.draw(st.integers(0, p - 1)), data.draw(st.integers(0, p - 1)), D, p)
    assert (x * y).norm() == x.norm() * y.norm() % p
    if x.norm():
        assert (x * x.inverse()).is_one()
        assert (x ** -2 * x ** 2).is_one()
