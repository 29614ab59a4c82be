"""Arithmetic in F_p and F_{p^2} = F_p[sqrt(D)], characters, Gauss sums.

Also holds the integer cat map type and its reduction/classification mod p,
plus small helpers for 2x2 matrices over F_p (stored as ``(a, b, c, d)``
tuples, row major).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Dict, Tuple

import numpy as np

from .errors import InvalidCatMap, InvalidPrime, NotSpecialLinear

Mat = Tuple[int, int, int, int]

INF = math.inf  # the point at infinity of P^1(F_p)


def is_odd_prime(p: int) -> bool:
    if not isinstance(p, (int, np.integer)) or p < 3 or p % 2 == 0:
        return False
    return all(p % q for q in range(3, math.isqrt(p) + 1, 2))


def check_odd_prime(p: int) -> int:
    if not is_odd_prime(p):
        raise InvalidPrime(f"{p!r} is not an odd prime")
    return int(p)


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a/p) in {-1, 0, 1} by Euler's criterion."""
    check_odd_prime(p)
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def inv(a: int, p: int) -> int:
    a %= p
    if a == 0:
        raise ZeroDivisionError(f"0 has no inverse mod {p}")
    return pow(a, -1, p)


@lru_cache(maxsize=None)
def _sqrt_table(p: int) -> Dict[int, int]:
    table: Dict[int, int] = {}
    for x in range((p + 1) // 2):
        table.setdefault(x * x % p, x)
    return table


def sqrt_mod(a: int, p: int):
    """Smallest square root of ``a`` mod p, or None for a non-residue."""
    return _sqrt_table(p).get(a % p)


def find_nonsquare(p: int) -> int:
    """Smallest positive quadratic non-residue mod p."""
    check_odd_prime(p)
    for d in range(2, p):
        if legendre(d, p) == -1:
            return d
    raise AssertionError("unreachable for odd p")


def _prime_factors(n: int):
    out, q = [], 2
    while q * q <= n:
        if n % q == 0:
            out.append(q)
            while n % q == 0:
                n //= q
        q += 1
    if n > 1:
        out.append(n)
    return out


def primitive_root(p: int) -> int:
    check_odd_prime(p)
    qs = _prime_factors(p - 1)
    for g in range(2, p):
        if all(pow(g, (p - 1) // q, p) != 1 for q in qs):
            return g
    return 1  # p == 3 falls through only if 2 fails, which it does not


# -- 2x2 matrices over F_p ---------------------------------------------------

def mat_reduce(m, p: int) -> Mat:
    a, b, c, d = (int(v) % p for v in m)
    return (a, b, c, d)


def mat_mul(m: Mat, n: Mat, p: int) -> Mat:
    a, b, c, d = m
    e, f, g, h = n
    return ((a * e + b * g) % p, (a * f + b * h) % p,
            (c * e + d * g) % p, (c * f + d * h) % p)


def mat_det(m: Mat, p: int) -> int:
    a, b, c, d = m
    return (a * d - b * c) % p


def mat_inv(m: Mat, p: int) -> Mat:
    """Inverse of an SL2 matrix."""
    a, b, c, d = m
    if mat_det(m, p) != 1:
        raise NotSpecialLinear(f"det {m} != 1 mod {p}")
    return (d % p, -b % p, -c % p, a % p)


def identity() -> Mat:
    return (1, 0, 0, 1)


def minus_identity(p: int) -> Mat:
    return (p - 1, 0, 0, p - 1)


# -- cat maps ------------------------------------------------------------------

class Kind(str, enum.Enum):
    INERT = "inert"
    SPLIT = "split"
    RAMIFIED = "ramified"


@dataclass(frozen=True)
class Classification:
    kind: Kind
    upper_triangular: bool


@dataclass(frozen=True)
class CatMap:
    """Hyperbolic A in SL2(Z) with A = I mod 2."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        a, b, c, d = self.a, self.b, self.c, self.d
        if a * d - b * c != 1:
            raise InvalidCatMap(f"det {self.entries} = {a * d - b * c}, expected 1")
        if abs(a + d) <= 2:
            raise InvalidCatMap(f"{self.entries} is not hyperbolic (|trace| <= 2)")
        if a % 2 != 1 or d % 2 != 1 or b % 2 or c % 2:
            raise InvalidCatMap(f"{self.entries} is not congruent to I mod 2")

    @classmethod
    def parse(cls, text: str) -> "CatMap":
        """Build from ``"a,b,c,d"``."""
        try:
            vals = [int(v) for v in text.replace(" ", "").split(",")]
        except ValueError as exc:
            raise InvalidCatMap(f"cannot parse matrix {text!r}") from exc
        if len(vals) != 4:
            raise InvalidCatMap(f"matrix needs 4 entries, got {len(vals)}")
        return cls(*vals)

    @property
    def entries(self) -> Tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    @property
    def trace(self) -> int:
        return self.a + self.d

    def mod(self, p: int) -> Mat:
        return mat_reduce(self.entries, p)


def classify_prime(A: CatMap, p: int) -> Classification:
    if p == 2 or not is_odd_prime(p):
        raise InvalidPrime(f"{p} is not an odd prime")
    if not isinstance(A, CatMap):
        A = CatMap(*A)
    s = legendre(A.trace ** 2 - 4, p)
    kind = {-1: Kind.INERT, 1: Kind.SPLIT, 0: Kind.RAMIFIED}[s]
    return Classification(kind, A.c % p == 0)


# -- characters and Gauss sums -------------------------------------------------

class PrimeContext:
    """Canonical character data for an odd prime p.

    ``r = (p+1)/2`` so that psi(x) = e(r x / p), and ``D`` is the smallest
    non-residue.  Roots of unity are always looked up from exactly reduced
    integer exponents.
    """

    def __init__(self, p: int):
        self.p = check_odd_prime(p)
        self.r = (self.p + 1) // 2
        self.D = find_nonsquare(self.p)
        k = np.arange(self.p)
        self.roots = np.exp(2j * np.pi * k / self.p)
        self.psi_table = self.roots[(self.r * k) % self.p]
        self.lam_table = np.array([legendre(int(x), self.p) for x in k], dtype=np.int64)

    def __repr__(self):
        return f"PrimeContext(p={self.p}, r={self.r}, D={self.D})"

    def __eq__(self, other):
        return isinstance(other, PrimeContext) and other.p == self.p

    def __hash__(self):
        return hash(("PrimeContext", self.p))

    def __getstate__(self):
        return {"p": self.p}

    def __setstate__(self, state):
        self.__init__(state["p"])

    def additive_char(self, x) -> complex:
        """psi(x) = e^{2 pi i r x / p}; accepts ints or integer arrays."""
        return self.psi_table[np.asarray(x) % self.p]

    def legendre(self, x):
        return self.lam_table[np.asarray(x) % self.p]

    def gauss_sum(self, a: int) -> complex:
        """S_r(a, p) = p^{-1/2} sum_x e(-r a x^2 / p)."""
        x = np.arange(self.p, dtype=np.int64)
        k = (-self.r * (a % self.p) * x * x) % self.p
        return complex(self.roots[k].sum() / math.sqrt(self.p))

    @cached_property
    def s_minus_one(self) -> complex:
        return self.gauss_sum(-1)

    def inv(self, a: int) -> int:
        return inv(a, self.p)


@lru_cache(maxsize=64)
def prime_context(p: int) -> PrimeContext:
    return PrimeContext(p)


# -- F_{p^2} and the norm-one torus -------------------------------------------

@dataclass(frozen=True)
class Fp2Element:
    """a + b sqrt(D) in F_p[sqrt(D)]."""

    a: int
    b: int
    D: int
    p: int

    def __post_init__(self):
        object.__setattr__(self, "a", self.a % self.p)
        object.__setattr__(self, "b", self.b % self.p)

    def _like(self, a, b):
        return Fp2Element(a, b, self.D, self.p)

    def __mul__(self, other: "Fp2Element") -> "Fp2Element":
        return self._like(self.a * other.a + self.D * self.b * other.b,
                          self.a * other.b + self.b * other.a)

    def __pow__(self, k: int) -> "Fp2Element":
        if k < 0:
            return self.inverse() ** (-k)
        out, base = self._like(1, 0), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conj(self) -> "Fp2Element":
        return self._like(self.a, -self.b)

    def norm(self) -> int:
        return (self.a * self.a - self.D * self.b * self.b) % self.p

    def inverse(self) -> "Fp2Element":
        n = inv(self.norm(), self.p)
        c = self.conj()
        return self._like(c.a * n, c.b * n)

    def is_one(self) -> bool:
        return self.a == 1 and self.b == 0


def hilbert90_pair(t, D: int, p: int) -> Tuple[int, int]:
    """(a, b) with a^2 - D b^2 = 1 parametrized by t in P^1(F_p)."""
    if t == INF:
        return (p - 1, 0)
    t %= p
    den = inv(1 - D * t * t, p)
    return ((1 + D * t * t) * den % p, 2 * t * den % p)


def hilbert90(t, D: int, p: int) -> Fp2Element:
    """Norm-one element (1 + t sqrt(D)) / (1 - t sqrt(D)); t = INF gives -1."""
    a, b = hilbert90_pair(t, D, p)
    return Fp2Element(a, b, D, p)


def projective_line(p: int):
    """P^1(F_p) in the fixed order 0, INF, 1, ..., p-1."""
    return [0, INF] + list(range(1, p))


def torus_generator_and_dlog(D: int, p: int):
    """Generator of the cyclic norm-one group and its discrete-log table.

    Returns ``(g, dlog)`` where ``dlog`` maps ``(a, b)`` coefficient pairs to
    exponents mod p+1.
    """
    check_odd_prime(p)
    if legendre(D, p) != -1:
        raise ValueError(f"D={D} is a square mod {p}")
    n = p + 1
    qs = _prime_factors(n)
    for t in projective_line(p):
        g = hilbert90(t, D, p)
        if all(not (g ** (n // q)).is_one() for q in qs):
            break
    else:  # pragma: no cover - the group is cyclic
        raise AssertionError("no generator of the norm-one torus")
    dlog: Dict[Tuple[int, int], int] = {}
    x = Fp2Element(1, 0, D, p)
    for k in range(n):
        dlog[(x.a, x.b)] = k
        x = x * g
    return g, dlog


def multiplicative_dlog(p: int):
    """Primitive root g and the table t -> log_g(t) on F_p^x."""
    g = primitive_root(p)
    table = {}
    x = 1
    for k in range(p - 1):
        table[x] = k
        x = x * g % p
    return g, table
