"""The Weil representation of SL2(F_p) on H_p = L^2(F_p).

States are complex vectors indexed by residues 0..n-1 with the inner
product <f, g> = (1/n) sum f(x) conj(g(x)); operators are dense n x n
matrices with (M f)(x) = sum_y M[x, y] f(y).  ``n`` is p here and the
square-free modulus N for tensor products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContextMismatch, NotSpecialLinear, SingularGenerator, UpperTriangularMatrix
from .finite_field import Mat, PrimeContext, mat_det, mat_inv, mat_mul, mat_reduce


@dataclass(frozen=True, eq=False)
class QuantumState:
    values: np.ndarray
    modulus: int = field(default=0)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "values", vals)
        if self.modulus == 0:
            object.__setattr__(self, "modulus", vals.shape[0])
        if vals.shape != (self.modulus,):
            raise ContextMismatch(f"state of shape {vals.shape} for modulus {self.modulus}")

    def __len__(self):
        return self.modulus

    def __getitem__(self, x):
        return self.values[x]

    def __add__(self, other: "QuantumState") -> "QuantumState":
        _same(self, other)
        return QuantumState(self.values + other.values, self.modulus)

    def __sub__(self, other: "QuantumState") -> "QuantumState":
        _same(self, other)
        return QuantumState(self.values - other.values, self.modulus)

    def __mul__(self, c) -> "QuantumState":
        return QuantumState(self.values * c, self.modulus)

    __rmul__ = __mul__

    def inner(self, other: "QuantumState") -> complex:
        return inner_product(self, other)

    def norm(self) -> float:
        return math.sqrt(max(inner_product(self, self).real, 0.0))

    def normalized(self) -> "QuantumState":
        return self * (1.0 / self.norm())

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def allclose(self, other: "QuantumState", atol: float = 1e-10) -> bool:
        _same(self, other)
        return bool(np.max(np.abs(self.values - other.values)) <= atol)


@dataclass(frozen=True, eq=False)
class LinearOperator:
    matrix: np.ndarray
    modulus: int = field(default=0)

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", mat)
        if self.modulus == 0:
            object.__setattr__(self, "modulus", mat.shape[0])
        if mat.shape != (self.modulus, self.modulus):
            raise ContextMismatch(f"operator of shape {mat.shape} for modulus {self.modulus}")

    def __matmul__(self, other):
        if isinstance(other, LinearOperator):
            _same(self, other)
            return LinearOperator(self.matrix @ other.matrix, self.modulus)
        if isinstance(other, QuantumState):
            _same(self, other)
            return QuantumState(self.matrix @ other.values, self.modulus)
        return NotImplemented

    @property
    def H(self) -> "LinearOperator":
        return LinearOperator(self.matrix.conj().T, self.modulus)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def max_deviation(self, other) -> float:
        other = other.matrix if isinstance(other, LinearOperator) else np.asarray(other)
        return float(np.max(np.abs(self.matrix - other)))

    def unitarity_defect(self) -> float:
        """max |U^* U - I|; the 1/n weight cancels so plain unitarity is the test."""
        return float(np.max(np.abs(self.matrix.conj().T @ self.matrix - np.eye(self.modulus))))


def _same(a, b):
    if a.modulus != b.modulus:
        raise ContextMismatch(f"modulus {a.modulus} vs {b.modulus}")


def inner_product(f: QuantumState, g: QuantumState) -> complex:
    _same(f, g)
    return complex(np.vdot(g.values, f.values) / f.modulus)


def delta(i: int, n: int) -> QuantumState:
    v = np.zeros(n, dtype=complex)
    v[i % n] = 1.0
    return QuantumState(v, n)


def constant_state(n: int, value: complex = 1.0) -> QuantumState:
    return QuantumState(np.full(n, value, dtype=complex), n)


def identity_operator(n: int) -> LinearOperator:
    return LinearOperator(np.eye(n, dtype=complex), n)


# -- generators, applied to states or to the columns of a matrix -----------------

def _squares(p: int) -> np.ndarray:
    x = np.arange(p, dtype=np.int64)
    return x * x % p


def _apply_upper(ctx: PrimeContext, b: int, arr: np.ndarray) -> np.ndarray:
    mult = ctx.psi_table[(b % ctx.p) * _squares(ctx.p) % ctx.p]
    return arr * (mult if arr.ndim == 1 else mult[:, None])


def _apply_diag(ctx: PrimeContext, t: int, arr: np.ndarray) -> np.ndarray:
    p = ctx.p
    t %= p
    if t == 0:
        raise SingularGenerator("diag(t, 1/t) needs t != 0 mod p")
    idx = t * np.arange(p, dtype=np.int64) % p
    return int(ctx.lam_table[t]) * arr[idx]


def fourier_matrix(ctx: PrimeContext) -> np.ndarray:
    """Dense matrix of U_p([[0, 1], [-1, 0]])."""
    cached = getattr(ctx, "_fourier", None)
    if cached is None:
        x = np.arange(ctx.p, dtype=np.int64)
        phases = ctx.psi_table[(2 * np.outer(x, x)) % ctx.p]
        cached = ctx.s_minus_one / math.sqrt(ctx.p) * phases
        cached.setflags(write=False)
        ctx._fourier = cached
    return cached


def _apply_fourier(ctx: PrimeContext, arr: np.ndarray) -> np.ndarray:
    return fourier_matrix(ctx) @ arr


def _check_state(ctx: PrimeContext, f: QuantumState):
    if f.modulus != ctx.p:
        raise ContextMismatch(f"state over {f.modulus} used with p={ctx.p}")


def apply_upper(ctx: PrimeContext, b: int, f: QuantumState) -> QuantumState:
    """U_p([[1, b], [0, 1]]): multiply by psi(b x^2)."""
    _check_state(ctx, f)
    return QuantumState(_apply_upper(ctx, b, f.values), ctx.p)


def apply_diag(ctx: PrimeContext, t: int, f: QuantumState) -> QuantumState:
    """U_p(diag(t, 1/t)): x -> Lambda(t) f(t x)."""
    _check_state(ctx, f)
    return QuantumState(_apply_diag(ctx, t, f.values), ctx.p)


def apply_fourier(ctx: PrimeContext, f: QuantumState) -> QuantumState:
    """U_p(w), w = [[0, 1], [-1, 0]]."""
    _check_state(ctx, f)
    return QuantumState(_apply_fourier(ctx, f.values), ctx.p)


def bruhat_factors(M: Mat, p: int):
    """Generator word for M, rightmost factor first.

    Each entry is ``("upper", b)``, ``("diag", t)`` or ``("fourier", None)``.
    For c != 0: M = u(a/c) w u(cd) h(-c).  For c == 0:
    [[t, b], [0, 1/t]] = u(b t) h(t).
    """
    a, b, c, d = mat_reduce(M, p)
    if mat_det((a, b, c, d), p) != 1:
        raise NotSpecialLinear(f"{M} has determinant {mat_det((a, b, c, d), p)} mod {p}")
    if c == 0:
        return [("diag", a), ("upper", b * a % p)]
    cinv = pow(c, -1, p)
    return [("diag", -c % p), ("upper", c * d % p), ("fourier", None), ("upper", a * cinv % p)]


def _apply_word(ctx: PrimeContext, word, arr: np.ndarray) -> np.ndarray:
    for kind, arg in word:
        if kind == "upper":
            arr = _apply_upper(ctx, arg, arr) if arg else arr
        elif kind == "diag":
            arr = _apply_diag(ctx, arg, arr) if arg != 1 else arr
        else:
            arr = _apply_fourier(ctx, arr)
    return arr


def apply_unitary(ctx: PrimeContext, M: Mat, f: QuantumState) -> QuantumState:
    """U_p(M) f without materializing the operator."""
    _check_state(ctx, f)
    return QuantumState(_apply_word(ctx, bruhat_factors(M, ctx.p), f.values), ctx.p)


def unitary_matrix(ctx: PrimeContext, M: Mat) -> np.ndarray:
    word = bruhat_factors(M, ctx.p)
    if word[-1][0] == "upper" and len(word) == 4:
        # u(b1) W u(b2) h(t): apply the monomial right factors to W's columns
        _, t = word[0]
        _, b2 = word[1]
        _, b1 = word[3]
        p = ctx.p
        y = np.arange(p, dtype=np.int64)
        right = fourier_matrix(ctx) * ctx.psi_table[b2 * _squares(p) % p][None, :]
        out = np.empty((p, p), dtype=complex)
        # (h(t) f)(y) = Lambda(t) f(t y): column y of the product lands on column t y
        out[:, t * y % p] = right * int(ctx.lam_table[t])
        return _apply_upper(ctx, b1, out)
    return _apply_word(ctx, word, np.eye(ctx.p, dtype=complex))


def build_unitary(ctx: PrimeContext, M: Mat) -> LinearOperator:
    """Dense U_p(M) assembled from the generator factorization of M."""
    return LinearOperator(unitary_matrix(ctx, M), ctx.p)


def delta_action(ctx: PrimeContext, M: Mat, i: int) -> QuantumState:
    """Closed form of U_p(M) delta_i for c != 0:

    (S_r(-1,p)/sqrt(p)) Lambda(-c) psi((a x^2 + d i^2 - 2 x i) / c).
    """
    p = ctx.p
    a, b, c, d = mat_reduce(M, p)
    if mat_det((a, b, c, d), p) != 1:
        raise NotSpecialLinear(f"{M} is not in SL2(F_{p})")
    if c == 0:
        raise UpperTriangularMatrix("closed form needs c != 0; use build_unitary")
    x = np.arange(p, dtype=np.int64)
    i %= p
    arg = (a * x * x + d * i * i - 2 * x * i) % p * pow(c, -1, p) % p
    pref = ctx.s_minus_one / math.sqrt(p) * int(ctx.lam_table[-c % p])
    return QuantumState(pref * ctx.psi_table[arg], p)


def trace_unitary(ctx: PrimeContext, M: Mat) -> complex:
    return build_unitary(ctx, M).trace()


def random_sl2(rng: np.random.Generator, p: int, require_c_nonzero: bool = False) -> Mat:
    """Uniform-ish random element of SL2(F_p) by rejection."""
    while True:
        a, b, c = (int(v) for v in rng.integers(0, p, size=3))
        if require_c_nonzero and c == 0:
            continue
        if a != 0:
            d = (1 + b * c) * pow(a, -1, p) % p
            return (a, b, c, d)
        if b * c % p == p - 1:
            d = int(rng.integers(0, p))
            return (a, b, c, d)


@dataclass
class MultiplicativityReport:
    p: int
    trials: int
    seed: int
    max_deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_deviation < self.tolerance


def check_multiplicativity(ctx: PrimeContext, trials: int = 100, seed: int = 0,
                           tolerance: float = 1e-9) -> MultiplicativityReport:
    """max |U(M1 M2) - U(M1) U(M2)| over seeded random pairs."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        m1, m2 = random_sl2(rng, ctx.p), random_sl2(rng, ctx.p)
        lhs = unitary_matrix(ctx, mat_mul(m1, m2, ctx.p))
        rhs = unitary_matrix(ctx, m1) @ unitary_matrix(ctx, m2)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return MultiplicativityReport(ctx.p, trials, seed, worst, tolerance)


def inverse_defect(ctx: PrimeContext, M: Mat) -> float:
    """max |U(M) U(M^-1) - I|."""
    prod = unitary_matrix(ctx, M) @ unitary_matrix(ctx, mat_inv(M, ctx.p))
    return float(np.max(np.abs(prod - np.eye(ctx.p))))
