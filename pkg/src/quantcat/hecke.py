"""Hecke groups, their characters, projections and Hecke eigenfunctions.

The Hecke group of A at p is the centralizer C_A of A mod p in SL2(F_p).
Up to conjugation by some M in SL2(F_p) it is

* inert:    the norm-one torus {[[a, bD], [b, a]] : a^2 - D b^2 = 1}, order p+1
* split:    the diagonal torus {diag(t, 1/t)}, order p-1
* ramified: {+-[[1, v], [0, 1]]}, order 2p
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConjugatorNotFound, DegenerateReduction, NotInGroup, WrongPrimeType
from .finite_field import (
    CatMap,
    Classification,
    Kind,
    Mat,
    PrimeContext,
    classify_prime,
    hilbert90_pair,
    inv,
    legendre,
    mat_det,
    mat_inv,
    mat_mul,
    multiplicative_dlog,
    projective_line,
    sqrt_mod,
    torus_generator_and_dlog,
)
from .weil import LinearOperator, QuantumState, unitary_matrix

RANK_THRESHOLD = 1e-6
PHASE_THRESHOLD = 1e-8
PHASE_CONVENTION = "first-coordinate-above-1e-8-positive-real/v1"


def _conj(M: Mat, B: Mat, p: int) -> Mat:
    return mat_mul(mat_mul(M, B, p), mat_inv(M, p), p)


def _scale_col(M: Mat, col: int, s: int, p: int) -> Mat:
    a, b, c, d = M
    if col == 0:
        return (a * s % p, b, c * s % p, d)
    return (a, b * s % p, c, d * s % p)


# -- conjugators ---------------------------------------------------------------

def _inert_conjugator(A: Mat, p: int, D: int):
    """M with M [[0, D], [1, 0]] M^-1 = lam (A - tr(A)/2).

    Returns ``(M, a0, b0)`` with A = M [[a0, b0 D], [b0, a0]] M^-1.
    """
    a, b, c, d = A
    half = (a + d) * inv(2, p) % p
    J = ((a - half) % p, b, c, (d - half) % p)
    disc = (half * half - 1) % p  # J^2 = disc * I
    lam = sqrt_mod(D * inv(disc, p), p)
    if lam is None:
        raise ConjugatorNotFound(f"A={A} is not inert at p={p}")
    Jp = tuple(v * lam % p for v in J)
    # M = [v, J' v]; det M = q(v) is an anisotropic form, so some v gives a square
    for v0 in range(p):
        for v1 in range(p):
            if (v0, v1) == (0, 0):
                continue
            w0 = (Jp[0] * v0 + Jp[1] * v1) % p
            w1 = (Jp[2] * v0 + Jp[3] * v1) % p
            det = (v0 * w1 - v1 * w0) % p
            s = sqrt_mod(inv(det, p), p) if det else None
            if s:
                M = (v0 * s % p, w0 * s % p, v1 * s % p, w1 * s % p)
                return M, half, inv(lam, p)
    raise ConjugatorNotFound(f"no conjugator for A={A} at p={p}")


def _split_conjugator(A: Mat, p: int):
    """M with A = M diag(lam, 1/lam) M^-1; M upper triangular iff A is."""
    a, b, c, d = A
    if c == 0:
        lam = a
        M = (1, b, 0, (d - a) % p)
    else:
        root = sqrt_mod((a + d) ** 2 - 4, p)
        if root is None or root == 0:
            raise ConjugatorNotFound(f"A={A} is not split at p={p}")
        lam = (a + d + root) * inv(2, p) % p
        mu = inv(lam, p)
        M = ((lam - d) % p, (mu - d) % p, c, c)
    M = _scale_col(M, 1, inv(mat_det(M, p), p), p)
    return M, lam


def _ramified_conjugator(A: Mat, p: int):
    """M with A = M [[eps, s], [0, eps]] M^-1, eps = +-1."""
    a, b, c, d = A
    eps = (a + d) * inv(2, p) % p
    N = ((a - eps) % p, b, c, (d - eps) % p)
    if N == (0, 0, 0, 0):
        raise DegenerateReduction(f"A={A} is scalar mod {p}")
    v2 = (0, 1) if (N[1], N[3]) != (0, 0) else (1, 0)
    v1 = ((N[0] * v2[0] + N[1] * v2[1]) % p, (N[2] * v2[0] + N[3] * v2[1]) % p)
    M = (v1[0], v2[0], v1[1], v2[1])
    M = _scale_col(M, 1, inv(mat_det(M, p), p), p)
    s = mat_mul(mat_mul(mat_inv(M, p), A, p), M, p)[1]
    return M, eps, s


def find_conjugator(A: Mat, kind: Kind, p: int, D: Optional[int] = None) -> Mat:
    """Conjugator into the normal form of ``kind``; det M = 1."""
    if kind is Kind.INERT:
        return _inert_conjugator(A, p, D)[0]
    if kind is Kind.SPLIT:
        return _split_conjugator(A, p)[0]
    return _ramified_conjugator(A, p)[0]


# -- groups and characters -----------------------------------------------------

@dataclass(frozen=True)
class HeckeElement:
    matrix: Mat
    param: object  # t in P^1 (inert), t in F_p^x (split), (sign, v) (ramified)


@dataclass(frozen=True, eq=False)
class HeckeCharacter:
    index: object  # int, or (e, k) in the ramified case
    values: np.ndarray  # aligned with HeckeGroup.elements

    def __call__(self, j: int) -> complex:
        return complex(self.values[j])

    @property
    def is_trivial(self) -> bool:
        return bool(np.allclose(self.values, 1.0))


class HeckeGroup:
    """Centralizer C_A of A mod p with its conjugator and element list."""

    def __init__(self, A: CatMap, ctx: PrimeContext):
        p = ctx.p
        self.A = A
        self.ctx = ctx
        self.p = p
        self.A_modp = A.mod(p)
        self.classification: Classification = classify_prime(A, p)
        self.kind = self.classification.kind
        self.D = ctx.D
        if self.kind is Kind.INERT:
            self.M, self.a0, self.b0 = _inert_conjugator(self.A_modp, p, self.D)
            self.elements = self._inert_elements()
        elif self.kind is Kind.SPLIT:
            self.M, self.eigenvalue = _split_conjugator(self.A_modp, p)
            self.elements = [HeckeElement(_conj(self.M, (t, 0, 0, inv(t, p)), p), t)
                             for t in range(1, p)]
        else:
            self.M, self.eps, self.s = _ramified_conjugator(self.A_modp, p)
            self.elements = []
            for sign in (1, -1):
                for v in range(p):
                    B = _conj(self.M, (1, v, 0, 1), p)
                    if sign == -1:
                        B = tuple(-x % p for x in B)
                    self.elements.append(HeckeElement(B, (sign, v)))
        self.index: Dict[Mat, int] = {e.matrix: j for j, e in enumerate(self.elements)}
        if len(self.index) != len(self.elements):
            raise ConjugatorNotFound("centralizer parametrization is not injective")

    def _inert_elements(self):
        p, D = self.p, self.D
        out = []
        for t in projective_line(p):
            a, b = hilbert90_pair(t, D, p)
            out.append(HeckeElement(_conj(self.M, (a, b * D % p, b, a), p), t))
        return out

    def __len__(self):
        return len(self.elements)

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def matrices(self) -> List[Mat]:
        return [e.matrix for e in self.elements]

    def __contains__(self, B: Mat) -> bool:
        return tuple(x % self.p for x in B) in self.index

    def index_of(self, B: Mat) -> int:
        key = tuple(int(x) % self.p for x in B)
        if key not in self.index:
            raise NotInGroup(f"{B} is not in the centralizer of {self.A_modp} mod {self.p}")
        return self.index[key]

    def product_index(self, j: int, k: int) -> int:
        return self.index[mat_mul(self.elements[j].matrix, self.elements[k].matrix, self.p)]

    @cached_property
    def operator_stack(self) -> np.ndarray:
        """U_p(B) for every element, shape (|C_A|, p, p)."""
        return np.stack([unitary_matrix(self.ctx, e.matrix) for e in self.elements])

    @cached_property
    def _torus_dlog(self):
        return torus_generator_and_dlog(self.D, self.p)

    def log_index(self, j: int) -> int:
        """Discrete log of element j in its cyclic factor (inert/split)."""
        e = self.elements[j]
        if self.kind is Kind.INERT:
            a, b = hilbert90_pair(e.param, self.D, self.p)
            return self._torus_dlog[1][(a, b)]
        if self.kind is Kind.SPLIT:
            return multiplicative_dlog(self.p)[1][e.param]
        raise WrongPrimeType("ramified groups are not cyclic")


def centralizer(A: CatMap, ctx: PrimeContext) -> HeckeGroup:
    return HeckeGroup(A, ctx)


def characters(G: HeckeGroup) -> List[HeckeCharacter]:
    """All |C_A| characters, ordered by index."""
    p = G.p
    if G.kind is Kind.RAMIFIED:
        sign = np.array([e.param[0] for e in G.elements])
        v = np.array([e.param[1] for e in G.elements], dtype=np.int64)
        roots = np.exp(2j * np.pi * np.arange(p) / p)
        out = []
        for e in (0, 1):
            for k in range(p):
                vals = (sign.astype(complex) ** e) * roots[(k * v) % p]
                out.append(HeckeCharacter((e, k), vals))
        return out
    n = G.order
    logs = np.array([G.log_index(j) for j in range(n)], dtype=np.int64)
    roots = np.exp(2j * np.pi * np.arange(n) / n)
    return [HeckeCharacter(k, roots[(k * logs) % n]) for k in range(n)]


def character_by_index(G: HeckeGroup, index) -> HeckeCharacter:
    for nu in characters(G):
        if nu.index == index:
            return nu
    raise KeyError(index)


def hecke_operator(G: HeckeGroup, B: Mat) -> LinearOperator:
    j = G.index_of(B)
    return LinearOperator(G.operator_stack[j], G.p)


def projection_matrix(G: HeckeGroup, nu: HeckeCharacter) -> np.ndarray:
    """P_nu = |C_A|^-1 sum_B conj(nu(B)) U_p(B)."""
    return np.tensordot(nu.values.conj(), G.operator_stack, axes=1) / G.order


def projection_operator(G: HeckeGroup, nu: HeckeCharacter) -> LinearOperator:
    return LinearOperator(projection_matrix(G, nu), G.p)


def project(G: HeckeGroup, nu: HeckeCharacter, f: QuantumState) -> QuantumState:
    vals = np.tensordot(nu.values.conj(), G.operator_stack @ f.values, axes=1) / G.order
    return QuantumState(vals, G.p)


# -- eigenspaces -----------------------------------------------------------------

def phase_fix(v: np.ndarray) -> np.ndarray:
    """Rotate so the first coordinate with |v| > 1e-8 is positive real."""
    big = np.flatnonzero(np.abs(v) > PHASE_THRESHOLD)
    if big.size == 0:
        return v
    z = v[big[0]]
    return v * (np.conj(z) / abs(z))


def sup_norm(phi: QuantumState) -> float:
    return phi.sup_norm()


@dataclass
class EigenspaceResult:
    character: HeckeCharacter
    dimension: int
    basis: List[QuantumState] = field(default_factory=list)
    label: Sequence[str] = ()  # optional per-vector names, e.g. "phi_0"

    @property
    def sup_norms(self) -> List[float]:
        return [phi.sup_norm() for phi in self.basis]

    def extremal_sup_norm(self) -> float:
        """Largest sup norm over all unit vectors of the eigenspace.

        For an orthonormal basis phi_j this is max_x sqrt(sum_j |phi_j(x)|^2).
        """
        if not self.basis:
            return 0.0
        stack = np.stack([phi.values for phi in self.basis])
        return float(np.sqrt(np.max(np.sum(np.abs(stack) ** 2, axis=0))))

    def extremal_vector(self) -> Optional[QuantumState]:
        if not self.basis:
            return None
        stack = np.stack([phi.values for phi in self.basis])
        x = int(np.argmax(np.sum(np.abs(stack) ** 2, axis=0)))
        coeffs = stack[:, x].conj()
        vec = coeffs @ stack / np.linalg.norm(coeffs)
        return QuantumState(phase_fix(vec), stack.shape[1])

    def eigen_defect(self, G: HeckeGroup) -> float:
        """max over B and basis vectors of |U(B) phi - nu(B) phi|."""
        worst = 0.0
        for phi in self.basis:
            img = G.operator_stack @ phi.values
            diff = img - self.character.values[:, None] * phi.values[None, :]
            worst = max(worst, float(np.max(np.abs(diff))))
        return worst


def _pivoted_basis(P: np.ndarray, dim: int) -> List[np.ndarray]:
    p = P.shape[0]
    R = P.copy()
    out = []
    for _ in range(dim):
        norms = np.sqrt(np.sum(np.abs(R) ** 2, axis=0) / p)
        top = norms.max()
        i = int(np.flatnonzero(norms >= top * (1 - 1e-9))[0])
        v = R[:, i] / norms[i]
        out.append(v)
        R = R - np.outer(v, v.conj() @ R) / p
    return [phase_fix(v) for v in out]


def numerical_rank(P: np.ndarray) -> int:
    p = P.shape[0]
    gram = P.conj().T @ P / p
    w = np.linalg.eigvalsh((gram + gram.conj().T) / 2)
    scale = max(float(w[-1]), 1.0 / p)
    return int(np.sum(w > RANK_THRESHOLD * scale))


def eigenspace(G: HeckeGroup, nu: HeckeCharacter) -> EigenspaceResult:
    """V_nu from the projected deltas P_nu delta_i (columns of P_nu)."""
    P = projection_matrix(G, nu)
    dim = numerical_rank(P)
    basis = [QuantumState(v, G.p) for v in _pivoted_basis(P, dim)]
    return EigenspaceResult(nu, dim, basis)


def eigenspaces(G: HeckeGroup) -> List[EigenspaceResult]:
    """One result per character (dimension-0 results have an empty basis)."""
    return [eigenspace(G, nu) for nu in characters(G)]


def eigenbasis(A: CatMap, ctx: PrimeContext) -> List[EigenspaceResult]:
    return eigenspaces(centralizer(A, ctx))


def basis_vectors(results: Sequence[EigenspaceResult]) -> List[QuantumState]:
    return [phi for res in results for phi in res.basis]


def gram_matrix(vectors: Sequence[QuantumState]) -> np.ndarray:
    stack = np.stack([v.values for v in vectors])
    return stack.conj() @ stack.T / stack.shape[1]


# -- closed forms --------------------------------------------------------------

def _group_results(G: HeckeGroup, items) -> List[EigenspaceResult]:
    """items: (character index, label, state) -> results ordered by index."""
    chars = {nu.index: nu for nu in characters(G)}
    grouped: Dict[object, EigenspaceResult] = {}
    for idx, label, phi in items:
        res = grouped.setdefault(idx, EigenspaceResult(chars[idx], 0, [], []))
        res.basis.append(phi)
        res.label.append(label)
        res.dimension += 1
    return [grouped[k] for k in sorted(grouped)]


def ramified_closed_form(A: CatMap, ctx: PrimeContext, G: Optional[HeckeGroup] = None):
    """phi_i^+- = sqrt(p/2) U(M)(delta_i +- delta_-i), phi_0 = sqrt(p) U(M) delta_0."""
    G = G or centralizer(A, ctx)
    if G.kind is not Kind.RAMIFIED:
        raise WrongPrimeType(f"p={ctx.p} is {G.kind.value}, not ramified")
    p = ctx.p
    U = unitary_matrix(ctx, G.M)
    lam_m1 = legendre(-1, p)
    items = [((0 if lam_m1 == 1 else 1, 0), "phi_0", QuantumState(math.sqrt(p) * U[:, 0], p))]
    for i in range(1, (p - 1) // 2 + 1):
        k = ctx.r * i * i % p
        for sign, name in ((1, "+"), (-1, "-")):
            vec = U[:, i] + sign * U[:, (-i) % p]
            e = 0 if sign * lam_m1 == 1 else 1
            items.append(((e, k), f"phi_{i}^{name}", QuantumState(math.sqrt(p / 2) * vec, p)))
    return _group_results(G, items)


def split_closed_form(A: CatMap, ctx: PrimeContext, G: Optional[HeckeGroup] = None):
    """phi_chi = sqrt(p/(p-1)) U(M) chi and phi_0 = sqrt(p) U(M) delta_0.

    The character chi_k(g^m) = e(k m / (p-1)) gives Hecke character index
    k + (p-1)/2, so chi_0 and delta_0 share the two-dimensional eigenspace.
    """
    G = G or centralizer(A, ctx)
    if G.kind is not Kind.SPLIT:
        raise WrongPrimeType(f"p={ctx.p} is {G.kind.value}, not split")
    p = ctx.p
    n = p - 1
    U = unitary_matrix(ctx, G.M)
    _, logs = multiplicative_dlog(p)
    log_arr = np.array([logs[x] for x in range(1, p)], dtype=np.int64)
    roots = np.exp(2j * np.pi * np.arange(n) / n)
    half = n // 2
    items = []
    for k in range(n):
        chi = np.zeros(p, dtype=complex)
        chi[1:] = roots[(k * log_arr) % n]
        items.append(((k + half) % n, f"phi_chi{k}", QuantumState(math.sqrt(p / n) * (U @ chi), p)))
    items.append((half, "phi_0", QuantumState(math.sqrt(p) * U[:, 0], p)))
    return _group_results(G, items)


def split_ut_closed_form(A: CatMap, ctx: PrimeContext, G: Optional[HeckeGroup] = None):
    G = G or centralizer(A, ctx)
    if G.kind is not Kind.SPLIT or not G.classification.upper_triangular:
        raise WrongPrimeType(f"p={ctx.p} is not split with A upper triangular")
    return split_closed_form(A, ctx, G)


def two_dimensional(results: Sequence[EigenspaceResult]) -> List[EigenspaceResult]:
    return [r for r in results if r.dimension == 2]


def subspace_distance(a: Sequence[QuantumState], b: Sequence[QuantumState]) -> float:
    """Largest principal angle between span(a) and span(b)."""
    from scipy.linalg import subspace_angles

    if not a and not b:
        return 0.0
    if len(a) != len(b):
        return math.pi / 2
    A_ = np.stack([v.values for v in a], axis=1)
    B_ = np.stack([v.values for v in b], axis=1)
    return float(np.max(subspace_angles(A_, B_)))


def spans_agree(projected: Sequence[EigenspaceResult], closed: Sequence[EigenspaceResult],
                tol: float = 1e-6) -> Tuple[bool, float]:
    """Compare eigenspaces character by character."""
    by_index = {r.character.index: r for r in projected}
    worst = 0.0
    covered = set()
    for res in closed:
        other = by_index.get(res.character.index)
        other_basis = other.basis if other else []
        worst = max(worst, subspace_distance(res.basis, other_basis))
        covered.add(res.character.index)
    for res in projected:
        if res.dimension and res.character.index not in covered:
            worst = math.pi / 2
    return worst < tol, worst
