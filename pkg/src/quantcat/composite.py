"""Square-free composite N: CRT indexing and tensor-product quantization.

For N = p_1 ... p_k (distinct odd primes, ascending) a state on Z/NZ is
identified with a product of states on the F_{p_i} via x -> (x mod p_i).
U_N is defined here as the tensor product of the U_{p_i}.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from .errors import ContextMismatch, UnsupportedModulus
from .finite_field import CatMap, Classification, Kind, classify_prime, prime_context
from .hecke import EigenspaceResult, centralizer, eigenspaces
from .weil import LinearOperator, QuantumState


def factor_square_free(N: int) -> List[int]:
    if N < 3 or N % 2 == 0:
        raise UnsupportedModulus(f"N={N} must be odd and > 1")
    out, n, q = [], N, 3
    while q * q <= n:
        if n % q == 0:
            n //= q
            if n % q == 0:
                raise UnsupportedModulus(f"N={N} is divisible by {q}^2")
            out.append(q)
        q += 2
    if n > 1:
        out.append(n)
    return out


class CompositeContext:
    def __init__(self, N: int):
        self.N = int(N)
        self.primes = factor_square_free(self.N)
        self.contexts = [prime_context(p) for p in self.primes]
        x = np.arange(self.N)
        self._residues = [x % p for p in self.primes]

    def __repr__(self):
        return f"CompositeContext(N={self.N}, primes={self.primes})"

    @property
    def k(self) -> int:
        return len(self.primes)

    def crt_split(self, x: int) -> Tuple[int, ...]:
        return tuple(int(x) % p for p in self.primes)

    def crt_combine(self, residues: Sequence[int]) -> int:
        if len(residues) != self.k:
            raise ContextMismatch(f"expected {self.k} residues, got {len(residues)}")
        x = 0
        for r, p in zip(residues, self.primes):
            m = self.N // p
            x += r * m * pow(m, -1, p)
        return x % self.N


def crt_split(x: int, cctx: CompositeContext) -> Tuple[int, ...]:
    return cctx.crt_split(x)


def crt_combine(residues: Sequence[int], cctx: CompositeContext) -> int:
    return cctx.crt_combine(residues)


def _check_factors(items, cctx: CompositeContext):
    if len(items) != cctx.k:
        raise ContextMismatch(f"{len(items)} factors for N={cctx.N} with {cctx.k} primes")
    for item, p in zip(items, cctx.primes):
        if item.modulus != p:
            raise ContextMismatch(f"factor over {item.modulus} where {p} was expected")


def tensor_state(components: Sequence[QuantumState], cctx: CompositeContext) -> QuantumState:
    """phi(x) = prod_i phi_i(x mod p_i)."""
    _check_factors(components, cctx)
    vals = np.ones(cctx.N, dtype=complex)
    for comp, res in zip(components, cctx._residues):
        vals = vals * comp.values[res]
    return QuantumState(vals, cctx.N)


def tensor_operator(ops: Sequence[LinearOperator], cctx: CompositeContext) -> LinearOperator:
    """Entry [x, y] = prod_i U_i[x mod p_i, y mod p_i]."""
    _check_factors(ops, cctx)
    mat = np.ones((cctx.N, cctx.N), dtype=complex)
    for op, res in zip(ops, cctx._residues):
        mat = mat * op.matrix[np.ix_(res, res)]
    return LinearOperator(mat, cctx.N)


@dataclass
class CompositeVector:
    labels: Tuple[Tuple[object, int], ...]  # per prime: (character index, position in eigenspace)
    state: QuantumState
    factor_sup_norms: Tuple[float, ...]

    @property
    def sup_norm(self) -> float:
        return self.state.sup_norm()

    @property
    def product_deviation(self) -> float:
        return abs(self.sup_norm - math.prod(self.factor_sup_norms))


@dataclass
class CompositeBasis:
    cctx: CompositeContext
    classifications: List[Classification]
    factors: List[List[EigenspaceResult]]
    vectors: List[CompositeVector] = field(default_factory=list)

    @property
    def product_bound(self) -> float:
        return float(2 ** self.cctx.k)

    @property
    def product_bound_applicable(self) -> bool:
        """Every factor inert, or split/ramified with A not upper triangular."""
        return all(c.kind is Kind.INERT or not c.upper_triangular for c in self.classifications)

    def states(self) -> List[QuantumState]:
        return [v.state for v in self.vectors]


def composite_eigenbasis(A: CatMap, cctx: CompositeContext) -> CompositeBasis:
    """All products of per-prime Hecke eigenbasis vectors, lexicographic in the labels."""
    factors, classes = [], []
    for ctx in cctx.contexts:
        classes.append(classify_prime(A, ctx.p))
        factors.append([r for r in eigenspaces(centralizer(A, ctx)) if r.dimension])
    per_prime = []
    for results in factors:
        per_prime.append([((r.character.index, j), phi)
                          for r in results for j, phi in enumerate(r.basis)])
    out = CompositeBasis(cctx, classes, factors)
    for combo in itertools.product(*per_prime):
        labels = tuple(lbl for lbl, _ in combo)
        states = [phi for _, phi in combo]
        out.vectors.append(CompositeVector(labels, tensor_state(states, cctx),
                                           tuple(phi.sup_norm() for phi in states)))
    return out

