"""The twisted exponential sums E_nu(i, x) attached to an inert Hecke group.

For t in F_p^x the Hecke element with Hilbert-90 parameter t contributes

    conj(nu(t)) Lambda(-2t / (1 - D t^2)) psi_F((x-i)^2 / (2t) + D t (x+i)^2 / 2)

with psi_F(y) = psi(F y), F = (W^2 - D Z^2)^-1 and M = [[X, Y], [Z, W]] the
conjugator of the group.  The (p+1)-term projection then reads

    (P_nu delta_i)(x) = (delta_i(x) + conj(nu(-I)) Lambda(-1) delta_i(-x)
                         + alpha(i, x) S_r(-1, p) E_nu(i, x) / sqrt(p)) / (p+1).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from .errors import WrongPrimeType
from .finite_field import Kind, hilbert90, inv, legendre
from .hecke import HeckeCharacter, HeckeGroup
from .weil import QuantumState

BOUNDS = {"generic": 4.0, "diagonal": 3.0, "origin": 2.0}
BOUND_TOL = 1e-8


def regime(i: int, x: int, p: int) -> str:
    """'origin' for i = x = 0, 'diagonal' for x = +-i, else 'generic'."""
    i, x = i % p, x % p
    if i == 0 and x == 0:
        return "origin"
    if x == i or x == (-i) % p:
        return "diagonal"
    return "generic"


class ExpSumContext:
    def __init__(self, G: HeckeGroup):
        if G.kind is not Kind.INERT:
            raise WrongPrimeType(f"exponential sums need an inert prime, p={G.p} is {G.kind.value}")
        self.G = G
        ctx = G.ctx
        p, D = G.p, G.D
        self.p, self.D, self.r = p, D, ctx.r
        X, Y, Z, W = G.M
        self.Q = (W * W - D * Z * Z) % p
        assert self.Q != 0, "W^2 - D Z^2 vanished although D is a non-square"
        self.F = inv(self.Q, p)
        self.K = (Y * W - D * X * Z) % p
        self.lam_Q = legendre(self.Q, p)
        self.lam_minus_one = legendre(-1, p)
        self.s_minus_one = ctx.s_minus_one
        self.psi = ctx.psi_table

        t = np.arange(1, p, dtype=np.int64)
        one_minus = (1 - D * t * t) % p
        assert np.all(one_minus != 0)
        self.t = t
        self.inv_t = np.array([inv(int(v), p) for v in t], dtype=np.int64)
        inv_om = np.array([inv(int(v), p) for v in one_minus], dtype=np.int64)
        self.lam_t = ctx.lam_table[(-2 * t % p) * inv_om % p]
        # group elements are ordered 0, INF, 1, ..., p-1
        self.t_index = t + 1
        self.minus_identity_index = 1
        k = np.arange(p, dtype=np.int64)
        self.psi_F = self.psi[(self.F * k) % p]

    # -- tables ------------------------------------------------------------

    def coefficients(self, nu: HeckeCharacter) -> np.ndarray:
        """conj(nu(t)) Lambda(-2t/(1-Dt^2)) for t = 1..p-1."""
        return nu.values[self.t_index].conj() * self.lam_t

    def phase_args(self, i, x) -> np.ndarray:
        """(x-i)^2 r/t + r D t (x+i)^2 mod p, broadcast over a trailing t axis."""
        p, r = self.p, self.r
        i = np.asarray(i, dtype=np.int64)[..., None] % p
        x = np.asarray(x, dtype=np.int64)[..., None] % p
        dm = (x - i) % p
        dp = (x + i) % p
        return (dm * dm % p * r % p * self.inv_t + r * self.D % p * self.t % p * (dp * dp % p)) % p

    def alpha(self, i: int, x: int) -> complex:
        p = self.p
        arg = self.K * ((x * x - i * i) % p) % p * self.F % p
        return self.lam_Q * complex(self.psi[arg])

    def exp_sum(self, nu: HeckeCharacter, i: int, x: int) -> complex:
        return complex(self.psi_F[self.phase_args(i, x)] @ self.coefficients(nu))

    def exp_sum_table(self, nu: HeckeCharacter) -> np.ndarray:
        """E_nu(i, x) for all i (rows) and x (columns)."""
        idx = np.arange(self.p)
        args = self.phase_args(idx[:, None], idx[None, :])
        return self.psi_F[args] @ self.coefficients(nu)

    def exp_sum_naive(self, nu: HeckeCharacter, i: int, x: int) -> complex:
        """Term-by-term evaluation from the F_{p^2} parametrization."""
        p, D, r = self.p, self.D, self.r
        G = self.G
        total = 0j
        for t in range(1, p):
            z = hilbert90(t, D, p)
            j = G.index[G.elements[t + 1].matrix]
            assert hilbert90(G.elements[j].param, D, p) == z
            nubar = complex(nu.values[j]).conjugate()
            lam = legendre(-2 * t * inv(1 - D * t * t, p), p)
            y = ((x - i) ** 2 * r * inv(t, p) + r * D * t * (x + i) ** 2) % p
            total += nubar * lam * cmath.exp(2j * math.pi * (r * self.F * y % p) / p)
        return total


def projection_via_exp_sum(ctxE: ExpSumContext, nu: HeckeCharacter, i: int) -> QuantumState:
    p = ctxE.p
    i %= p
    x = np.arange(p)
    E = ctxE.psi_F[ctxE.phase_args(np.full(p, i), x)] @ ctxE.coefficients(nu)
    K, F = ctxE.K, ctxE.F
    alpha = ctxE.lam_Q * ctxE.psi[K * ((x * x - i * i) % p) % p * F % p]
    nu_minus = complex(nu.values[ctxE.minus_identity_index]).conjugate()
    vals = alpha * ctxE.s_minus_one * E / math.sqrt(p)
    vals[i] += 1.0
    vals[(-i) % p] += nu_minus * ctxE.lam_minus_one
    return QuantumState(vals / (p + 1), p)


@dataclass
class BoundReport:
    p: int
    mode: str
    samples: int
    seed: int
    max_ratio: Dict[str, float] = field(default_factory=dict)  # max |E| / sqrt(p) per regime
    count: Dict[str, int] = field(default_factory=dict)
    max_imag_diagonal: float = 0.0  # max |Im(S_r(-1,p) E_nu(i,i))|

    @property
    def passed(self) -> bool:
        return all(self.max_ratio.get(k, 0.0) <= b + BOUND_TOL for k, b in BOUNDS.items())


def verify_bounds(ctxE: ExpSumContext, mode: str = "exhaustive", samples: int = 10_000,
                  seed: int = 0) -> BoundReport:
    """Scan (nu, i, x) and record max |E_nu(i, x)| / sqrt(p) per regime."""
    from .hecke import characters

    p = ctxE.p
    chars = characters(ctxE.G)
    coeffs = np.stack([ctxE.coefficients(nu) for nu in chars])  # (n, p-1)
    if mode == "exhaustive":
        idx = np.arange(p)
        ii, xx = np.meshgrid(idx, idx, indexing="ij")
        ii, xx = ii.ravel(), xx.ravel()
        E = ctxE.psi_F[ctxE.phase_args(ii, xx)] @ coeffs.T  # (p^2, n)
        ii = np.repeat(ii[:, None], len(chars), axis=1).ravel()
        xx = np.repeat(xx[:, None], len(chars), axis=1).ravel()
        E = E.ravel()
        samples = E.size
    elif mode == "sample":
        rng = np.random.default_rng(seed)
        ks = rng.integers(0, len(chars), size=samples)
        ii = rng.integers(0, p, size=samples)
        xx = rng.integers(0, p, size=samples)
        args = ctxE.phase_args(ii, xx)
        E = np.einsum("kt,kt->k", ctxE.psi_F[args], coeffs[ks])
    else:
        raise ValueError(f"unknown sweep mode {mode!r}")

    ratio = np.abs(E) / math.sqrt(p)
    origin = (ii == 0) & (xx == 0)
    diagonal = ((xx == ii) | (xx == (-ii) % p)) & ~origin
    generic = ~(origin | diagonal)
    report = BoundReport(p, mode, int(samples), seed)
    for name, mask in (("generic", generic), ("diagonal", diagonal), ("origin", origin)):
        report.count[name] = int(mask.sum())
        report.max_ratio[name] = float(ratio[mask].max()) if mask.any() else 0.0
    on_diag = xx == ii
    if on_diag.any():
        report.max_imag_diagonal = float(np.max(np.abs((ctxE.s_minus_one * E[on_diag]).imag)))
    return report
