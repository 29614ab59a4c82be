"""Verification suites and report serialization used by the CLI.

Every suite returns a list of ``ReportRow``; ``write_rows`` turns them into
CSV with a fixed header.  Floats are written with 12 significant digits and
eigenbasis dumps are rounded to 12 decimals so repeated runs are
byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from . import __version__
from .composite import CompositeContext, composite_eigenbasis
from .exp_sums import BOUNDS, ExpSumContext, projection_via_exp_sum, verify_bounds
from .finite_field import CatMap, Kind, classify_prime, identity, minus_identity, prime_context
from .hecke import (
    PHASE_CONVENTION,
    centralizer,
    characters,
    eigenspaces,
    gram_matrix,
    projection_matrix,
    ramified_closed_form,
    spans_agree,
    split_closed_form,
)
from .weil import (
    QuantumState,
    check_multiplicativity,
    delta_action,
    random_sl2,
    trace_unitary,
    unitary_matrix,
)

log = logging.getLogger(__name__)

SUP_TOL = 1e-8
REP_TOL = 1e-9
ORACLE_TOL = 1e-9
EXHAUSTIVE_LIMIT = 61
DEFAULT_SAMPLES = 10_000
FORMAT_VERSION = 1

HEADER = ["matrix", "modulus", "classification", "upper_triangular", "check", "route",
          "character", "vector", "dimension", "quantity", "value", "relation",
          "bound_formula", "bound", "margin", "pass", "note"]


@dataclass
class ReportRow:
    modulus: int
    classification: str
    upper_triangular: object
    check: str
    quantity: str = ""
    value: Optional[float] = None
    relation: str = "info"  # "<=", ">=", "==", "<", or "info"
    bound_formula: str = ""
    bound: Optional[float] = None
    tol: float = 0.0
    route: str = ""
    character: str = ""
    vector: str = ""
    dimension: object = ""
    note: str = ""
    passed: Optional[bool] = field(default=None)

    def __post_init__(self):
        if self.passed is None and self.relation != "info":
            self.passed = _holds(self.value, self.relation, self.bound, self.tol)

    @property
    def margin(self) -> Optional[float]:
        if self.value is None or self.bound is None:
            return None
        if self.relation in ("<=", "<"):
            return self.bound - self.value
        if self.relation == ">=":
            return self.value - self.bound
        if self.relation == "==":
            return -abs(self.value - self.bound)
        return None

    @property
    def ok(self) -> bool:
        return self.passed is not False


def _holds(value, relation, bound, tol) -> bool:
    if value is None or bound is None or not math.isfinite(value):
        return False
    if relation == "<=":
        return value <= bound + tol
    if relation == "<":
        return value < bound
    if relation == ">=":
        return value >= bound - tol
    if relation == "==":
        return abs(value - bound) <= tol
    raise ValueError(relation)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if v == 0:
            return "0"
        return format(v, ".12g")
    return str(v)


def rows_to_csv(rows: Sequence[ReportRow], matrix: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for r in rows:
        passed = "n/a" if r.passed is None else _fmt(bool(r.passed))
        w.writerow([matrix, r.modulus, r.classification, _fmt(r.upper_triangular), r.check,
                    r.route, r.character, r.vector, r.dimension, r.quantity, _fmt(r.value),
                    r.relation, r.bound_formula, _fmt(r.bound), _fmt(r.margin), passed, r.note])
    return buf.getvalue()


def write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def _char_label(index) -> str:
    if isinstance(index, tuple):
        return "(" + ",".join(str(v) for v in index) + ")"
    return str(index)


# -- classify ------------------------------------------------------------------

def classify_rows(A: CatMap, primes: Iterable[int]) -> List[ReportRow]:
    rows = []
    for p in primes:
        c = classify_prime(A, p)
        rows.append(ReportRow(p, c.kind.value, c.upper_triangular, "classify",
                              quantity="legendre(tr^2-4)",
                              value=float({"inert": -1, "split": 1, "ramified": 0}[c.kind.value])))
    return rows


# -- sup norms -----------------------------------------------------------------

def supnorm_rows(A: CatMap, p: int, tol: float = SUP_TOL) -> List[ReportRow]:
    """Bound checks for one prime: projection route plus closed forms."""
    t0 = time.perf_counter()
    ctx = prime_context(p)
    G = centralizer(A, ctx)
    cls = G.classification
    kind, ut = cls.kind, cls.upper_triangular
    base = dict(modulus=p, classification=kind.value, upper_triangular=ut)
    rows: List[ReportRow] = []
    results = eigenspaces(G)

    if kind is Kind.INERT:
        bound, formula = 2 / math.sqrt(1 + 1 / p), "2/sqrt(1+1/p)"
    elif not ut and kind is Kind.SPLIT:
        bound, formula = 2.0, "2"
    elif not ut:
        bound, formula = math.sqrt(2), "sqrt(2)"
    else:
        bound, formula = None, ""

    for res in results:
        for j, phi in enumerate(res.basis):
            s = phi.sup_norm()
            rows.append(ReportRow(**base, check="sup-norm", route="projection",
                                  character=_char_label(res.character.index), vector=str(j),
                                  dimension=res.dimension, quantity="sup_norm", value=s,
                                  relation="<=" if bound is not None else "info",
                                  bound_formula=formula, bound=bound, tol=tol))
            if kind is Kind.SPLIT and not ut:
                rows.append(ReportRow(**base, check="sup-norm-weil", route="projection",
                                      character=_char_label(res.character.index), vector=str(j),
                                      dimension=res.dimension, quantity="sup_norm", value=s,
                                      relation="<=", bound_formula="2*sqrt(p/(p-1)) (Weil bound)",
                                      bound=2 * math.sqrt(p / (p - 1)), tol=tol))
        if res.dimension:
            rows.append(ReportRow(**base, check="eigen-relation", route="projection",
                                  character=_char_label(res.character.index),
                                  dimension=res.dimension, quantity="max|U(B)phi-nu(B)phi|",
                                  value=res.eigen_defect(G), relation="<",
                                  bound_formula="1e-9", bound=REP_TOL))
        if res.dimension == 2 and bound is not None:
            rows.append(ReportRow(**base, check="sup-norm-extremal", route="projection",
                                  character=_char_label(res.character.index), dimension=2,
                                  quantity="max sup over unit vectors of V_nu",
                                  value=res.extremal_sup_norm(), relation="<=",
                                  bound_formula=formula, bound=bound, tol=tol))

    dims = [r.dimension for r in results]
    rows.append(ReportRow(**base, check="dimension-sum", quantity="sum d_nu", value=float(sum(dims)),
                          relation="==", bound_formula="p", bound=float(p), tol=0.0))
    if kind is Kind.INERT:
        rows.append(ReportRow(**base, check="dimension-zero-count", quantity="#{nu: d_nu=0}",
                              value=float(dims.count(0)), relation="==", bound_formula="1",
                              bound=1.0, tol=0.0))
        rows.append(ReportRow(**base, check="dimension-max", quantity="max d_nu",
                              value=float(max(dims)), relation="<=", bound_formula="1",
                              bound=1.0, tol=0.0))

    if kind is Kind.RAMIFIED:
        closed = ramified_closed_form(A, ctx, G)
        rows += _closed_rows(closed, base, ut, p, "ramified", tol=tol)
        rows.append(_span_row(results, closed, base, "closed-form"))
    elif kind is Kind.SPLIT:
        closed = split_closed_form(A, ctx, G)
        route = "closed-form" if ut else "closed-form-experimental"
        rows += _closed_rows(closed, base, ut, p, "split", route, tol=tol)
        rows.append(_span_row(results, closed, base, route))

    if ut:
        best = max(s for r in results for s in r.sup_norms)
        rows.append(ReportRow(**base, check="lower-bound-witness", route="projection",
                              quantity="max sup_norm over eigenbasis", value=best, relation=">=",
                              bound_formula="sqrt(p/2)", bound=math.sqrt(p / 2), tol=tol))
    log.info("supnorm p=%d (%s) done in %.2fs", p, kind.value, time.perf_counter() - t0)
    return rows


def _closed_rows(closed, base, ut, p, kind, route="closed-form", tol=SUP_TOL):
    rows = []
    for res in closed:
        for j, (label, phi) in enumerate(zip(res.label, res.basis)):
            s = phi.sup_norm()
            if kind == "ramified":
                if label == "phi_0":
                    bound, formula, rel = (math.sqrt(p), "sqrt(p)", "==") if ut else (1.0, "1", "==")
                elif ut:
                    bound, formula, rel = math.sqrt(p / 2), "sqrt(p/2)", "=="
                else:
                    bound, formula, rel = math.sqrt(2), "sqrt(2)", "<="
            else:
                if label == "phi_0":
                    bound, formula, rel = (math.sqrt(p), "sqrt(p)", "==") if ut else (1.0, "1", "==")
                elif ut:
                    bound, formula, rel = math.sqrt(p / (p - 1)), "sqrt(p/(p-1))", "=="
                else:
                    bound, formula, rel = 2.0, "2", "<="
            rows.append(ReportRow(**base, check="sup-norm", route=route,
                                  character=_char_label(res.character.index), vector=label,
                                  dimension=res.dimension, quantity="sup_norm", value=s,
                                  relation=rel, bound_formula=formula, bound=bound, tol=tol))
        if res.dimension == 2:
            rows.append(ReportRow(**base, check="sup-norm-extremal", route=route,
                                  character=_char_label(res.character.index), dimension=2,
                                  quantity="max sup over unit vectors of V_nu",
                                  value=res.extremal_sup_norm(), relation="info",
                                  bound_formula="sqrt(p) ceiling for unit vectors",
                                  bound=math.sqrt(p)))
    return rows


def _span_row(projected, closed, base, route):
    _, angle = spans_agree(projected, closed)
    return ReportRow(**base, check="span-agreement", route=route,
                     quantity="max principal angle", value=angle, relation="<",
                     bound_formula="1e-6", bound=1e-6)


# -- exponential sums ----------------------------------------------------------

def expsum_rows(A: CatMap, p: int, sample: Optional[int] = None, seed: int = 0) -> List[ReportRow]:
    t0 = time.perf_counter()
    ctx = prime_context(p)
    c = classify_prime(A, p)
    base = dict(modulus=p, classification=c.kind.value, upper_triangular=c.upper_triangular)
    if c.kind is not Kind.INERT:
        return [ReportRow(**base, check="exp-sum-bound", note="not applicable (prime not inert)")]
    G = centralizer(A, ctx)
    E = ExpSumContext(G)
    if sample is None and p <= EXHAUSTIVE_LIMIT:
        rep = verify_bounds(E, "exhaustive")
        note = "mode=exhaustive"
    else:
        k = sample or DEFAULT_SAMPLES
        rep = verify_bounds(E, "sample", samples=k, seed=seed)
        note = f"mode=sample;k={k};seed={seed}"
    rows = []
    for name, formula in (("generic", "4 (x != +-i)"), ("diagonal", "3 (x = +-i)"),
                          ("origin", "2 (i = x = 0)")):
        rows.append(ReportRow(**base, check="exp-sum-bound", route=name,
                              quantity="max |E|/sqrt(p)", value=rep.max_ratio[name],
                              relation="<=", bound_formula=formula, bound=BOUNDS[name],
                              tol=1e-8, dimension=rep.count[name], note=note))
    rows.append(ReportRow(**base, check="diagonal-reality", quantity="max |Im(S_r(-1,p) E(i,i))|",
                          value=rep.max_imag_diagonal, relation="<", bound_formula="1e-9",
                          bound=1e-9, note=note))
    if p <= EXHAUSTIVE_LIMIT:
        worst = 0.0
        for nu in characters(G):
            P = projection_matrix(G, nu)
            for i in range(p):
                rec = projection_via_exp_sum(E, nu, i).values
                worst = max(worst, float(np.max(np.abs(rec - P[:, i]))))
        rows.append(ReportRow(**base, check="projection-oracle",
                              quantity="max |exp-sum formula - operator projection|",
                              value=worst, relation="<", bound_formula="1e-9",
                              bound=ORACLE_TOL, note="exhaustive over (nu, i)"))
    log.info("expsums p=%d done in %.2fs", p, time.perf_counter() - t0)
    return rows


# -- representation ------------------------------------------------------------

def _trace_samples(p: int, seed: int, generic: int = 50, special: int = 10):
    rng = np.random.default_rng(seed)
    out = []
    while sum(1 for _, tag in out if tag == "c!=0,a+d!=2") < generic:
        M = random_sl2(rng, p, require_c_nonzero=True)
        if (M[0] + M[3]) % p != 2:
            out.append((M, "c!=0,a+d!=2"))
    seen = set()
    for _ in range(special * 20):
        if len(seen) >= min(special, p * (p - 1)):
            break
        a = int(rng.integers(0, p))
        c = int(rng.integers(1, p))
        d = (2 - a) % p
        b = (a * d - 1) * pow(c, -1, p) % p
        if (a, b, c, d) not in seen:
            seen.add((a, b, c, d))
            out.append(((a, b, c, d), "c!=0,a+d=2"))
    return out


def rep_rows(p: int, trials: int = 100, seed: int = 0):
    """Unitarity, multiplicativity, delta action and trace checks.

    Returns ``(rows, trace_rows)``.
    """
    ctx = prime_context(p)
    base = dict(modulus=p, classification="", upper_triangular="")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        U = unitary_matrix(ctx, random_sl2(rng, p))
        worst = max(worst, float(np.max(np.abs(U.conj().T @ U - np.eye(p)))))
    rows = [ReportRow(**base, check="unitarity", quantity="max |U*U - I|", value=worst,
                      relation="<", bound_formula="1e-10*p", bound=1e-10 * p,
                      note=f"trials={trials};seed={seed}")]
    mult = check_multiplicativity(ctx, trials, seed)
    rows.append(ReportRow(**base, check="multiplicativity", quantity="max |U(M1M2)-U(M1)U(M2)|",
                          value=mult.max_deviation, relation="<", bound_formula="1e-9",
                          bound=REP_TOL, note=f"trials={trials};seed={seed}"))
    worst = 0.0
    mats = []
    if p <= 13:
        for a in range(p):
            for b in range(p):
                for c in range(1, p):
                    for d in range(p):
                        if (a * d - b * c) % p == 1:
                            mats.append((a, b, c, d))
        note = "exhaustive"
    else:
        mats = [random_sl2(rng, p, require_c_nonzero=True) for _ in range(50)]
        note = f"sample=50;seed={seed}"
    for M in mats:
        U = unitary_matrix(ctx, M)
        for i in range(p):
            worst = max(worst, float(np.max(np.abs(U[:, i] - delta_action(ctx, M, i).values))))
    rows.append(ReportRow(**base, check="delta-action", quantity="max |closed form - U(M) delta_i|",
                          value=worst, relation="<", bound_formula="1e-10", bound=1e-10, note=note))

    trace_rows = [ReportRow(**base, check="trace", vector="I", quantity="tr U(I)",
                            value=trace_unitary(ctx, identity()).real, relation="==",
                            bound_formula="p", bound=float(p), tol=REP_TOL)]
    trace_rows.append(ReportRow(**base, check="trace", vector="-I", quantity="|tr U(-I)|",
                                value=abs(trace_unitary(ctx, minus_identity(p))), relation="==",
                                bound_formula="1", bound=1.0, tol=REP_TOL))
    for M, tag in _trace_samples(p, seed):
        tr = trace_unitary(ctx, M)
        label = "(" + ",".join(map(str, M)) + ")"
        if tag == "c!=0,a+d!=2":
            trace_rows.append(ReportRow(**base, check="trace", vector=label, quantity="|tr U(M)|",
                                        value=abs(tr), relation="==", bound_formula="1",
                                        bound=1.0, tol=REP_TOL, note=tag))
        else:
            trace_rows.append(ReportRow(**base, check="trace", vector=label, quantity="|tr U(M)|",
                                        value=abs(tr), note=tag + " (telemetry)"))
    return rows, trace_rows


# -- composite -----------------------------------------------------------------

def composite_rows(A: CatMap, N: int, tol: float = SUP_TOL) -> List[ReportRow]:
    cctx = CompositeContext(N)
    basis = composite_eigenbasis(A, cctx)
    kinds = "x".join(f"{c.kind.value}{'-ut' if c.upper_triangular else ''}"
                     for c in basis.classifications)
    base = dict(modulus=N, classification=kinds, upper_triangular=any(
        c.upper_triangular for c in basis.classifications))
    rows = []
    gram = gram_matrix(basis.states())
    rows.append(ReportRow(**base, check="orthonormality", quantity="max |Gram - I|",
                          value=float(np.max(np.abs(gram - np.eye(N)))), relation="<",
                          bound_formula="1e-8", bound=1e-8))
    rows.append(ReportRow(**base, check="basis-size", quantity="#vectors",
                          value=float(len(basis.vectors)), relation="==", bound_formula="N",
                          bound=float(N), tol=0.0))
    bound = basis.product_bound if basis.product_bound_applicable else None
    for j, v in enumerate(basis.vectors):
        label = ";".join(f"{_char_label(ci)}/{pos}" for ci, pos in v.labels)
        rows.append(ReportRow(**base, check="product-identity", vector=str(j), character=label,
                              quantity="|sup - prod factor sups|", value=v.product_deviation,
                              relation="<=", bound_formula="1e-9", bound=1e-9))
        rows.append(ReportRow(**base, check="sup-norm", vector=str(j), character=label,
                              quantity="sup_norm", value=v.sup_norm,
                              relation="<=" if bound is not None else "info",
                              bound_formula=f"2^k = {2 ** cctx.k}", bound=bound, tol=tol))
    return rows


# -- eigenbasis dumps ------------------------------------------------------------

def _r(v: float) -> float:
    v = round(float(v), 12)
    return 0.0 if v == 0 else v


def eigenbasis_document(A: CatMap, p: int) -> Dict:
    ctx = prime_context(p)
    G = centralizer(A, ctx)
    doc = {
        "format_version": FORMAT_VERSION,
        "generator": f"quantcat {__version__}",
        "matrix": list(A.entries),
        "p": p,
        "r": ctx.r,
        "D": ctx.D,
        "M": list(G.M),
        "classification": G.kind.value,
        "upper_triangular": G.classification.upper_triangular,
        "phase_convention": PHASE_CONVENTION,
        "eigenspaces": [],
    }
    for res in eigenspaces(G):
        idx = res.character.index
        doc["eigenspaces"].append({
            "character": list(idx) if isinstance(idx, tuple) else idx,
            "dimension": res.dimension,
            "vectors": [{"sup_norm": _r(phi.sup_norm()),
                         "values": [[_r(z.real), _r(z.imag)] for z in phi.values]}
                        for phi in res.basis],
        })
    return doc


def dump_json(doc: Dict) -> str:
    return json.dumps(doc, separators=(",", ":"), ensure_ascii=False) + "\n"


def load_eigenbasis(path) -> List[QuantumState]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    p = doc["p"]
    out = []
    for space in doc["eigenspaces"]:
        for vec in space["vectors"]:
            vals = np.array([complex(re, im) for re, im in vec["values"]])
            out.append(QuantumState(vals, p))
    return out


# -- histograms ----------------------------------------------------------------

HIST_HEADER = ["matrix", "p", "character", "vector", "bin", "bin_lo", "bin_hi", "count"]


def histogram_rows(A: CatMap, p: int, bins=20, upper: float = 2.0) -> List[list]:
    """|phi(x)| counts per eigenfunction; ``bins`` is a count on [0, upper] or a list of edges.

    Values outside the range are clamped into the end bins so each
    eigenfunction contributes exactly p counts.
    """
    if isinstance(bins, int):
        edges = np.linspace(0.0, upper, bins + 1)
    else:
        edges = np.asarray(sorted(float(b) for b in bins))
    G = centralizer(A, prime_context(p))
    nb = len(edges) - 1
    rows = []
    for res in eigenspaces(G):
        for j, phi in enumerate(res.basis):
            vals = np.clip(np.abs(phi.values), edges[0], edges[-1])
            counts, _ = np.histogram(vals, bins=edges)
            for b in range(nb):
                rows.append([p, _char_label(res.character.index), j, b,
                             _fmt(float(edges[b])), _fmt(float(edges[b + 1])), int(counts[b])])
    return rows


def histogram_csv(rows: Sequence[list], matrix: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HIST_HEADER)
    for r in rows:
        w.writerow([matrix] + list(r))
    return buf.getvalue()
