"""Command line front end: ``quantcat <command> [options]``.

Options may also come from a JSON config file (``--config``); flags win over
config keys, which win over the built-in defaults.  The default output
directory is taken from ``QUANTCAT_OUT`` when set.

Exit status: 0 when every check passes, 1 when any bound check fails,
2 on configuration or input errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path
from typing import Callable, Dict, List, Sequence

from .composite import factor_square_free
from .errors import QuantCatError
from .finite_field import CatMap, is_odd_prime
from . import verify

log = logging.getLogger("quantcat")

OUT_ENV = "QUANTCAT_OUT"
EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

DEFAULTS = {
    "matrix": "3,2,4,3",
    "primes": "3..200",
    "N": "15,21,33",
    "sample": None,
    "seed": 0,
    "tol": verify.SUP_TOL,
    "out": None,
    "workers": 1,
    "trials": 100,
    "bins": 20,
    "hist_max": 2.0,
}
COMMAND_PRIMES = {
    "verify-rep": "3,5,7,13,17",
    "eigenbasis": "3..31",
    "histogram": "3..31",
}


class ConfigError(QuantCatError):
    pass


def parse_primes(spec) -> List[int]:
    """'lo..hi' (primes in the closed range) or a comma list; p = 2 is skipped."""
    if isinstance(spec, int):
        spec = [spec]
    if isinstance(spec, str):
        spec = spec.strip()
        if ".." in spec:
            lo, _, hi = spec.partition("..")
            try:
                lo, hi = int(lo), int(hi)
            except ValueError:
                raise ConfigError(f"bad prime range {spec!r}") from None
            if lo <= 2 <= hi:
                log.warning("p=2 is excluded (odd primes only)")
            return [n for n in range(max(lo, 3), hi + 1) if is_odd_prime(n)]
        spec = [s for s in spec.split(",") if s.strip()]
    out = []
    for item in spec:
        try:
            n = int(item)
        except (TypeError, ValueError):
            raise ConfigError(f"bad prime {item!r}") from None
        if n == 2:
            log.warning("p=2 is excluded (odd primes only)")
            continue
        if not is_odd_prime(n):
            raise ConfigError(f"{n} is not an odd prime")
        out.append(n)
    return sorted(set(out))


def parse_moduli(spec) -> List[int]:
    if isinstance(spec, int):
        spec = [spec]
    if isinstance(spec, str):
        spec = [s for s in spec.split(",") if s.strip()]
    out = []
    for item in spec:
        try:
            N = int(item)
        except (TypeError, ValueError):
            raise ConfigError(f"bad modulus {item!r}") from None
        factor_square_free(N)  # raises UnsupportedModulus, e.g. for N = 9
        out.append(N)
    return sorted(set(out))


def parse_matrix(spec) -> CatMap:
    if isinstance(spec, (list, tuple)):
        if len(spec) != 4:
            raise ConfigError(f"matrix needs 4 entries, got {len(spec)}")
        return CatMap(*(int(v) for v in spec))
    try:
        return CatMap.parse(str(spec))
    except ValueError as exc:
        if isinstance(exc, QuantCatError):
            raise
        raise ConfigError(f"bad matrix {spec!r}: {exc}") from None


def _common(parser: argparse.ArgumentParser):
    s = argparse.SUPPRESS
    parser.add_argument("--config", default=s, help="JSON file with option defaults")
    parser.add_argument("--matrix", default=s, help="cat map entries a,b,c,d (default 3,2,4,3)")
    parser.add_argument("--primes", default=s, help="lo..hi or a comma list of odd primes")
    parser.add_argument("--N", dest="N", default=s, help="comma list of square-free moduli")
    parser.add_argument("--sample", type=int, default=s,
                        help="sample k triples instead of exhaustive sweeps")
    parser.add_argument("--seed", type=int, default=s)
    parser.add_argument("--tol", type=float, default=s, help="sup-norm check tolerance")
    parser.add_argument("--out", default=s, help=f"output directory (default ${OUT_ENV} or ./quantcat-out)")
    parser.add_argument("--workers", type=int, default=s, help="process pool size")
    parser.add_argument("--trials", type=int, default=s, help="random pairs for verify-rep")
    parser.add_argument("--bins", default=s, help="histogram bin count or comma list of edges")
    parser.add_argument("--hist-max", dest="hist_max", type=float, default=s)
    parser.add_argument("-v", "--verbose", action="store_true", default=s, help="debug logging")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quantcat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "classify": "classify primes as inert / split / ramified",
        "verify-supnorm": "sup-norm bounds for Hecke eigenbases",
        "verify-expsums": "exponential-sum bounds and projection formula (inert primes)",
        "verify-rep": "unitarity, multiplicativity, delta action, traces",
        "eigenbasis": "dump eigenbases as JSON",
        "composite": "tensor-product eigenbases for square-free N",
        "histogram": "value distribution |phi(x)| of eigenfunctions",
    }
    for name, text in helps.items():
        _common(sub.add_parser(name, help=text, description=text))
    return parser


def resolve(ns: argparse.Namespace) -> Dict:
    cfg = dict(DEFAULTS)
    cfg["primes"] = COMMAND_PRIMES.get(ns.command, cfg["primes"])
    flags = vars(ns)
    if "config" in flags:
        try:
            with open(flags["config"], encoding="utf-8") as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {flags['config']}: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg.update(loaded)
    cfg.update({k: v for k, v in flags.items() if k in DEFAULTS})
    cfg["command"] = ns.command
    cfg["verbose"] = flags.get("verbose", False)

    cfg["A"] = parse_matrix(cfg["matrix"])
    cfg["matrix"] = ",".join(str(v) for v in cfg["A"].entries)
    if ns.command == "composite":
        cfg["N"] = parse_moduli(cfg["N"])
    else:
        cfg["primes"] = parse_primes(cfg["primes"])
    if cfg["out"] is None:
        cfg["out"] = os.environ.get(OUT_ENV) or "quantcat-out"
    cfg["out"] = Path(cfg["out"])
    bins = cfg["bins"]
    if isinstance(bins, str):
        parts = [b for b in bins.split(",") if b.strip()]
        try:
            bins = int(parts[0]) if len(parts) == 1 else [float(b) for b in parts]
        except (ValueError, IndexError):
            raise ConfigError(f"bad bins {cfg['bins']!r}") from None
    if isinstance(bins, int) and bins < 1 or isinstance(bins, list) and len(bins) < 2:
        raise ConfigError("need at least one histogram bin")
    cfg["bins"] = bins
    for key in ("workers", "trials"):
        if int(cfg[key]) < 1:
            raise ConfigError(f"{key} must be positive")
    if cfg["sample"] is not None and int(cfg["sample"]) < 1:
        raise ConfigError("sample must be positive")
    return cfg


def _map(fn: Callable, items: Sequence, workers: int) -> list:
    """Ordered map, optionally over a process pool."""
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _flatten(chunks):
    return [row for chunk in chunks for row in chunk]


def _finish(name: str, rows, cfg, path: Path) -> int:
    failed = [r for r in rows if not r.ok]
    print(f"{name}: {len(rows)} rows, {len(failed)} failed -> {path}")
    for r in failed[:20]:
        print(f"  FAIL p={r.modulus} {r.check} {r.route} char={r.character} vec={r.vector} "
              f"{r.quantity}={r.value!r} {r.relation} {r.bound_formula}")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_classify(cfg) -> int:
    rows = verify.classify_rows(cfg["A"], cfg["primes"])
    path = verify.write_text(cfg["out"] / "classify.csv", verify.rows_to_csv(rows, cfg["matrix"]))
    for r in rows:
        print(f"{r.modulus:>6}  {r.classification:<9}{'  upper-triangular' if r.upper_triangular else ''}")
    print(f"-> {path}")
    return EXIT_OK


def cmd_verify_supnorm(cfg) -> int:
    fn = partial(verify.supnorm_rows, cfg["A"], tol=float(cfg["tol"]))
    rows = _flatten(_map(fn, cfg["primes"], int(cfg["workers"])))
    path = verify.write_text(cfg["out"] / "supnorm.csv", verify.rows_to_csv(rows, cfg["matrix"]))
    return _finish("verify-supnorm", rows, cfg, path)


def cmd_verify_expsums(cfg) -> int:
    sample = None if cfg["sample"] is None else int(cfg["sample"])
    fn = partial(verify.expsum_rows, cfg["A"], sample=sample, seed=int(cfg["seed"]))
    rows = _flatten(_map(fn, cfg["primes"], int(cfg["workers"])))
    path = verify.write_text(cfg["out"] / "expsums.csv", verify.rows_to_csv(rows, cfg["matrix"]))
    return _finish("verify-expsums", rows, cfg, path)


def cmd_verify_rep(cfg) -> int:
    fn = partial(verify.rep_rows, trials=int(cfg["trials"]), seed=int(cfg["seed"]))
    results = _map(fn, cfg["primes"], int(cfg["workers"]))
    rows = _flatten(r for r, _ in results)
    traces = _flatten(t for _, t in results)
    path = verify.write_text(cfg["out"] / "rep.csv", verify.rows_to_csv(rows, ""))
    tpath = verify.write_text(cfg["out"] / "traces.csv", verify.rows_to_csv(traces, ""))
    code = _finish("verify-rep", rows, cfg, path)
    return max(code, _finish("traces", traces, cfg, tpath))


def _eigenbasis_file(A: CatMap, out: str, p: int) -> str:
    doc = verify.eigenbasis_document(A, p)
    path = verify.write_text(Path(out) / "eigenbasis" / f"p{p:05d}.json", verify.dump_json(doc))
    return str(path)


def cmd_eigenbasis(cfg) -> int:
    fn = partial(_eigenbasis_file, cfg["A"], str(cfg["out"]))
    for path in _map(fn, cfg["primes"], int(cfg["workers"])):
        print(path)
    return EXIT_OK


def cmd_composite(cfg) -> int:
    fn = partial(verify.composite_rows, cfg["A"], tol=float(cfg["tol"]))
    rows = _flatten(_map(fn, cfg["N"], int(cfg["workers"])))
    path = verify.write_text(cfg["out"] / "composite.csv", verify.rows_to_csv(rows, cfg["matrix"]))
    return _finish("composite", rows, cfg, path)


def cmd_histogram(cfg) -> int:
    fn = partial(verify.histogram_rows, cfg["A"], bins=cfg["bins"], upper=float(cfg["hist_max"]))
    rows = _flatten(_map(fn, cfg["primes"], int(cfg["workers"])))
    path = verify.write_text(cfg["out"] / "histogram.csv", verify.histogram_csv(rows, cfg["matrix"]))
    print(f"histogram: {len(rows)} rows -> {path}")
    return EXIT_OK


COMMANDS = {
    "classify": cmd_classify,
    "verify-supnorm": cmd_verify_supnorm,
    "verify-expsums": cmd_verify_expsums,
    "verify-rep": cmd_verify_rep,
    "eigenbasis": cmd_eigenbasis,
    "composite": cmd_composite,
    "histogram": cmd_histogram,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors already
        return int(exc.code or 0)
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s",
                        level=logging.DEBUG if getattr(ns, "verbose", False) else logging.INFO)
    try:
        cfg = resolve(ns)
    except QuantCatError as exc:
        print(f"quantcat: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if ns.command != "composite" and not cfg["primes"]:
        log.warning("no primes selected")
    t0 = time.perf_counter()
    try:
        code = COMMANDS[ns.command](cfg)
    except QuantCatError as exc:
        print(f"quantcat: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    log.info("%s finished in %.2fs", ns.command, time.perf_counter() - t0)
    return code


if __name__ == "__main__":
    sys.exit(main())
