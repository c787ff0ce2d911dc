"""Command-line front end: ``tracelab <subcommand> [options]``.

Each subcommand validates its numeric arguments, calls one library routine and
writes the result as JSON (one object, or JSON lines for sweeps). Exit codes:
0 success, 2 invalid input, 3 capacity exceeded, 1 any other library error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import bilinear, correl, hbdecomp, primesums, satotate, weights
from .cache import cache_dir_from_env
from .errors import CapacityError, TracelabError, ValidationError
from .ffield import build_context, is_prime, sieve_primes
from .wspec import parse_spec, spec_hash


@dataclass
class RunConfig:
    command: str
    seed: int | None = None
    threads: int | None = None
    output: str | None = None
    cache_dir: Path | None = None
    params: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# validation (runs before any table is built)


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise ValidationError(msg)


def _check_prime(p: int) -> None:
    _need(p >= 3 and is_prime(p), f"--p must be an odd prime, got {p}")


def _validate(args: argparse.Namespace) -> None:
    v = vars(args)
    if v.get("p") is not None:
        _check_prime(args.p)
    if v.get("threads") is not None:
        _need(args.threads >= 1, f"--threads must be >= 1, got {args.threads}")
    for name in ("X",):
        if v.get(name) is not None:
            vals = v[name] if isinstance(v[name], list) else [v[name]]
            _need(all(x >= 2 for x in vals), f"--X must be >= 2, got {v[name]}")
    if v.get("delta") is not None and args.command in ("smoothed-sum", "eisenstein"):
        _need(0 < args.delta < 1, f"--delta must lie in (0, 1), got {args.delta}")
    if v.get("spec") is not None:
        args.spec_obj = parse_spec(args.spec)


# ---------------------------------------------------------------------------
# helpers


def _num(z: complex) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}


def _fmt(z: complex, digits: int) -> str:
    z = complex(z)
    if abs(z.imag) < 10.0**-digits:
        return f"{z.real:.{digits}f}"
    return f"{z.real:.{digits}f}{z.imag:+.{digits}f}i"


def _ctx(cfg: RunConfig, p: int):
    return build_context(p, cache_dir=cfg.cache_dir)


def _table(cfg: RunConfig, args, detect: bool = False, tolerance: float = 0.1):
    return weights.bulk_eval(_ctx(cfg, args.p), args.spec_obj, detect=detect, tolerance=tolerance, cache_dir=cfg.cache_dir)


class _Out:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.fh = open(cfg.output, "w") if cfg.output else sys.stdout

    def obj(self, d: dict) -> None:
        d = {"command": self.cfg.command, **d, "seed": self.cfg.seed}
        self.fh.write(json.dumps(d) + "\n")

    def text(self, s: str) -> None:
        self.fh.write(s + "\n")

    def close(self) -> None:
        if self.fh is not sys.stdout:
            self.fh.close()


# ---------------------------------------------------------------------------
# subcommands


def cmd_sieve(cfg, args, out):
    _need(args.limit >= 2, f"--limit must be >= 2, got {args.limit}")
    out.text(" ".join(str(q) for q in sieve_primes(args.limit)))


def cmd_weight_eval(cfg, args, out):
    table = _table(cfg, args)
    out.text(_fmt(table(args.at), args.digits))


def cmd_weight_table(cfg, args, out):
    table = _table(cfg, args)
    path = Path(args.out_table) if args.out_table else (cfg.cache_dir or cache_dir_from_env()) / (
        f"w-{args.p}-{spec_hash(args.spec_obj):016x}.tlwt"
    )
    path.parent.mkdir(parents=True, exist_ok=True)
    weights.save_table(table, path)
    out.obj(
        {
            "p": args.p,
            "spec": table.label,
            "hash": f"{spec_hash(args.spec_obj):016x}",
            "conductor": table.conductor_estimate,
            "path": str(path),
            "sup": float(np.max(np.abs(table.values))),
        }
    )


def _emit_values(out, name, vals, at):
    if at is not None:
        out.obj({name: int(at), "value": _num(vals[int(at) % len(vals)])})
        return
    for k, z in enumerate(vals):
        out.obj({name: k, "value": _num(z)})


def cmd_fourier(cfg, args, out):
    _emit_values(out, "y", weights.fourier_transform(_table(cfg, args)).values, args.at)


def cmd_mellin(cfg, args, out):
    _emit_values(out, "j", weights.mellin_transform(_table(cfg, args)), args.at)


def cmd_detect(cfg, args, out):
    _need(0 < args.tolerance < 1, f"--tolerance must lie in (0, 1), got {args.tolerance}")
    table = _table(cfg, args)
    w = weights.detect_exceptional(table, args.tolerance)
    d = None if w is None else {"j": w.j, "b": w.b, "c": _num(w.c), "concentration": w.concentration}
    out.obj({"p": args.p, "spec": table.label, "exceptional": w is not None, "witness": d})


def _sum_reports(cfg, args, out, fn):
    table = _table(cfg, args)
    reports = [fn(table, X) for X in args.X]
    for r in reports:
        out.obj({k: v for k, v in r.__dict__.items()})
    if args.csv:
        primesums.write_csv(reports, args.csv)


def cmd_prime_sum(cfg, args, out):
    _sum_reports(cfg, args, out, primesums.prime_sum)


def cmd_moebius_sum(cfg, args, out):
    fn = primesums.vonmangoldt_sum if args.kind == "vonmangoldt" else primesums.mobius_sum
    _sum_reports(cfg, args, out, fn)


def cmd_smoothed_sum(cfg, args, out):
    V = primesums.make_bump(args.delta)
    _sum_reports(cfg, args, out, lambda t, X: primesums.smoothed_report(t, V, X))


def cmd_eisenstein(cfg, args, out):
    V = primesums.make_bump(args.delta)
    _sum_reports(cfg, args, out, lambda t, X: primesums.eisenstein_report(t, V, X, args.t))


def cmd_correlation_scan(cfg, args, out):
    _need(args.threshold > 0, f"--threshold must be positive, got {args.threshold}")
    table = _table(cfg, args)
    max_p = args.p if args.force else correl.SCAN_MAX_P
    r = correl.paucity_scan(table, args.threshold, max_p=max_p, threads=cfg.threads)
    d = json.loads(r.to_json())
    d["count"] = r.count
    out.obj(d)


def cmd_bilinear(cfg, args, out):
    _need(args.M >= 1 and args.N >= 1, "--M and --N must be >= 1")
    table = _table(cfg, args)
    rng = np.random.default_rng(cfg.seed)
    gen = bilinear.random_units if args.coeffs == "units" else bilinear.random_signs
    inst = bilinear.BilinearInstance(table, gen(rng, args.M), gen(rng, args.N), args.M, args.N)
    out.obj(bilinear.type2_report(inst, cfg.seed).__dict__)


def cmd_hb_check(cfg, args, out):
    _need(args.J >= 1, f"--J must be >= 1, got {args.J}")
    _need(args.Xhb >= 1, f"--X must be >= 1, got {args.Xhb}")
    nmax = args.nmax if args.nmax is not None else math.ceil(2 * args.Xhb) - 1
    _need(1 <= nmax < 2 * args.Xhb, f"--nmax must lie in [1, 2X), got {nmax}")
    lam_bad, mu_bad, lam_err = [], [], 0.0
    for n in range(1, nmax + 1):
        e = abs(hbdecomp.heath_brown_lambda(n, args.J, args.Xhb) - hbdecomp.von_mangoldt(n))
        lam_err = max(lam_err, e)
        if e > 1e-9:
            lam_bad.append(n)
        if hbdecomp.heath_brown_mu(n, args.J, args.Xhb) != hbdecomp.mobius(n):
            mu_bad.append(n)
    out.obj(
        {
            "X": args.Xhb,
            "J": args.J,
            "nmax": nmax,
            "lambda_max_error": lam_err,
            "lambda_failures": lam_bad[:50],
            "mu_failures": len(mu_bad),
            "mu_first_failures": mu_bad[:50],
            "mu_guaranteed_upto": hbdecomp.mu_identity_range(args.J, args.Xhb),
        }
    )


def cmd_eta_min(cfg, args, out):
    for x in args.x:
        r = hbdecomp.eta_minimize(x, args.J, args.step)
        argmin = None if r.argmin is None else {"m": list(r.argmin.m), "n": list(r.argmin.n)}
        out.obj(
            {
                "x": x,
                "J": args.J,
                "step": r.grid_step,
                "min_eta": r.min_eta,
                "lower_bound": hbdecomp.eta_lower_bound(x),
                "argmin": argmin,
            }
        )


def cmd_eta_bound(cfg, args, out):
    if args.certificate:
        c = hbdecomp.delta_certificate(args.x)
        out.obj({"x": args.x, "lower_bound": c.lower_bound, "delta": c.delta, "J_threshold": c.J_threshold})
    else:
        out.text(repr(hbdecomp.eta_lower_bound(args.x)))


def cmd_satotate(cfg, args, out):
    _need(args.m >= 2, f"--m must be >= 2, got {args.m}")
    _need(args.Q is None or args.Q >= 2, f"--Q must be >= 2, got {args.Q}")
    _need(args.Q is not None or args.m == 2, "all-argument mode needs m = 2; give --Q for m >= 3")
    ctx = _ctx(cfg, args.p)
    if args.Q is None:
        r = satotate.all_argument_report(ctx)
    else:
        r = satotate.prime_argument_sample(ctx, args.m, args.Q)
    if args.histogram:
        r.write_histogram_csv(args.histogram)
    d = {k: v for k, v in r.__dict__.items() if k not in ("bin_edges", "histogram")}
    d["histogram"] = r.histogram
    out.obj(d)


def cmd_composite(cfg, args, out):
    _need(args.c >= 2, f"--c must be >= 2, got {args.c}")
    out.obj({"a": args.a, "c": args.c, "m": args.m, "value": _num(satotate.kloosterman_composite(args.a, args.c, args.m))})


def cmd_largesums(cfg, args, out):
    _need(args.Xls >= 4, f"--X must be >= 4, got {args.Xls}")
    r = satotate.largesums_experiment(args.Xls, args.delta, args.beta, args.m, method=args.method)
    out.obj(r.__dict__)


def cmd_poly_error(cfg, args, out):
    _need(len(args.P) >= 2, "--P needs at least two coefficients (constant term first)")
    r = primesums.poly_error_sums(args.P, args.p, args.Xpe)
    out.obj(json.loads(r.to_json()))


# ---------------------------------------------------------------------------
# parser


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tracelab", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--output", "-o", help="write JSON here instead of stdout")
    common.add_argument("--cache-dir", help="table cache directory (default: $TRACELAB_CACHE if set)")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name: str, fn: Callable, help: str, weight: bool = False) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, parents=[common], help=help)
        sp.set_defaults(fn=fn)
        if weight:
            sp.add_argument("--p", type=int, required=True)
            sp.add_argument("--spec", required=True, help="weight s-expression, e.g. '(kloosterman 2)'")
        return sp

    sp = add("sieve", cmd_sieve, "list the primes up to --limit")
    sp.add_argument("--limit", type=int, required=True)

    sp = add("weight-eval", cmd_weight_eval, "evaluate a weight at one point", weight=True)
    sp.add_argument("--at", type=int, required=True)
    sp.add_argument("--digits", type=int, default=7)

    sp = add("weight-table", cmd_weight_table, "build a weight table and store it", weight=True)
    sp.add_argument("--out-table", help="TLWT file to write (default: cache directory)")

    for name, fn in (("fourier", cmd_fourier), ("mellin", cmd_mellin)):
        sp = add(name, fn, f"{name} transform of a weight (JSON lines)", weight=True)
        sp.add_argument("--at", type=int)

    sp = add("detect-exceptional", cmd_detect, "test K = c chi(n) e(bn/p)", weight=True)
    sp.add_argument("--tolerance", type=float, default=0.1)

    for name, fn in (("prime-sum", cmd_prime_sum), ("moebius-sum", cmd_moebius_sum)):
        sp = add(name, fn, f"{name} report(s), one per --X", weight=True)
        sp.add_argument("--X", type=float, nargs="+", required=True)
        sp.add_argument("--csv", help="also write a CSV sweep file")
        if name == "moebius-sum":
            sp.add_argument("--kind", choices=["mobius", "vonmangoldt"], default="mobius")

    sp = add("smoothed-sum", cmd_smoothed_sum, "sum of K(q) V(q/X) over primes", weight=True)
    sp.add_argument("--X", type=float, nargs="+", required=True)
    sp.add_argument("--delta", type=float, default=0.1)
    sp.add_argument("--csv")

    sp = add("eisenstein", cmd_eisenstein, "sum of K(n) d_it(n) V(n/X)", weight=True)
    sp.add_argument("--X", type=float, nargs="+", required=True)
    sp.add_argument("--t", type=float, default=0.0)
    sp.add_argument("--delta", type=float, default=0.1)
    sp.add_argument("--csv")

    sp = add("correlation-scan", cmd_correlation_scan, "paucity scan of |C(m,1,h)|", weight=True)
    sp.add_argument("--threshold", type=float, default=correl.DEFAULT_THRESHOLD)
    sp.add_argument("--force", action="store_true", help="lift the p <= 2^12 guard")

    sp = add("bilinear", cmd_bilinear, "type II sum with seeded coefficients", weight=True)
    sp.add_argument("--M", type=float, required=True)
    sp.add_argument("--N", type=float, required=True)
    sp.add_argument("--coeffs", choices=["signs", "units"], default="signs")

    sp = add("hb-check", cmd_hb_check, "check Heath-Brown's identities for n < 2X")
    sp.add_argument("--X", dest="Xhb", type=float, required=True)
    sp.add_argument("--J", type=int, required=True)
    sp.add_argument("--nmax", type=int)

    sp = add("eta-min", cmd_eta_min, "grid minimum of eta (JSON lines over --x)")
    sp.add_argument("--x", type=float, nargs="+", required=True)
    sp.add_argument("--J", type=int, default=6)
    sp.add_argument("--step", type=float, default=1 / 96)

    sp = add("eta-bound", cmd_eta_bound, "closed-form lower bound min(1/24, (4x-3)/24)")
    sp.add_argument("--x", type=float, required=True)
    sp.add_argument("--certificate", action="store_true", help="also print delta and the J threshold")

    sp = add("satotate", cmd_satotate, "KS test of Kloosterman angles")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--m", type=int, default=2)
    sp.add_argument("--Q", type=float, help="prime arguments qbar^m, q in [Q, 2Q]; omit for all a")
    sp.add_argument("--histogram", help="write the 64-bin histogram CSV here")

    sp = add("composite-kloosterman", cmd_composite, "Kl_m(a; c) by direct summation")
    sp.add_argument("--a", type=int, default=1)
    sp.add_argument("--c", type=int, required=True)
    sp.add_argument("--m", type=int, default=2)

    sp = add("largesums", cmd_largesums, "pairs p, q with |Kl_m(1; pq)| >= beta")
    sp.add_argument("--X", dest="Xls", type=int, required=True)
    sp.add_argument("--delta", type=float, default=0.25)
    sp.add_argument("--beta", type=float, default=0.3)
    sp.add_argument("--m", type=int, default=2)
    sp.add_argument("--method", choices=["multiplicative", "direct"], default="multiplicative")

    sp = add("poly-error", cmd_poly_error, "exact AP error sums over polynomial values")
    sp.add_argument("--P", type=int, nargs="+", required=True, help="coefficients, constant term first")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--X", dest="Xpe", type=float, required=True)
    return ap


def run(argv: list[str] | None = None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:  # argparse reports usage errors with exit 2
        return int(e.code or 0)
    cache_dir = args.cache_dir or os.environ.get("TRACELAB_CACHE")
    cfg = RunConfig(
        command=args.command,
        seed=args.seed,
        threads=args.threads,
        output=args.output,
        cache_dir=Path(cache_dir) if cache_dir else None,
        params={k: v for k, v in vars(args).items() if k != "fn"},
    )
    out = None
    try:
        _validate(args)
        out = _Out(cfg)
        args.fn(cfg, args, out)
    except ValidationError as e:
        print(f"tracelab {args.command}: invalid input: {e}", file=sys.stderr)
        return 2
    except CapacityError as e:
        print(f"tracelab {args.command}: capacity exceeded: {e}", file=sys.stderr)
        return 3
    except TracelabError as e:
        print(f"tracelab {args.command}: {e}", file=sys.stderr)
        return 1
    finally:
        if out is not None:
            out.close()
    return 0


def main() -> None:
    sys.exit(run())
