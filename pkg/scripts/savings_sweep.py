"""Savings exponent of the prime sum of Kl_2 across primes p, at X = p and X = p^2 / 10.

Writes a CSV (one row per (p, X)) and prints a short summary.
"""

import argparse

import numpy as np

from tracelab import primesums
from tracelab.ffield import build_context, sieve_primes
from tracelab.weights import bulk_eval
from tracelab.wspec import parse_spec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lo", type=int, default=10**4)
    ap.add_argument("--hi", type=int, default=10**5)
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--spec", default="(kloosterman 2)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--csv", default="savings_sweep.csv")
    args = ap.parse_args()

    ps = sieve_primes(args.hi)
    ps = ps[ps >= args.lo]
    rng = np.random.default_rng(args.seed)
    sample = sorted(int(p) for p in rng.choice(ps, min(args.count, ps.size), replace=False))
    spec = parse_spec(args.spec)

    reports = []
    for p in sample:
        table = bulk_eval(build_context(p), spec)
        for X in (p, p * p // 10):
            r = primesums.prime_sum(table, X)
            reports.append(r)
            print(f"p={p:6d} X={X:>11d} |S|={abs(r.value):10.2f} trivial={r.trivial:10.1f} savings={r.savings:.3f}")
    primesums.write_csv(reports, args.csv)
    s = np.array([r.savings for r in reports])
    print(f"{np.mean(s > 0):.0%} positive, median savings {np.median(s):.3f}; wrote {args.csv}")


if __name__ == "__main__":
    main()
