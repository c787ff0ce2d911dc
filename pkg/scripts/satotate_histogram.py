"""Histograms of Kloosterman angles, over all arguments and over prime arguments qbar^2.

Writes two 64-bin CSVs with the Sato-Tate bin mass alongside the counts, and
prints KS statistics for a ladder of primes.
"""

import argparse
import csv

import numpy as np

from tracelab.ffield import build_context, next_prime
from tracelab.satotate import all_argument_report, prime_argument_sample, sato_tate_cdf


def write(report, path):
    edges = np.array(report.bin_edges)
    expected = np.diff(sato_tate_cdf(edges)) * report.sample_size
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bin_lo", "bin_hi", "count", "expected"])
        for lo, hi, c, ex in zip(edges, edges[1:], report.histogram, expected):
            w.writerow([lo, hi, c, ex])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=int, default=10007)
    ap.add_argument("--prefix", default="satotate")
    args = ap.parse_args()

    ctx = build_context(args.p)
    everything = all_argument_report(ctx)
    primes = prime_argument_sample(ctx, 2, args.p)
    write(everything, f"{args.prefix}_all_{args.p}.csv")
    write(primes, f"{args.prefix}_prime_{args.p}.csv")
    print(f"p={args.p}: KS all={everything.ks:.4f}, KS prime args={primes.ks:.4f} (n={primes.sample_size})")

    print("ladder (Q = p):")
    for p in (1009, 10007, 100003, next_prime(10**6)):
        c = build_context(p)
        r2 = prime_argument_sample(c, 2, p)
        r3 = prime_argument_sample(c, 3, p) if p < 200_000 else None
        extra = f"  m=3 vs all-argument |Kl_3|: {r3.ks:.4f}" if r3 else ""
        print(f"  p={p:8d} n={r2.sample_size:6d} KS={r2.ks:.4f}{extra}")


if __name__ == "__main__":
    main()
