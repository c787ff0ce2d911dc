"""Grid minimum of the saving exponent eta against the lower bound min(1/24, (4x-3)/24)."""

import argparse
import time

import numpy as np

from tracelab.hbdecomp import delta_certificate, eta_lower_bound, eta_minimize


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--J", type=int, default=6)
    ap.add_argument("--step", type=float, default=1 / 96)
    ap.add_argument("--x", type=float, nargs="+", default=[0.8, 0.85, 0.9, 1.0, 1.1, 1.2, 1.35, 1.5])
    args = ap.parse_args()

    print(f"{'x':>5} {'grid min':>9} {'bound':>8} {'J*':>3} {'secs':>6}  argmin (n | m)")
    for x in args.x:
        t0 = time.perf_counter()
        r = eta_minimize(x, args.J, args.step)
        dt = time.perf_counter() - t0
        lb = eta_lower_bound(x)
        arg = r.argmin
        n = np.round(np.array(arg.n) / r.grid_step).astype(int).tolist()
        m = np.round(np.array(arg.m) / r.grid_step).astype(int).tolist()
        J_star = delta_certificate(x).J_threshold
        print(f"{x:5.2f} {r.min_eta:9.5f} {lb:8.5f} {J_star:3d} {dt:6.2f}  {n} | {m}  (units of {r.grid_step:.5f})")


if __name__ == "__main__":
    main()
