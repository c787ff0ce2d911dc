"""Vertical Sato-Tate experiments and Kloosterman sums to composite moduli.

For m = 2 the reference law of the angle theta with Kl_2 = 2 cos(theta) is
the Sato-Tate measure (2/pi) sin^2(theta) d(theta) (standard, not derived
here). For m >= 3 no analytic law is used: prime-argument samples are
compared with the empirical law over all arguments.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy import stats

from .errors import CapacityError, TracelabError, ValidationError
from .ffield import PrimeFieldContext, build_context, factorize, is_prime, sieve_primes
from .primesums import lambda2_upto
from .weights import kloosterman_bulk

N_BINS = 64


def sato_tate_cdf(theta):
    """F(theta) = (theta - sin(theta) cos(theta)) / pi on [0, pi]."""
    t = np.clip(np.asarray(theta, dtype=np.float64), 0.0, np.pi)
    return (t - np.sin(t) * np.cos(t)) / np.pi


@dataclass
class EquidistributionReport:
    p: int
    m: int
    arguments: str
    sample_size: int
    ks: float
    reference: str
    bin_edges: list[float] = field(repr=False)
    histogram: list[int] = field(repr=False)

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    def write_histogram_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["bin_lo", "bin_hi", "count"])
            for lo, hi, c in zip(self.bin_edges, self.bin_edges[1:], self.histogram):
                w.writerow([lo, hi, c])


def _histogram(sample: np.ndarray, lo: float, hi: float):
    counts, edges = np.histogram(sample, bins=N_BINS, range=(lo, hi))
    return edges.tolist(), counts.astype(int).tolist()


@lru_cache(maxsize=64)
def _table(p: int, m: int) -> np.ndarray:
    """Kl_m(a; p) at index a - 1, for a prime p >= 3."""
    t = kloosterman_bulk(build_context(p), m)
    t.setflags(write=False)
    return t


def kloosterman_angles(ctx: PrimeFieldContext, values: np.ndarray | None = None) -> np.ndarray:
    """theta(a) in [0, pi] with Kl_2(a; p) = 2 cos theta(a), at index a - 1."""
    kl = kloosterman_bulk(ctx, 2) if values is None else np.asarray(values)
    half = kl.real / 2
    excess = np.max(np.abs(half)) - 1
    if excess > 1e-9 or np.max(np.abs(kl.imag)) > 1e-9:
        raise TracelabError(f"Kl_2 table violates |Kl_2| <= 2 or realness (excess {excess:.3g})")
    return np.arccos(np.clip(half, -1.0, 1.0))


def all_argument_report(ctx: PrimeFieldContext) -> EquidistributionReport:
    theta = kloosterman_angles(ctx)
    ks = float(stats.kstest(theta, sato_tate_cdf).statistic)
    edges, hist = _histogram(theta, 0.0, math.pi)
    return EquidistributionReport(ctx.p, 2, "all a in F_p^x", theta.size, ks, "sato-tate", edges, hist)


def prime_arguments(p: int, m: int, Q: float) -> np.ndarray:
    """a = qbar^m mod p for the primes q in [Q, 2Q] with q != p."""
    if not Q >= 2:
        raise ValidationError(f"Q must be >= 2, got {Q}")
    q = sieve_primes(int(2 * Q))
    q = q[(q >= Q) & (q % p != 0)]
    if q.size == 0:
        raise ValidationError(f"no primes q in [{Q}, {2 * Q}] coprime to {p}")
    return np.array([pow(int(x), -m, p) for x in q], dtype=np.int64)


def prime_argument_sample(ctx: PrimeFieldContext, m: int, Q: float) -> EquidistributionReport:
    """Distribution of Kl_m(qbar^m; p) over primes q in [Q, 2Q].

    m = 2: angles against the Sato-Tate CDF. m >= 3: |Kl_m| against the
    empirical |Kl_m| over all of F_p^x (two-sample KS).
    """
    if m < 2:
        raise ValidationError(f"m must be >= 2, got {m}")
    a = prime_arguments(ctx.p, m, Q)
    kl = kloosterman_bulk(ctx, m)
    desc = f"qbar^{m}, q prime in [{Q}, {2 * Q}]"
    if m == 2:
        theta = kloosterman_angles(ctx, kl)[a - 1]
        ks = float(stats.kstest(theta, sato_tate_cdf).statistic)
        edges, hist = _histogram(theta, 0.0, math.pi)
        return EquidistributionReport(ctx.p, m, desc, theta.size, ks, "sato-tate", edges, hist)
    mags = np.abs(kl)
    sample = mags[a - 1]
    ks = float(stats.ks_2samp(sample, mags).statistic)
    edges, hist = _histogram(sample, 0.0, float(m))
    return EquidistributionReport(ctx.p, m, desc, sample.size, ks, "all-argument empirical |Kl_m|", edges, hist)


# ---------------------------------------------------------------------------
# composite moduli


def _phi(c: int) -> int:
    out = c
    for q in factorize(c):
        out = out // q * (q - 1)
    return out


def _inverse_units(c: int) -> tuple[np.ndarray, np.ndarray]:
    """The units x mod c and their inverses, via x^(phi(c) - 1) by vectorised squaring."""
    x = np.arange(1, c, dtype=np.int64) if c > 1 else np.zeros(0, dtype=np.int64)
    x = x[np.gcd(x, c) == 1]
    if c == 2:
        return x, x.copy()
    e = _phi(c) - 1
    result = np.ones_like(x)
    base = x.copy()
    while e:
        if e & 1:
            result = result * base % c
        base = base * base % c
        e >>= 1
    return x, result


def kloosterman_composite(a: int, c: int, m: int = 2) -> complex:
    """Kl_m(a; c) = c^{-(m-1)/2} sum_{x_1 ... x_m = a, x_i units mod c} e((x_1 + ... + x_m)/c).

    m = 2 is O(c); m = 3 is O(c^2) and only allowed for c^2 <= 5e7.
    """
    if c < 2:
        raise ValidationError(f"modulus must be >= 2, got {c}")
    if m not in (2, 3):
        raise ValidationError(f"direct evaluation supports m in (2, 3), got {m}")
    if c >= 3_000_000_000:
        raise CapacityError(f"c={c} overflows int64 products")
    x, xinv = _inverse_units(c)
    if m == 2:
        phase = (a * x + xinv) % c
        s = np.sum(np.exp(2j * np.pi * phase / c))
        return complex(s / math.sqrt(c))
    if c * c > 50_000_000:
        raise CapacityError(f"direct Kl_3 mod {c} needs {c * c:.3g} terms > 5e7")
    s = 0j
    for x1, i1 in zip(x, xinv):
        # x_3 = a / (x_1 x_2); a need not be a unit, so form it directly
        x3 = a % c * i1 % c * xinv % c
        s += np.sum(np.exp(2j * np.pi * ((x1 + x + x3) % c) / c))
    return complex(s / c)


def kloosterman_prime(a: int, p: int, m: int) -> complex:
    """Kl_m(a; p) from the cached bulk table (p = 2 handled directly)."""
    a %= p
    if a == 0:
        return complex(-((-1) ** m) / p ** ((m - 1) / 2))
    if p == 2:
        return complex((-1) ** m / 2 ** ((m - 1) / 2))  # only x = (1, ..., 1)
    return complex(_table(p, m)[a - 1])


def twisted_product(a: int, p: int, q: int, m: int = 2) -> complex:
    """Kl_m(a; pq) = Kl_m(a qbar^m; p) Kl_m(a pbar^m; q) for distinct primes p, q."""
    if p == q or not (is_prime(p) and is_prime(q)):
        raise ValidationError(f"need distinct primes, got {p}, {q}")
    return kloosterman_prime(a * pow(q, -m, p), p, m) * kloosterman_prime(a * pow(p, -m, q), q, m)


# ---------------------------------------------------------------------------
# the large-sums experiment


@dataclass
class LargeSumsReport:
    X: int
    delta: float
    beta: float
    m: int
    method: str
    pairs: int
    count: int
    proportion: float
    lambda2_mass: float  # sum over the enumerated c = pq of Lambda_2(c) |Kl_m(1; c)|

    def to_json(self) -> str:
        return json.dumps(asdict(self))


DIRECT_BUDGET = 50_000_000


def semiprime_pairs(X: int, delta: float) -> list[tuple[int, int]]:
    """Pairs p < q of primes >= X^delta with pq <= X."""
    lo = X**delta
    ps = sieve_primes(max(2, X // 2))
    ps = ps[ps >= lo]
    out = []
    for i, p in enumerate(ps):
        p = int(p)
        if p * p > X:
            break
        for q in ps[i + 1 :]:
            if p * int(q) > X:
                break
            out.append((p, int(q)))
    return out


def largesums_experiment(
    X: int, delta: float, beta: float, m: int = 2, method: str = "multiplicative", budget: int = DIRECT_BUDGET
) -> LargeSumsReport:
    """Count pairs of primes p, q >= X^delta, pq <= X, with |Kl_m(1; pq)| >= beta."""
    if not 0 < delta < 0.5:
        raise ValidationError(f"delta must lie in (0, 1/2), got {delta}")
    if not beta >= 0:
        raise ValidationError(f"beta must be >= 0, got {beta}")
    if m < 2:
        raise ValidationError(f"m must be >= 2, got {m}")
    if method not in ("multiplicative", "direct"):
        raise ValidationError(f"unknown method {method!r}")
    X = int(X)
    pairs = semiprime_pairs(X, delta)
    if method == "direct":
        if m != 2:
            raise ValidationError("direct evaluation is only offered for m = 2")
        work = sum(p * q for p, q in pairs)
        if work > budget:
            raise CapacityError(f"direct route needs sum of moduli {work:.3g} > budget {budget:.3g}")
        mags = [abs(kloosterman_composite(1, p * q)) for p, q in pairs]
    else:
        if X // 2 > 1 << 22:
            raise CapacityError(f"X={X} needs prime tables up to {X // 2}")
        mags = [abs(twisted_product(1, p, q, m)) for p, q in pairs]
    mags = np.array(mags)
    lam2 = lambda2_upto(X)
    cs = np.array([p * q for p, q in pairs], dtype=np.int64)
    count = int(np.sum(mags >= beta))
    return LargeSumsReport(
        X=X,
        delta=delta,
        beta=beta,
        m=m,
        method=method,
        pairs=len(pairs),
        count=count,
        proportion=count / len(pairs) if pairs else 0.0,
        lambda2_mass=float(np.sum(lam2[cs] * mags)) if pairs else 0.0,
    )
