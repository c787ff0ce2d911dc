"""Sums of trace weights against primes, mu and Lambda, plus the exact AP error terms.

Every sum comes with a report comparing it to the trivial bound (number of
terms times sup|K|) and to the theoretical template with constant 1.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, ValidationError
from .ffield import sieve_primes
from .smooth import TestFunction, make_bump, zero_function  # noqa: F401  (re-exported)
from .weights import WeightTable

ETA_PRIME = 1 / 24 - 1e-6
ETA_EISENSTEIN = 1 / 8 - 1e-6

# ---------------------------------------------------------------------------
# arithmetic functions on [0, N]


def primes_upto(X: float) -> np.ndarray:
    if X < 2:
        return np.zeros(0, dtype=np.int64)
    return sieve_primes(int(X))


def mobius_upto(N: int) -> np.ndarray:
    """mu(n) for 0 <= n <= N (mu(0) = 0)."""
    mu = np.ones(N + 1, dtype=np.int8)
    mu[0] = 0
    for q in primes_upto(N):
        q = int(q)
        mu[q::q] *= -1
        mu[q * q :: q * q] = 0
    return mu


def mangoldt_upto(N: int) -> np.ndarray:
    """Lambda(n) for 0 <= n <= N."""
    lam = np.zeros(N + 1)
    for q in primes_upto(N):
        q = int(q)
        lq = math.log(q)
        pk = q
        while pk <= N:
            lam[pk] = lq
            pk *= q
    return lam


def lambda2_upto(N: int) -> np.ndarray:
    """Lambda_2 = mu * log^2 for 0 <= n <= N."""
    mu = mobius_upto(N)
    logsq = np.zeros(N + 1)
    logsq[1:] = np.log(np.arange(1, N + 1)) ** 2
    out = np.zeros(N + 1)
    for d in np.flatnonzero(mu):
        d = int(d)
        out[d::d] += mu[d] * logsq[1 : N // d + 1]
    return out


# ---------------------------------------------------------------------------
# reports


@dataclass
class SumReport:
    p: int
    X: float
    weight_spec: str
    kind: str
    value_re: float
    value_im: float
    trivial: float
    bound: float
    savings: float  # log(trivial / |sum|) / log p

    @property
    def value(self) -> complex:
        return complex(self.value_re, self.value_im)

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def savings_exponent(trivial: float, value: complex, p: int) -> float:
    a = abs(value)
    if a == 0:
        return math.inf
    return math.log(trivial / a) / math.log(p)


def prime_template(X: float, p: int, eta: float = ETA_PRIME) -> float:
    """X (1 + p/X)^{1/12} p^{-eta/2}."""
    return X * (1 + p / X) ** (1 / 12) * p ** (-eta / 2)


def smooth_template(X: float, p: int, Q: float, eta: float = ETA_PRIME) -> float:
    """Q X (1 + p/X)^{1/6} p^{-eta}."""
    return Q * X * (1 + p / X) ** (1 / 6) * p ** (-eta)


def eisenstein_template(X: float, p: int, Q: float, eta: float = ETA_EISENSTEIN) -> float:
    """Q X (1 + p/X)^{1/2} p^{-eta}."""
    return Q * X * (1 + p / X) ** 0.5 * p ** (-eta)


def _sup(table: WeightTable) -> float:
    return float(np.max(np.abs(table.values)))


def _report(table, X, kind, value, weight_mass, bound) -> SumReport:
    trivial = weight_mass * _sup(table)
    return SumReport(
        p=table.p,
        X=X,
        weight_spec=table.label,
        kind=kind,
        value_re=value.real,
        value_im=value.imag,
        trivial=trivial,
        bound=bound,
        savings=savings_exponent(trivial, value, table.p),
    )


def _check_X(X: float, least: float = 2) -> None:
    if not X >= least:
        raise ValidationError(f"X must be >= {least}, got {X}")


# ---------------------------------------------------------------------------
# sharp sums


def prime_sum(table: WeightTable, X: float) -> SumReport:
    """sum over primes q <= X of K(q)."""
    _check_X(X)
    q = primes_upto(X)
    value = complex(np.sum(table.values[q % table.p]))
    return _report(table, X, "prime", value, q.size, prime_template(X, table.p))


def mobius_sum(table: WeightTable, X: float) -> SumReport:
    """sum_{n <= X} mu(n) K(n)."""
    _check_X(X)
    N = int(X)
    mu = mobius_upto(N)[1:].astype(np.float64)
    n = np.arange(1, N + 1)
    value = complex(np.sum(mu * table.values[n % table.p]))
    return _report(table, X, "mobius", value, float(np.abs(mu).sum()), prime_template(X, table.p))


def vonmangoldt_sum(table: WeightTable, X: float) -> SumReport:
    """sum_{n <= X} Lambda(n) K(n)."""
    _check_X(X)
    N = int(X)
    lam = mangoldt_upto(N)[1:]
    n = np.arange(1, N + 1)
    value = complex(np.sum(lam * table.values[n % table.p]))
    return _report(table, X, "vonmangoldt", value, float(lam.sum()), prime_template(X, table.p))


# ---------------------------------------------------------------------------
# smoothed sums


def _range(V: TestFunction, X: float) -> np.ndarray:
    a, b = V.support
    lo = max(1, math.ceil(a * X))
    hi = math.floor(b * X)
    return np.arange(lo, hi + 1, dtype=np.int64)


def smoothed_sum(table: WeightTable, V: TestFunction, X: float) -> complex:
    """sum over primes q of K(q) V(q/X); only q in X * support(V) are touched."""
    _check_X(X)
    a, b = V.support
    q = primes_upto(math.floor(b * X))
    q = q[q >= a * X]
    return complex(np.sum(table.values[q % table.p] * V(q / X)))


def smoothed_report(table: WeightTable, V: TestFunction, X: float) -> SumReport:
    a, b = V.support
    q = primes_upto(math.floor(b * X))
    q = q[q >= a * X]
    mass = float(np.sum(np.abs(V(q / X))))
    value = smoothed_sum(table, V, X)
    return _report(table, X, "smoothed-prime", value, mass, smooth_template(X, table.p, V.Q))


def twisted_divisor(n: int, t: float) -> float:
    """d_it(n) = sum_{ab = n} (a/b)^{it}, which is real."""
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    return float(twisted_divisor_range(n, n, t)[0])


def twisted_divisor_range(lo: int, hi: int, t: float) -> np.ndarray:
    """d_it(n) for lo <= n <= hi, pairing (a, b) with (b, a) over a <= sqrt(n)."""
    if lo < 1 or hi < lo:
        raise ValidationError(f"need 1 <= lo <= hi, got [{lo}, {hi}]")
    out = np.zeros(hi - lo + 1)
    for a in range(1, math.isqrt(hi) + 1):
        k = np.arange(max(a, -(-lo // a)), hi // a + 1)
        if k.size == 0:
            continue
        # (a, b) and (b, a) together give 2 cos(t log(b/a)); the square a = b once
        w = 2 * np.cos(t * np.log(k / a))
        w[k == a] = 1.0
        out[a * k - lo] += w
    return out


def eisenstein_twist(table: WeightTable, V: TestFunction, X: float, t: float) -> complex:
    """sum_n K(n) d_it(n) V(n/X) over the integers in X * support(V)."""
    _check_X(X, 1)
    n = _range(V, X)
    if n.size == 0:
        return 0j
    d = twisted_divisor_range(int(n[0]), int(n[-1]), t)
    return complex(np.sum(table.values[n % table.p] * d * V(n / X)))


def eisenstein_report(table: WeightTable, V: TestFunction, X: float, t: float) -> SumReport:
    n = _range(V, X)
    d = twisted_divisor_range(int(n[0]), int(n[-1]), t)
    mass = float(np.sum(np.abs(d * V(n / X))))
    value = eisenstein_twist(table, V, X, t)
    return _report(table, X, f"eisenstein(t={t})", value, mass, eisenstein_template(X, table.p, V.Q))


def amplifier(L: float, tau: float, t: float) -> float:
    """B_{i tau}(it) = sum over primes l <= 2L of sign(d_{i tau}(l)) d_{it}(l)."""
    if not L >= 1:
        raise ValidationError(f"L must be >= 1, got {L}")
    ell = primes_upto(2 * L).astype(np.float64)
    logs = np.log(ell)
    return float(np.sum(np.sign(np.cos(tau * logs)) * 2 * np.cos(t * logs)))


# ---------------------------------------------------------------------------
# primes in progressions, exactly


def ap_counts(X: float, p: int) -> np.ndarray:
    """pi(X; p, a) for a = 0..p-1."""
    _check_X(X)
    return np.bincount(primes_upto(X) % p, minlength=p)


def ap_error(X: float, p: int, a: int) -> Fraction:
    """E(X; p, a) = pi(X; p, a) - delta_p(a) pi(X) / (p - 1), exactly."""
    counts = ap_counts(X, p)
    return _error(counts, p, a % p)


def _error(counts: np.ndarray, p: int, a: int) -> Fraction:
    e = Fraction(int(counts[a]))
    if a != 0:
        e -= Fraction(int(counts.sum()), p - 1)
    return e


def _horner(coeffs: Sequence[int], x: int, p: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % p
    return acc


@dataclass(frozen=True)
class PolyErrorSums:
    p: int
    X: float
    P: tuple[int, ...]
    over_n: Fraction  # sum_{n in F_p} E(X; p, P(n))
    over_values: Fraction  # sum_{a in P(F_p)} E(X; p, a)
    via_counts: Fraction  # sum over n recomputed from sum_{q <= X} N_P(q)

    @property
    def routes_agree(self) -> bool:
        return self.over_n == self.via_counts

    def to_json(self) -> str:
        d = {k: str(v) if isinstance(v, Fraction) else v for k, v in asdict(self).items()}
        d["routes_agree"] = self.routes_agree
        return json.dumps(d)


def poly_error_sums(P: Sequence[int], p: int, X: float) -> PolyErrorSums:
    """Both error-term sums over a polynomial's values, the first one by two routes.

    ``P`` lists coefficients from the constant term up. The second route
    counts N_P(q) = #{n : P(n) = q} - 1 at the primes q <= X and adds back
    sum_q (1 - #{n : P(n) != 0} / (p - 1)).
    """
    _check_X(X)
    coeffs = tuple(int(c) % p for c in P)
    if all(c == 0 for c in coeffs[1:]):
        raise DomainError("P must be non-constant mod p")
    values = [_horner(coeffs, n, p) for n in range(p)]
    counts = ap_counts(X, p)
    over_n = sum((_error(counts, p, a) for a in values), Fraction(0))
    value_set = sorted(set(values))
    over_values = sum((_error(counts, p, a) for a in value_set), Fraction(0))

    mult = np.bincount(np.array(values, dtype=np.int64), minlength=p)
    q = primes_upto(X)
    n_p = int(np.sum(mult[q % p] - 1))
    nonzero = p - int(mult[0])
    via_counts = n_p + q.size * (1 - Fraction(nonzero, p - 1))
    return PolyErrorSums(p, X, coeffs, over_n, over_values, via_counts)


# ---------------------------------------------------------------------------
# output


def write_csv(reports: Iterable[SumReport], path) -> None:
    """One row (p, X, kind, sum, |sum|, trivial, bound, savings) per report."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["p", "X", "kind", "sum_re", "sum_im", "abs_sum", "trivial", "bound", "savings"])
        for r in reports:
            w.writerow([r.p, r.X, r.kind, r.value_re, r.value_im, abs(r.value), r.trivial, r.bound, r.savings])
