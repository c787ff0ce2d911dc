"""Prime-field substrate: primes, primitive roots, discrete-log tables, characters.

Everything downstream evaluates weights through a :class:`PrimeFieldContext`,
which holds the lookup tables that turn multiplication in F_p^x into index
arithmetic on Z/(p-1).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import CapacityError, DomainError, ValidationError

DEFAULT_MAX_P = 1 << 27
P_LIMIT = 1 << 31


class _Pole:
    """Marker returned by :func:`eval_rational` when the denominator vanishes."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "POLE"

    def __bool__(self) -> bool:
        return False


POLE = _Pole()


# ---------------------------------------------------------------------------
# primes


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for q in small:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def factorize(n: int) -> dict[int, int]:
    """Trial-division factorization; fine for n < 2^40 or so."""
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def next_prime(n: int) -> int:
    """Smallest prime >= n."""
    n = max(n, 2)
    while not is_prime(n):
        n += 1
    return n


def _simple_sieve(limit: int) -> np.ndarray:
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for q in range(3, math.isqrt(limit) + 1, 2):
        if flags[q]:
            flags[q * q :: 2 * q] = False
    return np.flatnonzero(flags).astype(np.int64)


def sieve_primes(limit: int, segment: int = 1 << 22) -> np.ndarray:
    """All primes <= ``limit`` in ascending order (odd-only segmented sieve).

    Memory is O(sqrt(limit) + segment) besides the output array, so limits up
    to 1e9 are practical.
    """
    if limit < 2:
        raise ValidationError(f"sieve limit must be >= 2, got {limit}")
    if limit <= segment:
        return _simple_sieve(limit)
    base = _simple_sieve(math.isqrt(limit))[1:]  # odd base primes
    chunks = [np.array([2], dtype=np.int64)]
    low = 3
    while low <= limit:
        high = min(low + 2 * segment, limit + 1)  # exclusive
        count = (high - low + 1) // 2
        mask = np.ones(count, dtype=bool)
        for q in base:
            qq = int(q) * int(q)
            if qq >= high:
                break
            start = max(qq, -(-low // q) * q)
            if start % 2 == 0:
                start += q
            if start < high:
                mask[(start - low) // 2 :: q] = False
        seg = low + 2 * np.flatnonzero(mask).astype(np.int64)
        chunks.append(seg[seg <= limit])
        low = high if high % 2 == 1 else high + 1
    return np.concatenate(chunks)


def prime_pi(x: float) -> int:
    """pi(x) by sieving."""
    if x < 2:
        return 0
    return int(sieve_primes(int(x)).size)


# ---------------------------------------------------------------------------
# primitive roots and the context


def find_primitive_root(p: int) -> int:
    """Smallest positive primitive root modulo the odd prime ``p``."""
    if p < 3 or not is_prime(p):
        raise ValidationError(f"p must be an odd prime, got {p}")
    cofactors = [(p - 1) // q for q in factorize(p - 1)]
    for g in range(2, p):
        if all(pow(g, c, p) != 1 for c in cofactors):
            return g
    raise AssertionError("unreachable: every prime has a primitive root")


def _power_table(g: int, p: int) -> np.ndarray:
    """g^k mod p for k = 0..p-2, by doubling blocks."""
    n = p - 1
    out = np.empty(n, dtype=np.int64)
    out[0] = 1
    filled = 1
    while filled < n:
        step = min(filled, n - filled)
        out[filled : filled + step] = out[:step] * pow(g, filled, p) % p
        filled += step
    return out


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PrimeFieldContext:
    """Lookup tables for F_p.

    ``dlog[x]`` is the exponent k with g^k = x (``dlog[0] = -1``), ``inv[x]``
    the inverse of x (``inv[0] = 0``) and ``powers[k] = g^k``. All arrays are
    read-only, so one context can be shared between threads.
    """

    p: int
    g: int
    dlog: np.ndarray
    inv: np.ndarray
    powers: np.ndarray

    @cached_property
    def roots(self) -> np.ndarray:
        """e(k/p) for k = 0..p-1."""
        k = np.arange(self.p, dtype=np.float64)
        return _readonly(np.exp(2j * np.pi * k / self.p))

    @property
    def order(self) -> int:
        return self.p - 1

    def __repr__(self) -> str:
        return f"PrimeFieldContext(p={self.p}, g={self.g})"


def context_from_dlog(p: int, g: int, dlog: np.ndarray) -> PrimeFieldContext:
    """Rebuild a context from a stored discrete-log table (cache path)."""
    dlog = np.asarray(dlog, dtype=np.int64).copy()
    dlog[0] = -1
    n = p - 1
    powers = np.empty(n, dtype=np.int64)
    powers[dlog[1:]] = np.arange(1, p, dtype=np.int64)
    inv = np.zeros(p, dtype=np.int64)
    inv[powers] = powers[(-np.arange(n)) % n]
    return PrimeFieldContext(p, g, _readonly(dlog), _readonly(inv), _readonly(powers))


def build_context(
    p: int, max_p: int = DEFAULT_MAX_P, cache_dir: str | os.PathLike | None = None
) -> PrimeFieldContext:
    """Build (or load from ``cache_dir``) the lookup tables for F_p.

    Construction is one O(p) walk through the powers of the smallest
    primitive root.
    """
    if p < 3 or not is_prime(p):
        raise ValidationError(f"p must be an odd prime, got {p}")
    if p >= P_LIMIT:
        raise CapacityError(f"p={p} exceeds the machine-word limit 2^31")
    if p > max_p:
        raise CapacityError(
            f"p={p} exceeds the table budget max_p={max_p} "
            f"(~{28 * p / 2**20:.0f} MiB needed); raise max_p to override"
        )
    if cache_dir is not None:
        from .cache import load_context, save_context

        path = Path(cache_dir) / f"ctx-{p}.tlff"
        if path.exists():
            return load_context(path)
        ctx = build_context(p, max_p=max_p)
        save_context(ctx, path)
        return ctx

    g = find_primitive_root(p)
    n = p - 1
    powers = _power_table(g, p)
    dlog = np.empty(p, dtype=np.int64)
    dlog[0] = -1
    dlog[powers] = np.arange(n, dtype=np.int64)
    inv = np.zeros(p, dtype=np.int64)
    inv[powers] = powers[(-np.arange(n)) % n]
    return PrimeFieldContext(p, g, _readonly(dlog), _readonly(inv), _readonly(powers))


# ---------------------------------------------------------------------------
# polynomials and rational functions over F_p


def _trim(c: Sequence[int]) -> tuple[int, ...]:
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def poly_divmod_modp(a: Sequence[int], b: Sequence[int], p: int):
    """Quotient and remainder of a / b over F_p, ascending coefficients."""
    a, b = list(_trim(a)), _trim(b)
    if not b:
        raise DomainError("division by the zero polynomial")
    lead_inv = pow(b[-1], -1, p)
    q = [0] * max(len(a) - len(b) + 1, 0)
    while len(a) >= len(b) and a:
        shift = len(a) - len(b)
        c = a[-1] * lead_inv % p
        q[shift] = c
        for i, bi in enumerate(b):
            a[shift + i] = (a[shift + i] - c * bi) % p
        a = list(_trim(a))
    return _trim(q), tuple(a)


def poly_gcd_modp(a: Sequence[int], b: Sequence[int], p: int) -> tuple[int, ...]:
    """Monic gcd over F_p."""
    a, b = _trim([x % p for x in a]), _trim([x % p for x in b])
    while b:
        _, r = poly_divmod_modp(a, b, p)
        a, b = b, r
    if not a:
        return ()
    li = pow(a[-1], -1, p)
    return tuple(x * li % p for x in a)


@dataclass(frozen=True)
class RationalFunctionModP:
    """f = P/Q over F_p with coprime P, Q; coefficients ascending, reduced mod p."""

    p: int
    numerator: tuple[int, ...]
    denominator: tuple[int, ...] = (1,)

    def __post_init__(self):
        num = _trim([c % self.p for c in self.numerator])
        den = _trim([c % self.p for c in self.denominator])
        if not den:
            raise ValidationError("denominator vanishes identically mod p")
        g = poly_gcd_modp(num, den, self.p)
        if len(g) > 1:
            raise ValidationError(
                f"numerator and denominator share the factor {g} mod {self.p}"
            )
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denominator", den)

    @classmethod
    def from_int(cls, p: int, num: Sequence[int], den: Sequence[int] = (1,)):
        return cls(p, tuple(int(c) for c in num), tuple(int(c) for c in den))

    @property
    def deg_num(self) -> int:
        return len(self.numerator) - 1

    @property
    def deg_den(self) -> int:
        return len(self.denominator) - 1

    @property
    def is_constant(self) -> bool:
        return self.deg_num <= 0 and self.deg_den == 0

    @property
    def is_polynomial(self) -> bool:
        return self.deg_den == 0


def _horner(coeffs: Sequence[int], x: int, p: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % p
    return acc


def _horner_all(coeffs: Sequence[int], p: int) -> np.ndarray:
    x = np.arange(p, dtype=np.int64)
    acc = np.zeros(p, dtype=np.int64)
    for c in reversed(coeffs):
        acc = (acc * x + c) % p
    return acc


def eval_rational(ctx: PrimeFieldContext, f: RationalFunctionModP, x: int):
    """P(x)/Q(x) mod p, or :data:`POLE` when Q(x) = 0."""
    p = ctx.p
    x %= p
    q = _horner(f.denominator, x, p)
    if q == 0:
        return POLE
    return _horner(f.numerator, x, p) * int(ctx.inv[q]) % p


def eval_rational_table(ctx: PrimeFieldContext, f: RationalFunctionModP):
    """Vectorised :func:`eval_rational` over all of F_p.

    Returns ``(values, poles)``; ``values`` holds 0 at poles, which callers
    must mask with the boolean ``poles`` array rather than trust.
    """
    p = ctx.p
    num = _horner_all(f.numerator, p)
    den = _horner_all(f.denominator, p)
    poles = den == 0
    vals = num * ctx.inv[den] % p
    vals[poles] = 0
    return vals, poles


# ---------------------------------------------------------------------------
# characters


def additive_char(ctx: PrimeFieldContext, x: int) -> complex:
    """e(x/p)."""
    return complex(ctx.roots[x % ctx.p])


def mult_char(ctx: PrimeFieldContext, j: int, x: int) -> complex:
    """chi_j(x) = e(j dlog(x) / (p-1)) for x in F_p^x."""
    x %= ctx.p
    if x == 0:
        raise DomainError("multiplicative character evaluated at 0")
    k = (j * int(ctx.dlog[x])) % (ctx.p - 1)
    return complex(np.exp(2j * np.pi * k / (ctx.p - 1)))


def mult_char_table(ctx: PrimeFieldContext, j: int) -> np.ndarray:
    """chi_j on all of F_p, extended by chi_j(0) = 0."""
    n = ctx.p - 1
    k = (j * ctx.dlog[1:]) % n
    out = np.zeros(ctx.p, dtype=np.complex128)
    out[1:] = np.exp(2j * np.pi * k / n)
    return out


def legendre_index(p: int) -> int:
    """Character index of the Legendre symbol."""
    return (p - 1) // 2


def character_order(p: int, j: int) -> int:
    return (p - 1) // math.gcd(j, p - 1)
