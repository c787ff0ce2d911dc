"""Evaluation of weight specs into value tables, plus transforms on those tables."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import cache
from .dft import chirp_dft, cyclic_power
from .errors import CapacityError, ValidationError
from .ffield import (
    PrimeFieldContext,
    RationalFunctionModP,
    eval_rational_table,
    mult_char_table,
)
from .wspec import (
    AdditiveCharOfRational,
    Conjugate,
    Constant,
    DeltaAt,
    HyperKloosterman,
    MultCharOfRational,
    PolyValueCount,
    Product,
    PullbackMonomial,
    RatFunc,
    Scalar,
    ValueSetIndicator,
    WeightSpec,
    spec_hash,
    to_sexpr,
)

EXCEPTIONAL_MAX_P = 1 << 14


@dataclass(frozen=True)
class ExceptionalWitness:
    """K(n) ~ c * chi_j(n) * e(b n / p) on F_p^x, with the captured energy share."""

    j: int
    b: int
    c: complex
    concentration: float


@dataclass(frozen=True, eq=False)
class WeightTable:
    ctx: PrimeFieldContext
    values: np.ndarray
    conductor_estimate: int
    spec: Optional[WeightSpec] = None
    label: str = ""
    exceptional: Optional[ExceptionalWitness] = field(default=None)

    @property
    def p(self) -> int:
        return self.ctx.p

    def __call__(self, n):
        return self.values[np.asarray(n) % self.ctx.p]

    def __repr__(self) -> str:
        return f"WeightTable(p={self.p}, {self.label or '?'})"


def table_from_values(ctx, values, label="custom", conductor=1, spec=None) -> WeightTable:
    v = np.array(values, dtype=np.complex128)
    if v.shape != (ctx.p,):
        raise ValidationError(f"expected {ctx.p} values, got shape {v.shape}")
    v.setflags(write=False)
    return WeightTable(ctx, v, conductor, spec=spec, label=label)


# ---------------------------------------------------------------------------
# hyper-Kloosterman sums


def kloosterman_bulk(ctx: PrimeFieldContext, m: int, normalize: bool = True) -> np.ndarray:
    """Kl_m(a; p) for every a in F_p^x; entry ``a - 1`` holds Kl_m(a; p).

    The sum over x_1 ... x_m = a is the m-fold convolution of x -> e(x/p) on
    the cyclic group F_p^x. Indexing the group by discrete logs turns that
    into a cyclic convolution of length p - 1.
    """
    if m < 2:
        raise ValidationError(f"m must be >= 2, got {m}")
    p = ctx.p
    u = ctx.roots[ctx.powers]  # e(g^k / p)
    s = cyclic_power(u, m)  # s[k] = S_m(g^k)
    out = np.empty(p - 1, dtype=np.complex128)
    out[ctx.powers - 1] = s
    if normalize:
        out /= p ** ((m - 1) / 2)
    return out


def kloosterman_at_zero(p: int, m: int) -> float:
    """The defining sum at a = 0, normalised.

    Tuples with x_1 ... x_m = 0 are all tuples minus those with every x_i != 0,
    i.e. (sum_x e(x/p))^m - (sum_{x != 0} e(x/p))^m = 0 - (-1)^m.
    """
    return -((-1) ** m) / p ** ((m - 1) / 2)


# ---------------------------------------------------------------------------
# conductor bookkeeping


def _qpoly_gcd(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    def trim(c):
        while c and c[-1] == 0:
            c.pop()
        return c

    a, b = trim(list(a)), trim(list(b))
    while b:
        r = list(a)
        while len(r) >= len(b) and r:
            c = r[-1] / b[-1]
            shift = len(r) - len(b)
            for i, bi in enumerate(b):
                r[shift + i] -= c * bi
            trim(r)
        a, b = b, r
    return a


def _distinct_roots(coeffs: Sequence[int]) -> int:
    """Number of distinct complex roots of an integer polynomial."""
    c = [Fraction(x) for x in coeffs]
    while c and c[-1] == 0:
        c.pop()
    if len(c) <= 1:
        return 0
    deriv = [i * c[i] for i in range(1, len(c))]
    g = _qpoly_gcd(c, deriv)
    return (len(c) - 1) - (len(g) - 1)


def _deg(coeffs: Sequence[int]) -> int:
    c = list(coeffs)
    while c and c[-1] == 0:
        c.pop()
    return len(c) - 1


def conductor_estimate(spec: WeightSpec) -> int:
    """Conductor metadata.

    Base cases use the standard closed forms: deg P + 2 for e(P(n)/p),
    2 + #distinct zeros (and poles) for chi(f(n)), m + 3 for Kl_m. Rational
    additive characters count 1 + order at each pole plus the Swan term at
    infinity. Everything else (products, pullbacks, value-count weights, deltas)
    is a heuristic upper proxy: component sum + 2. Conjugation and scaling keep
    the conductor. Never used on a correctness path.
    """
    match spec:
        case AdditiveCharOfRational(f):
            dp, dq = _deg(f.num), _deg(f.den)
            if dq == 0:
                return max(dp, 0) + 2 if dp > 0 else 1
            poles = _distinct_roots(f.den) + dq
            infinity = 1 + dp - dq if dp > dq else 0
            return 1 + poles + infinity
        case MultCharOfRational(_, f):
            return 2 + _distinct_roots(f.num) + _distinct_roots(f.den)
        case HyperKloosterman(m):
            return m + 3
        case PolyValueCount(P) | ValueSetIndicator(P):
            return 2 * max(_deg(P.num), 1)
        case DeltaAt(_):
            return 2
        case Constant(_):
            return 1
        case PullbackMonomial(inner, _, _):
            return conductor_estimate(inner) + 2
        case Product(a, b):
            return conductor_estimate(a) + conductor_estimate(b) + 2
        case Conjugate(inner) | Scalar(_, inner):
            return conductor_estimate(inner)
    raise ValidationError(f"not a weight spec: {spec!r}")


# ---------------------------------------------------------------------------
# evaluation


def _reduce(ctx: PrimeFieldContext, f: RatFunc, need_nonconstant: bool) -> RationalFunctionModP:
    fr = RationalFunctionModP.from_int(ctx.p, f.num, f.den)
    if need_nonconstant and fr.is_constant:
        raise ValidationError(f"{f} is constant mod {ctx.p}")
    return fr


def _value_histogram(ctx: PrimeFieldContext, P: RatFunc) -> np.ndarray:
    fr = _reduce(ctx, P, need_nonconstant=True)
    vals, _ = eval_rational_table(ctx, fr)
    return np.bincount(vals, minlength=ctx.p)


def _eval(ctx: PrimeFieldContext, spec: WeightSpec) -> np.ndarray:
    p = ctx.p
    match spec:
        case AdditiveCharOfRational(f):
            vals, poles = eval_rational_table(ctx, _reduce(ctx, f, True))
            out = ctx.roots[vals].copy()
            out[poles] = 0
            return out
        case MultCharOfRational(j, f):
            vals, poles = eval_rational_table(ctx, _reduce(ctx, f, True))
            out = mult_char_table(ctx, j)[vals]
            out[poles] = 0
            return out
        case HyperKloosterman(m):
            out = np.empty(p, dtype=np.complex128)
            out[1:] = kloosterman_bulk(ctx, m)
            out[0] = kloosterman_at_zero(p, m)
            return out
        case PolyValueCount(P):
            return (_value_histogram(ctx, P) - 1).astype(np.complex128)
        case ValueSetIndicator(P):
            return (_value_histogram(ctx, P) > 0).astype(np.complex128)
        case DeltaAt(a):
            out = np.zeros(p, dtype=np.complex128)
            out[a % p] = 1
            return out
        case Constant(z):
            return np.full(p, complex(z), dtype=np.complex128)
        case PullbackMonomial(inner, c, k):
            base = _eval(ctx, inner)
            out = np.empty(p, dtype=np.complex128)
            # x^k through discrete logs, valid for negative k as well
            xk = ctx.powers[(k * ctx.dlog[1:]) % (p - 1)]
            out[1:] = base[(c % p) * xk % p]
            out[0] = base[0] if k > 0 else 0
            return out
        case Product(a, b):
            return _eval(ctx, a) * _eval(ctx, b)
        case Conjugate(inner):
            return np.conj(_eval(ctx, inner))
        case Scalar(z, inner):
            return complex(z) * _eval(ctx, inner)
    raise ValidationError(f"not a weight spec: {spec!r}")


def bulk_eval(
    ctx: PrimeFieldContext,
    spec: WeightSpec,
    detect: bool = False,
    tolerance: float = 0.1,
    cache_dir: str | os.PathLike | None = None,
) -> WeightTable:
    """Evaluate ``spec`` at every n in F_p.

    Poles and zeros follow the usual convention K(n) = 0 there. With
    ``detect=True`` the exceptional witness is filled in (p <= 2^14).
    With ``cache_dir`` the value table is read from / written to a TLWT file.
    """
    values = None
    path = None
    if cache_dir is not None:
        path = Path(cache_dir) / f"w-{ctx.p}-{spec_hash(spec):016x}.tlwt"
        if path.exists():
            p, h, values = cache.load_table_values(path)
            if p != ctx.p or h != spec_hash(spec):
                values = None
    if values is None:
        values = _eval(ctx, spec)
        if path is not None:
            cache.save_table_values(path, ctx.p, spec_hash(spec), values)
    values.setflags(write=False)
    table = WeightTable(ctx, values, conductor_estimate(spec), spec=spec, label=to_sexpr(spec))
    if detect:
        witness = detect_exceptional(table, tolerance)
        table = WeightTable(ctx, values, table.conductor_estimate, spec, table.label, witness)
    return table


def save_table(table: WeightTable, path: str | os.PathLike) -> None:
    h = spec_hash(table.spec) if table.spec is not None else 0
    cache.save_table_values(path, table.p, h, table.values)


def load_table(ctx: PrimeFieldContext, path: str | os.PathLike, spec: WeightSpec | None = None):
    p, h, values = cache.load_table_values(path)
    if p != ctx.p:
        raise ValidationError(f"table is for p={p}, context has p={ctx.p}")
    if spec is not None and h != spec_hash(spec):
        raise ValidationError("spec hash mismatch")
    values.setflags(write=False)
    cond = conductor_estimate(spec) if spec is not None else 1
    label = to_sexpr(spec) if spec is not None else f"file:{path}"
    return WeightTable(ctx, values, cond, spec=spec, label=label)


# ---------------------------------------------------------------------------
# transforms


def fourier_transform(table: WeightTable) -> WeightTable:
    """Unitary transform  K^(y) = p^{-1/2} sum_x K(x) e(xy/p).

    The trace-function normalisation used in the literature is
    -p^{1/2} K^ (up to the sign convention); only the unitary form is exposed.
    Applying it twice gives x -> K(-x).
    """
    p = table.p
    vals = chirp_dft(table.values, inverse=True) / np.sqrt(p)
    vals.setflags(write=False)
    return WeightTable(table.ctx, vals, table.conductor_estimate, label=f"fourier({table.label})")


def mellin_transform(table: WeightTable) -> np.ndarray:
    """K~(chi_j) = (p-1)^{-1/2} sum_{m != 0} K(m) conj(chi_j(m)), for j = 0..p-2."""
    ctx = table.ctx
    return chirp_dft(table.values[ctx.powers]) / np.sqrt(ctx.p - 1)


def detect_exceptional(
    table: WeightTable, tolerance: float = 0.1, max_p: int = EXCEPTIONAL_MAX_P
) -> Optional[ExceptionalWitness]:
    """Look for c, j, b with K(n) = c chi_j(n) e(bn/p) on F_p^x.

    For every additive shift b, the Mellin spectrum of n -> K(n) e(-bn/p) is
    computed; a witness is returned when one character carries at least
    (1 - tolerance) of the energy. Cost O(p^2 log p).
    """
    ctx = table.ctx
    p = ctx.p
    if p > max_p:
        raise CapacityError(f"exceptional detection is O(p^2 log p); p={p} > max_p={max_p}")
    k_on_units = table.values[ctx.powers]
    energy = float(np.sum(np.abs(k_on_units) ** 2))
    if energy == 0:
        raise ValidationError("table vanishes on F_p^x")
    n = p - 1
    pad = 1 << (2 * n - 1).bit_length()
    rows = max(1, (1 << 21) // pad)
    best_share, best = -1.0, None
    for b0 in range(0, p, rows):
        b = np.arange(b0, min(b0 + rows, p), dtype=np.int64)
        twist = ctx.roots[(-np.outer(b, ctx.powers)) % p]
        spec = chirp_dft(k_on_units * twist) / np.sqrt(n)
        power = np.abs(spec) ** 2
        jmax = np.argmax(power, axis=1)
        share = power[np.arange(len(b)), jmax] / energy
        i = int(np.argmax(share))
        if share[i] > best_share + 1e-12:
            best_share = float(share[i])
            best = (int(jmax[i]), int(b[i]), complex(spec[i, jmax[i]]) / np.sqrt(n))
    if best_share >= 1 - tolerance:
        j, b, c = best
        return ExceptionalWitness(j, b, c, best_share)
    return None


# ---------------------------------------------------------------------------
# polynomial value sets


@dataclass(frozen=True)
class PolyValueStats:
    value_set_size: int
    counts: np.ndarray  # N_P(x) = #{n : P(n) = x} - 1
    indicator: np.ndarray  # 1 on P(F_p)
    density: float  # |P(F_p)| / p
    c1: float  # value-set density on the complement of the critical values
    c1_ok: bool  # |c1 - density| <= deg P * p^{-1/2}


def poly_value_stats(ctx: PrimeFieldContext, P: RatFunc | Sequence[int]) -> PolyValueStats:
    if not isinstance(P, RatFunc):
        P = RatFunc(tuple(int(c) for c in P))
    if not P.is_polynomial:
        raise ValidationError("poly_value_stats takes a polynomial")
    p = ctx.p
    fr = _reduce(ctx, P, need_nonconstant=True)
    vals, _ = eval_rational_table(ctx, fr)
    mult = np.bincount(vals, minlength=p)
    counts = mult - 1
    indicator = (mult > 0).astype(np.int64)
    size = int(indicator.sum())
    # critical values coming from F_p-rational critical points
    deriv = [(i * c) % p for i, c in enumerate(fr.numerator)][1:] or [0]
    crit = np.zeros(p, dtype=bool)
    if any(deriv):
        dvals, _ = eval_rational_table(ctx, RationalFunctionModP(p, tuple(deriv)))
        crit[vals[dvals == 0]] = True
    u = ~crit
    c1 = float(indicator[u].sum() / u.sum())
    density = size / p
    deg = fr.deg_num
    counts.setflags(write=False)
    indicator.setflags(write=False)
    return PolyValueStats(size, counts, indicator, density, c1, abs(c1 - density) <= deg / np.sqrt(p))
