"""Symbolic weight specifications and their s-expression text form.

Grammar (whitespace separated, integers in decimal, coefficients ascending)::

    F      := (poly c0 c1 ... cd) | (rat F_num F_den)
    WEIGHT := (addchar F)                 n -> e(f(n)/p), 0 at poles
            | (multchar j F)              n -> chi_j(f(n)), 0 at zeros/poles
            | (kloosterman m)             n -> Kl_m(n; p)
            | (valuecount P)              n -> #{x : P(x) = n} - 1
            | (valueset P)                n -> 1 if n in P(F_p) else 0
            | (delta a)                   n -> [n = a]
            | (const re [im])             n -> re + i im
            | (pullback WEIGHT c k)       n -> WEIGHT(c n^k)
            | (product WEIGHT WEIGHT)
            | (conj WEIGHT)
            | (scalar re im WEIGHT)

``to_sexpr`` emits the canonical form: single spaces, ``rat`` only when the
denominator is not 1, ``scalar``/``const`` always with both components, and
floats printed with ``repr``. The 64-bit spec hash is the first eight bytes
(little-endian) of BLAKE2b over the canonical text.

Example: ``(product (kloosterman 2) (addchar (poly 0 2)))`` is Kl_2(n)e(2n/p).
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from typing import Union

from .errors import ValidationError


@dataclass(frozen=True)
class RatFunc:
    """Rational function over Z with ascending integer coefficients."""

    num: tuple[int, ...]
    den: tuple[int, ...] = (1,)

    @classmethod
    def poly(cls, *coeffs: int) -> "RatFunc":
        return cls(tuple(int(c) for c in coeffs))

    @property
    def is_polynomial(self) -> bool:
        return self.den == (1,)


def X() -> RatFunc:
    return RatFunc((0, 1))


@dataclass(frozen=True)
class AdditiveCharOfRational:
    f: RatFunc


@dataclass(frozen=True)
class MultCharOfRational:
    j: int
    f: RatFunc


@dataclass(frozen=True)
class HyperKloosterman:
    m: int

    def __post_init__(self):
        if self.m < 2:
            raise ValidationError(f"hyper-Kloosterman needs m >= 2, got {self.m}")


@dataclass(frozen=True)
class PolyValueCount:
    P: RatFunc

    def __post_init__(self):
        if not self.P.is_polynomial:
            raise ValidationError("valuecount takes a polynomial")


@dataclass(frozen=True)
class ValueSetIndicator:
    P: RatFunc

    def __post_init__(self):
        if not self.P.is_polynomial:
            raise ValidationError("valueset takes a polynomial")


@dataclass(frozen=True)
class DeltaAt:
    a: int


@dataclass(frozen=True)
class Constant:
    z: complex


@dataclass(frozen=True)
class PullbackMonomial:
    inner: "WeightSpec"
    c: int
    k: int

    def __post_init__(self):
        if self.k == 0:
            raise ValidationError("pullback exponent k must be non-zero")


@dataclass(frozen=True)
class Product:
    lhs: "WeightSpec"
    rhs: "WeightSpec"


@dataclass(frozen=True)
class Conjugate:
    inner: "WeightSpec"


@dataclass(frozen=True)
class Scalar:
    z: complex
    inner: "WeightSpec"


WeightSpec = Union[
    AdditiveCharOfRational,
    MultCharOfRational,
    HyperKloosterman,
    PolyValueCount,
    ValueSetIndicator,
    DeltaAt,
    Constant,
    PullbackMonomial,
    Product,
    Conjugate,
    Scalar,
]


# ---------------------------------------------------------------------------
# serialisation


def _num(x: float) -> str:
    x = float(x)
    return str(int(x)) if x.is_integer() and abs(x) < 2**53 else repr(x)


def _f(f: RatFunc) -> str:
    poly = lambda c: "(poly " + " ".join(str(int(v)) for v in (c or (0,))) + ")"
    if f.is_polynomial:
        return poly(f.num)
    return f"(rat {poly(f.num)} {poly(f.den)})"


def to_sexpr(spec: WeightSpec) -> str:
    """Canonical text form of a spec."""
    match spec:
        case AdditiveCharOfRational(f):
            return f"(addchar {_f(f)})"
        case MultCharOfRational(j, f):
            return f"(multchar {int(j)} {_f(f)})"
        case HyperKloosterman(m):
            return f"(kloosterman {m})"
        case PolyValueCount(P):
            return f"(valuecount {_f(P)})"
        case ValueSetIndicator(P):
            return f"(valueset {_f(P)})"
        case DeltaAt(a):
            return f"(delta {int(a)})"
        case Constant(z):
            z = complex(z)
            return f"(const {_num(z.real)} {_num(z.imag)})"
        case PullbackMonomial(inner, c, k):
            return f"(pullback {to_sexpr(inner)} {int(c)} {int(k)})"
        case Product(a, b):
            return f"(product {to_sexpr(a)} {to_sexpr(b)})"
        case Conjugate(inner):
            return f"(conj {to_sexpr(inner)})"
        case Scalar(z, inner):
            z = complex(z)
            return f"(scalar {_num(z.real)} {_num(z.imag)} {to_sexpr(inner)})"
    raise ValidationError(f"not a weight spec: {spec!r}")


def spec_hash(spec: WeightSpec) -> int:
    digest = hashlib.blake2b(to_sexpr(spec).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def _tokenize(text: str) -> list:
    """Nested lists of atoms."""
    stack: list[list] = [[]]
    for tok in _TOKEN.findall(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise ValidationError(f"unbalanced ')' in {text!r}")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1 or len(stack[0]) != 1:
        raise ValidationError(f"malformed s-expression: {text!r}")
    return stack[0][0]


def _int(tok) -> int:
    try:
        return int(tok)
    except (TypeError, ValueError):
        raise ValidationError(f"expected an integer, got {tok!r}") from None


def _float(tok) -> float:
    try:
        return float(tok)
    except (TypeError, ValueError):
        raise ValidationError(f"expected a number, got {tok!r}") from None


def _parse_f(node) -> RatFunc:
    if not isinstance(node, list) or not node:
        raise ValidationError(f"expected (poly ...) or (rat ...), got {node!r}")
    head = node[0]
    if head == "poly":
        if len(node) < 2:
            raise ValidationError("(poly) needs at least one coefficient")
        coeffs = [_int(t) for t in node[1:]]
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        return RatFunc(tuple(coeffs))
    if head == "rat" and len(node) == 3:
        num, den = _parse_f(node[1]), _parse_f(node[2])
        if not (num.is_polynomial and den.is_polynomial):
            raise ValidationError("rat takes two polynomials")
        return RatFunc(num.num, den.num)
    raise ValidationError(f"unknown rational-function form {node!r}")


def _parse(node) -> WeightSpec:
    if not isinstance(node, list) or not node:
        raise ValidationError(f"expected a weight form, got {node!r}")
    head, args = node[0], node[1:]
    arity = {
        "addchar": 1, "multchar": 2, "kloosterman": 1, "valuecount": 1,
        "valueset": 1, "delta": 1, "pullback": 3, "product": 2, "conj": 1,
    }
    if head in arity and len(args) != arity[head]:
        raise ValidationError(f"({head} ...) takes {arity[head]} arguments, got {len(args)}")
    match head:
        case "addchar":
            return AdditiveCharOfRational(_parse_f(args[0]))
        case "multchar":
            return MultCharOfRational(_int(args[0]), _parse_f(args[1]))
        case "kloosterman":
            return HyperKloosterman(_int(args[0]))
        case "valuecount":
            return PolyValueCount(_parse_f(args[0]))
        case "valueset":
            return ValueSetIndicator(_parse_f(args[0]))
        case "delta":
            return DeltaAt(_int(args[0]))
        case "const" if len(args) in (1, 2):
            im = _float(args[1]) if len(args) == 2 else 0.0
            return Constant(complex(_float(args[0]), im))
        case "pullback":
            return PullbackMonomial(_parse(args[0]), _int(args[1]), _int(args[2]))
        case "product":
            return Product(_parse(args[0]), _parse(args[1]))
        case "conj":
            return Conjugate(_parse(args[0]))
        case "scalar" if len(args) in (2, 3):
            im = _float(args[1]) if len(args) == 3 else 0.0
            return Scalar(complex(_float(args[0]), im), _parse(args[-1]))
    raise ValidationError(f"unknown weight form {node!r}")


def parse_spec(text: str) -> WeightSpec:
    """Parse the s-expression text form into a spec tree."""
    return _parse(_tokenize(text.strip()))
