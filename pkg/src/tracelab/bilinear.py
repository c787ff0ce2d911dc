"""Type I and type II bilinear forms in a weight, with the matching bound templates.

The bounds carry an unknown constant depending polynomially on the conductor;
it is fixed to 1 and the observed ratio |sum| / bound is reported instead.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .ffield import mult_char_table
from .weights import WeightTable


def support(M: float) -> np.ndarray:
    """Integers in [M/2, 2M]."""
    return np.arange(math.ceil(M / 2), math.floor(2 * M) + 1, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class BilinearInstance:
    """alpha on the integers of [M/2, 2M] and beta on those of [N/2, 2N].

    ``alpha[i]`` is the coefficient of m = ceil(M/2) + i, likewise for beta.
    """

    table: WeightTable
    alpha: np.ndarray
    beta: np.ndarray
    M: float
    N: float

    def __post_init__(self):
        for name, seq, L in (("alpha", self.alpha, self.M), ("beta", self.beta, self.N)):
            if len(seq) != len(support(L)):
                raise ValidationError(
                    f"{name} must have one entry per integer in [{L}/2, {2 * L}], "
                    f"got {len(seq)} for {len(support(L))}"
                )

    @property
    def ms(self) -> np.ndarray:
        return support(self.M)

    @property
    def ns(self) -> np.ndarray:
        return support(self.N)

    @property
    def alpha_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.alpha) ** 2)))

    @property
    def beta_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.beta) ** 2)))


def type2_sum(inst: BilinearInstance) -> complex:
    """sum_{m, n, p not | m} alpha_m beta_n K(mn)."""
    p = inst.table.p
    ms, ns = inst.ms, inst.ns
    keep = ms % p != 0
    kmat = inst.table.values[np.outer(ms[keep] % p, ns % p) % p]
    return complex(inst.alpha[keep] @ kmat @ inst.beta)


def type2_bound(inst: BilinearInstance, constant: float = 1.0) -> float:
    """||a|| ||b|| (MN)^{1/2} (p^{-1/4} + M^{-1/2} + p^{1/4} (log p)^{1/2} N^{-1/2})."""
    p, M, N = inst.table.p, inst.M, inst.N
    paren = p ** -0.25 + M**-0.5 + p**0.25 * math.sqrt(math.log(p)) * N**-0.5
    return constant * inst.alpha_norm * inst.beta_norm * math.sqrt(M * N) * paren


def type1_sum(table: WeightTable, alpha: np.ndarray, M: float, N: int) -> complex:
    """sum_{p not | m} alpha_m sum_{1 <= n <= N} K(mn), alpha on the integers of [M/2, 2M]."""
    p = table.p
    ms = support(M)
    if len(alpha) != len(ms):
        raise ValidationError("alpha does not match the support of M")
    keep = ms % p != 0
    ns = np.arange(1, int(N) + 1, dtype=np.int64)
    kmat = table.values[np.outer(ms[keep] % p, ns % p) % p]
    return complex(np.asarray(alpha)[keep] @ kmat.sum(axis=1))


def type1_bound(table: WeightTable, alpha: np.ndarray, N: int, constant: float = 1.0) -> float:
    """(sum |alpha_m|) N (p^{-1/2} + p^{1/2} log p / N)."""
    p = table.p
    l1 = float(np.sum(np.abs(alpha)))
    return constant * l1 * N * (p**-0.5 + math.sqrt(p) * math.log(p) / N)


# ---------------------------------------------------------------------------
# coefficient generators (all seeded)


def random_signs(rng: np.random.Generator, L: float) -> np.ndarray:
    return rng.choice([-1.0, 1.0], size=len(support(L))).astype(np.complex128)


def random_units(rng: np.random.Generator, L: float) -> np.ndarray:
    return np.exp(2j * np.pi * rng.random(len(support(L))))


def chi_matched(table: WeightTable, j: int, L: float) -> np.ndarray:
    """conj(chi_j(n)) on the support of L; the adversarial choice for K = chi_j."""
    chi = mult_char_table(table.ctx, j)
    return np.conj(chi[support(L) % table.p])


@dataclass
class BilinearReport:
    p: int
    M: float
    N: float
    weight_spec: str
    sum_re: float
    sum_im: float
    bound: float
    ratio: float
    seed: int | None

    def to_json(self) -> str:
        return json.dumps(self.__dict__)


def type2_report(inst: BilinearInstance, seed: int | None = None) -> BilinearReport:
    s = type2_sum(inst)
    b = type2_bound(inst)
    return BilinearReport(inst.table.p, inst.M, inst.N, inst.table.label, s.real, s.imag, b, abs(s) / b, seed)
