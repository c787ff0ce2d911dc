"""Correlation sums C(m1, m2, h; K), completion bounds and the paucity scan."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .dft import chirp_dft
from .errors import CapacityError, DomainError, ValidationError
from .weights import WeightTable

SCAN_MAX_P = 1 << 12
DEFAULT_THRESHOLD = 4.0


def _unit(p: int, m: int) -> int:
    m %= p
    if m == 0:
        raise DomainError("multiplier must be a unit mod p")
    return m


def correlation_sum(table: WeightTable, m1: int, m2: int, h: int) -> complex:
    """sum_{z in F_p} conj(K(m1 z)) K(m2 z) e(hz/p)."""
    p = table.p
    m1, m2 = _unit(p, m1), _unit(p, m2)
    z = np.arange(p, dtype=np.int64)
    k = table.values
    terms = np.conj(k[m1 * z % p]) * k[m2 * z % p] * table.ctx.roots[h * z % p]
    return complex(np.sum(terms))


def correlation_row(table: WeightTable, m1: int, m2: int) -> np.ndarray:
    """C(m1, m2, h) for h = 0..p-1 from one transform of z -> conj(K(m1 z)) K(m2 z)."""
    p = table.p
    m1, m2 = _unit(p, m1), _unit(p, m2)
    z = np.arange(p, dtype=np.int64)
    prod = np.conj(table.values[m1 * z % p]) * table.values[m2 * z % p]
    return chirp_dft(prod, inverse=True)


def symmetric_residue(h: int, p: int) -> int:
    """Representative of h mod p in (-p/2, p/2]."""
    h %= p
    return h - p if h > p // 2 else h


def incomplete_correlation(table: WeightTable, m1: int, m2: int, N: int) -> complex:
    """sum over integers ceil(N/2) <= n <= 2N of conj(K(m1 n)) K(m2 n)."""
    p = table.p
    if not 1 <= N <= p:
        raise ValidationError(f"need 1 <= N <= p, got N={N}")
    n = np.arange(-(-N // 2), 2 * N + 1, dtype=np.int64)
    k = table.values
    return complex(np.sum(np.conj(k[m1 * n % p]) * k[m2 * n % p]))


def completion_bound(table: WeightTable, m1: int, m2: int, N: int) -> float:
    """(N/p)|C(m1,m2,0)| + sum_{0<|h|<=p/2} min(1/|h|, N/p) |C(m1,m2,h)|."""
    p = table.p
    if not 1 <= N <= p:
        raise ValidationError(f"need 1 <= N <= p, got N={N}")
    c = np.abs(correlation_row(table, m1, m2))
    h = np.arange(p)
    h = np.abs(np.where(h > p // 2, h - p, h)).astype(np.float64)
    w = np.full(p, N / p)
    w[1:] = np.minimum(1.0 / h[1:], N / p)
    return float(np.sum(w * c))


@dataclass
class CorrelationReport:
    p: int
    weight_spec: str
    threshold: float
    exceptional: list[tuple[int, int, float]] = field(default_factory=list)
    max_abs_c: float = 0.0
    scanned: int = 0

    @property
    def count(self) -> int:
        return len(self.exceptional)

    def to_json(self) -> str:
        d = asdict(self)
        d["exceptional"] = [{"m": m, "h": h, "abs_c": a} for m, h, a in self.exceptional]
        return json.dumps(d)


def _scan_rows(values: np.ndarray, ms: np.ndarray, p: int, cut: float):
    z = np.arange(p, dtype=np.int64)
    prod = np.conj(values[np.outer(ms, z) % p]) * values[z]
    c = np.abs(chirp_dft(prod, inverse=True))
    hit_m, hit_h = np.nonzero(c > cut)
    found = [(int(ms[i]), int(h), float(c[i, h])) for i, h in zip(hit_m, hit_h)]
    return found, float(c.max())


def paucity_scan(
    table: WeightTable,
    threshold: float = DEFAULT_THRESHOLD,
    max_p: int = SCAN_MAX_P,
    threads: int | None = None,
    block: int = 64,
) -> CorrelationReport:
    """|C(m, 1, h)| over all (m, h) in F_p^x x F_p, listing those above threshold*sqrt(p).

    Row m is p^{1/2} times the unitary transform of z -> conj(K(mz)) K(z), so
    the whole scan is p - 1 transforms. Rows are processed in fixed blocks;
    the result does not depend on ``threads``.
    """
    p = table.p
    if p > max_p:
        raise CapacityError(f"paucity scan is O(p^2 log p); p={p} > max_p={max_p}")
    cut = threshold * math.sqrt(p)
    blocks = [np.arange(s, min(s + block, p), dtype=np.int64) for s in range(1, p, block)]
    work = lambda ms: _scan_rows(table.values, ms, p, cut)
    if threads and threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(work, blocks))
    else:
        results = [work(ms) for ms in blocks]
    found = [hit for hits, _ in results for hit in hits]
    found.sort(key=lambda t: (-t[2], t[0], t[1]))
    return CorrelationReport(
        p=p,
        weight_spec=table.label,
        threshold=threshold,
        exceptional=found,
        max_abs_c=max(mx for _, mx in results),
        scanned=(p - 1) * p,
    )
