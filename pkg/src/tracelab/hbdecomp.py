"""Heath-Brown's identity and the exponent-optimisation problem behind it.

The identity is evaluated literally on the divisor lattice of n. The
optimisation works on configurations (m_1..m_J, n_1..n_J) of log-sizes
(base p) of the variables produced by the identity; ``eta_config`` is the
power of p saved on such a configuration by the better of the type I_2 and
type II estimates, and ``eta_minimize`` searches a grid of configurations for
the worst case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import CapacityError, DomainError, ValidationError
from .ffield import factorize

# ---------------------------------------------------------------------------
# arithmetic helpers


def divisors(n: int) -> list[int]:
    divs = [1]
    for q, e in factorize(n).items():
        divs = [d * q**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def mobius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def von_mangoldt(n: int) -> float:
    f = factorize(n)
    return math.log(next(iter(f))) if len(f) == 1 else 0.0


def _int_root(X: float, J: int) -> int:
    """Largest integer z with z^J <= X (the cut-off m_i <= X^{1/J})."""
    z = int(round(X ** (1.0 / J)))
    while z**J > X:
        z -= 1
    while (z + 1) ** J <= X:
        z += 1
    return z


def _dconv(f: dict[int, float], g: dict[int, float], divs: list[int]) -> dict[int, float]:
    """Dirichlet convolution restricted to the divisors of n."""
    out = {}
    for d in divs:
        s = 0
        for e in divs:
            if e > d:
                break
            if d % e == 0:
                s += f[e] * g[d // e]
        out[d] = s
    return out


def _hb_terms(n: int, J: int, X: float, last: dict[int, float]) -> float:
    """-sum_j (-1)^j C(J,j) (mu_Z^{*j} * 1^{*(j-1)} * last)(n)."""
    if J < 1:
        raise ValidationError(f"J must be >= 1, got {J}")
    if not 1 <= n < 2 * X:
        raise DomainError(f"need 1 <= n < 2X, got n={n}, X={X}")
    Z = _int_root(X, J)
    divs = divisors(n)
    mu_z = {d: (mobius(d) if d <= Z else 0) for d in divs}
    one = {d: 1 for d in divs}
    total = 0
    acc = dict(last)  # last * 1^{*(j-1)} * mu_Z^{*j}, built incrementally
    for j in range(1, J + 1):
        acc = _dconv(acc, mu_z, divs)
        total -= (-1) ** j * math.comb(J, j) * acc[n]
        acc = _dconv(acc, one, divs)
    return total


def heath_brown_lambda(n: int, J: int, X: float) -> float:
    """Right-hand side of Heath-Brown's identity for Lambda(n), with Z = X^{1/J}.

    Equals Lambda(n) for 1 <= n < 2X.
    """
    divs = divisors(n) if n >= 1 else []
    return float(_hb_terms(n, J, X, {d: math.log(d) for d in divs}))


def heath_brown_mu(n: int, J: int, X: float) -> int:
    """Right-hand side of the analogous identity for mu(n) (j - 1 free factors).

    Exact in integers. Note that it reproduces mu(n) only for
    n < (floor(Z) + 1)^J, in particular for n <= X; for X < n < 2X the
    truncated product of J factors larger than Z can contribute.
    """
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    divs = divisors(n)
    delta = {d: (1 if d == 1 else 0) for d in divs}
    return int(_hb_terms(n, J, X, delta))


def mu_identity_range(J: int, X: float) -> int:
    """Largest n for which the mu identity is guaranteed: (floor(Z)+1)^J - 1."""
    return (_int_root(X, J) + 1) ** J - 1


# ---------------------------------------------------------------------------
# the optimisation problem


@dataclass(frozen=True)
class HBConfiguration:
    x: float
    m: tuple[float, ...]
    n: tuple[float, ...]
    tol: float = 1e-12

    def __post_init__(self):
        J = len(self.m)
        if J < 1 or len(self.n) != J:
            raise ValidationError("m and n must both have length J >= 1")
        if any(v < -self.tol for v in self.m + self.n):
            raise ValidationError("entries must be non-negative")
        if any(v > self.x / J + self.tol for v in self.m):
            raise ValidationError(f"m_i must be <= x/J = {self.x / J}")
        if any(a < b - self.tol for a, b in zip(self.n, self.n[1:])):
            raise ValidationError("n must be non-increasing")
        if abs(sum(self.m) + sum(self.n) - self.x) > self.tol:
            raise ValidationError("entries must sum to x")

    @property
    def J(self) -> int:
        return len(self.m)


@dataclass(frozen=True)
class EtaResult:
    eta: float
    sigma: float | None  # best subsum for the type II branch
    branch: str  # "typeII" or "typeI2"
    grid_step: float | None = None


def _sigma_value(sigma: float, x: float) -> float:
    return min(0.25, sigma / 2, (x - sigma) / 2 - 0.25)


def _typeI2_value(n: Sequence[float]) -> float:
    top = sorted(n, reverse=True) + [0.0, 0.0]
    return 0.125 - max(0.0, 0.5 * (1 - (top[0] + top[1])))


MAX_J = 12


def eta_config(cfg: HBConfiguration) -> EtaResult:
    """eta(m, n) = max( max_sigma min(1/4, sigma/2, (x - sigma)/2 - 1/4),
    1/8 - max(0, (1 - (n_1 + n_2))/2) ), sigma over all 4^J subsums."""
    if cfg.J > MAX_J:
        raise CapacityError(f"J={cfg.J} needs 4^J subsums; limit is J <= {MAX_J}")
    sums = [0.0]
    for v in cfg.m + cfg.n:
        sums = sums + [s + v for s in sums]
    best_sigma, best = None, -math.inf
    for s in sums:
        val = _sigma_value(s, cfg.x)
        if val > best:
            best, best_sigma = val, s
    second = _typeI2_value(cfg.n)
    if second > best:
        return EtaResult(second, None, "typeI2")
    return EtaResult(best, best_sigma, "typeII")


@dataclass
class EtaSearch:
    x: float
    J: int
    grid_step: float  # the step actually used: x / units
    units: int
    min_eta: float
    argmin: HBConfiguration | None
    leaves: int = 0
    notes: list[str] = field(default_factory=list)


def grid_size_estimate(x: float, J: int, grid_step: float) -> float:
    """Rough count of raw grid configurations: multisets of m times partitions of the rest."""
    K = math.ceil(x / grid_step - 1e-9)
    cap = K // J
    m_multisets = math.comb(cap + J, J)
    n_parts = (K + 1) ** (J - 1) / (math.factorial(J - 1) * math.factorial(J))
    return float(m_multisets * max(n_parts, 1.0))


def eta_minimize(x: float, J: int, grid_step: float, max_leaves: int = 50_000_000) -> EtaSearch:
    """Exact minimum of eta over the grid of the constraint simplex.

    Entries are integer multiples of h = x / K with K = ceil(x / grid_step),
    so the sum constraint holds exactly (h <= grid_step). Both m and n are
    enumerated as non-increasing sequences (eta is symmetric in the m_i).
    Branch and bound: the type II part only grows as entries are added, so a
    partial configuration whose subsums already reach the incumbent is cut.
    Ties keep the first configuration in lexicographic order of (n, m) with
    ascending entries at each position.
    """
    if not 0.75 < x <= 1.5:
        raise ValidationError(f"x must lie in (3/4, 3/2], got {x}")
    if not 1 <= J <= 8:
        raise ValidationError(f"J must lie in 1..8, got {J}")
    if grid_step < 1 / 192 - 1e-15:
        raise ValidationError(f"grid_step must be >= 1/192, got {grid_step}")
    K = math.ceil(x / grid_step - 1e-9)
    h = x / K
    cap = math.floor(K / J + 1e-9)  # m_i <= x/J
    # exact rational values of the type II function at sigma = k h
    xr = Fraction(x).limit_denominator(10**9)
    hr = xr / K
    sval = [min(Fraction(1, 4), k * hr / 2, (xr - k * hr) / 2 - Fraction(1, 4)) for k in range(K + 1)]

    def mask_at_least(bound):
        bits = 0
        for k, v in enumerate(sval):
            if v >= bound:
                bits |= 1 << k
        return bits

    full = (1 << (K + 1)) - 1
    state = {"best": Fraction(10**6), "mask": 0, "arg": None, "leaves": 0}

    def typeI2(n1: int, n2: int) -> Fraction:
        return Fraction(1, 8) - max(Fraction(0), (1 - (n1 + n2) * hr) / 2)

    def improve(value, n, m):
        state["best"] = value
        state["mask"] = mask_at_least(value)
        state["arg"] = (tuple(n), tuple(m))

    def search_m(i, remaining, upper, reach, n, m, b2):
        if i == J:
            if remaining:
                return
            state["leaves"] += 1
            if state["leaves"] > max_leaves:
                raise CapacityError(
                    f"grid search exceeded {max_leaves} leaves "
                    f"(raw estimate {grid_size_estimate(x, J, grid_step):.3g})"
                )
            a = max(sval[k] for k in range(K + 1) if reach >> k & 1)
            value = max(a, b2)
            if value < state["best"]:
                improve(value, n, m)
            return
        slots = J - i
        lo = -(-remaining // slots)
        for v in range(lo, min(upper, remaining) + 1):
            r2 = (reach | (reach << v)) & full
            if r2 & state["mask"]:
                continue
            search_m(i + 1, remaining - v, v, r2, n, m + [v], b2)

    def search_n(i, remaining, upper, reach, n, b2):
        if b2 is not None and b2 >= state["best"]:
            return
        if i == J:
            if remaining <= J * cap:
                search_m(0, remaining, cap, reach, n, [], b2)
            return
        slots = J - i
        for v in range(0, min(upper, remaining) + 1):
            # the m's must absorb what the remaining n slots cannot
            if remaining - v > (slots - 1) * min(v, upper) + J * cap:
                continue
            r2 = (reach | (reach << v)) & full
            if r2 & state["mask"]:
                continue
            nb2 = typeI2(n[0], v) if i == 1 else b2
            if i == 0 and J == 1:
                nb2 = typeI2(v, 0)
            search_n(i + 1, remaining - v, v, r2, n + [v], nb2)

    search_n(0, K, K, 1, [], None)
    if state["arg"] is None:
        return EtaSearch(x, J, h, K, math.nan, None, state["leaves"])
    n_units, m_units = state["arg"]
    cfg = HBConfiguration(
        x, tuple(k * h for k in m_units), tuple(k * h for k in n_units), tol=1e-9
    )
    return EtaSearch(x, J, h, K, float(state["best"]), cfg, state["leaves"])


def eta_lower_bound(x: float) -> float:
    """min(1/24, (4x - 3)/24), valid for x > 3/4 once J is large enough."""
    if x <= 0.75:
        raise DomainError(f"x must exceed 3/4, got {x}")
    return min(1 / 24, (4 * x - 3) / 24)


@dataclass(frozen=True)
class DeltaCertificate:
    delta: float
    lower_bound: float
    J_threshold: int  # smallest J with x/J <= x - 1/2 - 4 delta


def delta_certificate(x: float) -> DeltaCertificate:
    """delta = min((4x-3)/24, 1/24) and the smallest J for which it applies."""
    if x <= 0.75:
        raise DomainError(f"x must exceed 3/4, got {x}")
    xr = Fraction(x).limit_denominator(10**9)
    delta = min((4 * xr - 3) / 24, Fraction(1, 24))
    length = xr - Fraction(1, 2) - 4 * delta
    J = math.ceil(xr / length)
    return DeltaCertificate(float(delta), eta_lower_bound(x), J)
