import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import e, legendre
from tracelab.correl import (
    completion_bound,
    correlation_row,
    correlation_sum,
    incomplete_correlation,
    paucity_scan,
    symmetric_residue,
)
from tracelab.errors import CapacityError, DomainError, ValidationError
from tracelab.ffield import build_context, legendre_index
from tracelab.weights import bulk_eval, table_from_values
from tracelab.wspec import AdditiveCharOfRational, Constant, DeltaAt, MultCharOfRational, RatFunc, parse_spec


def naive_c(values, p, m1, m2, h):
    return sum(np.conj(values[m1 * z % p]) * values[m2 * z % p] * e(h * z / p) for z in range(p))


def legendre_table(p):
    ctx = build_context(p)
    return bulk_eval(ctx, MultCharOfRational(legendre_index(p), RatFunc((0, 1))))


def test_legendre_closed_form():
    t = legendre_table(101)
    for m in (1, 2, 3, 50):
        assert abs(correlation_sum(t, m, 1, 0) - legendre(m, 101) * 100) < 1e-9


def test_diagonal_is_energy(kl2):
    t = kl2(101)
    assert abs(correlation_sum(t, 1, 1, 0) - np.sum(np.abs(t.values) ** 2)) < 1e-9


@given(st.integers(1, 100), st.integers(1, 100), st.integers(0, 100))
def test_reduction_relation(m1, m2, h):
    t = bulk_eval(build_context(101), parse_spec("(kloosterman 2)"))
    i2 = pow(m2, -1, 101)
    lhs = correlation_sum(t, m1, m2, h)
    rhs = correlation_sum(t, m1 * i2, 1, h * i2)
    assert abs(lhs - rhs) < 1e-9


def test_row_matches_naive_loop(kl2):
    t = kl2(53)
    for m1, m2 in ((1, 1), (2, 7), (52, 3)):
        row = correlation_row(t, m1, m2)
        for h in range(53):
            assert abs(row[h] - naive_c(t.values, 53, m1, m2, h)) < 1e-9
            assert abs(row[h] - correlation_sum(t, m1, m2, h)) < 1e-9


def test_zero_multiplier_rejected(kl2):
    with pytest.raises(DomainError):
        correlation_sum(kl2(101), 0, 1, 0)
    with pytest.raises(DomainError):
        correlation_row(kl2(101), 1, 101)


def test_symmetric_residue():
    assert [symmetric_residue(h, 7) for h in range(7)] == [0, 1, 2, 3, -3, -2, -1]


def test_incomplete_endpoints_and_oracle(kl2):
    t = kl2(101)
    v = t.values
    assert abs(incomplete_correlation(t, 1, 1, 1) - (abs(v[1]) ** 2 + abs(v[2]) ** 2)) < 1e-12
    full = sum(abs(v[n % 101]) ** 2 for n in range(51, 203))
    assert abs(incomplete_correlation(t, 1, 1, 101) - full) < 1e-9
    rng = np.random.default_rng(5)
    r = table_from_values(build_context(101), rng.normal(size=101) + 1j * rng.normal(size=101))
    want = sum(np.conj(r.values[3 * n % 101]) * r.values[5 * n % 101] for n in range(20, 81))
    assert abs(incomplete_correlation(r, 3, 5, 40) - want) < 1e-9
    with pytest.raises(ValidationError):
        incomplete_correlation(t, 1, 1, 0)


def test_completion_bound(kl2):
    t = kl2(101)
    b = completion_bound(t, 2, 3, 40)
    assert b >= 0
    assert abs(incomplete_correlation(t, 2, 3, 40)) <= 10 * b
    ones = bulk_eval(build_context(101), Constant(1))
    assert abs(completion_bound(ones, 1, 1, 40) - 40) < 1e-9


def test_scan_counts(kl2):
    r = paucity_scan(kl2(101), 4.0)
    assert r.count <= 10
    assert r.scanned == 100 * 101
    assert all(a > 4 * 101**0.5 for _, _, a in r.exceptional)
    assert [a for _, _, a in r.exceptional] == sorted((a for _, _, a in r.exceptional), reverse=True)
    assert paucity_scan(legendre_table(101)).count >= 100
    assert paucity_scan(bulk_eval(build_context(101), DeltaAt(1))).count == 0


def test_scan_against_brute_force_p31():
    t = bulk_eval(build_context(31), parse_spec("(kloosterman 2)"))
    r = paucity_scan(t, 1.0)
    brute = sorted(
        (m, h) for m in range(1, 31) for h in range(31) if abs(naive_c(t.values, 31, m, 1, h)) > 31**0.5
    )
    assert sorted((m, h) for m, h, _ in r.exceptional) == brute


def test_scan_thread_independent(kl2):
    a = paucity_scan(kl2(211), 3.0, threads=1)
    b = paucity_scan(kl2(211), 3.0, threads=4)
    assert a.to_json() == b.to_json()


def test_scan_capacity(kl2):
    with pytest.raises(CapacityError):
        paucity_scan(kl2(211), max_p=200)


@pytest.mark.parametrize("spec", ["(kloosterman 3)", "(addchar (poly 0 0 0 1))"])
def test_non_exceptional_weights_bounded(spec):
    for p in (101, 211):
        assert paucity_scan(bulk_eval(build_context(p), parse_spec(spec))).count <= 10


def test_exceptional_row_at_matching_shift():
    # K = chi(n) e(3n/p): C(m, 1, h) is large along h = 3(1 - m)
    p = 101
    t = bulk_eval(build_context(p), parse_spec("(product (multchar 10 (poly 0 1)) (addchar (poly 0 3)))"))
    for m in range(1, p):
        assert abs(correlation_sum(t, m, 1, 3 * (m - 1) % p)) > 4 * p**0.5
