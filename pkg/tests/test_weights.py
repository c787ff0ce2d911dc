import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import e, kl_direct
from tracelab.errors import CapacityError, ValidationError
from tracelab.ffield import build_context, legendre_index, mult_char_table
from tracelab.weights import (
    bulk_eval,
    conductor_estimate,
    detect_exceptional,
    fourier_transform,
    kloosterman_at_zero,
    kloosterman_bulk,
    mellin_transform,
    poly_value_stats,
    table_from_values,
)
from tracelab.wspec import (
    AdditiveCharOfRational,
    DeltaAt,
    HyperKloosterman,
    MultCharOfRational,
    RatFunc,
    parse_spec,
)

KL2_P5 = (3 - math.sqrt(5)) / (2 * math.sqrt(5))


def test_kl2_p5_hand_values(kl2):
    t = kl2(5)
    assert abs(t(1) - KL2_P5) < 1e-9
    assert abs(t(2) - (-1.4472136)) < 1e-7
    for a in range(1, 5):
        assert abs(t(a) - kl_direct(a, 5, 2)) < 1e-9


@pytest.mark.parametrize("p", [3, 7, 53, 101, 211])
def test_kl2_against_direct(p, kl2):
    t = kl2(p)
    for a in range(1, p):
        assert abs(t(a) - kl_direct(a, p, 2)) < 1e-9


def test_kl3_against_direct_p101(ctx_cache):
    ctx = ctx_cache(101)
    fast = kloosterman_bulk(ctx, 3, normalize=False)
    for a in (1, 2, 50, 100):
        d = kl_direct(a, 101, 3, normalize=False)
        assert abs(fast[a - 1] - d) <= 1e-6 * 101


def test_value_at_zero_matches_literal_sum():
    # all tuples with product 0: total minus the unit tuples
    for p in (5, 7):
        for m in (2, 3):
            roots = [e(x / p) for x in range(p)]
            import itertools

            s = sum(
                math.prod(roots[x] for x in xs)
                for xs in itertools.product(range(p), repeat=m)
                if math.prod(xs) % p == 0
            )
            assert abs(s / p ** ((m - 1) / 2) - kloosterman_at_zero(p, m)) < 1e-9
    assert abs(kloosterman_at_zero(11, 2) + 11**-0.5) < 1e-15


@pytest.mark.parametrize("p", [5, 101, 1009, 10007])
def test_mean_identity(p, kl2):
    assert abs(kl2(p).values[1:].sum() - p**-0.5) < 1e-8


@pytest.mark.parametrize("p", [101, 1009])
def test_weil_bound_and_reality(p, kl2):
    v = kl2(p).values[1:]
    assert np.max(np.abs(v)) <= 2 + 1e-9
    assert np.max(np.abs(v.imag)) <= 1e-9


def test_klm_deligne_bound(ctx_cache):
    for m in (3, 4):
        v = kloosterman_bulk(ctx_cache(211), m)
        assert np.max(np.abs(v)) <= m + 1e-6


def test_kl_requires_m_at_least_2(ctx_cache):
    with pytest.raises(ValidationError):
        kloosterman_bulk(ctx_cache(7), 1)


def test_simple_specs(ctx_cache):
    ctx = ctx_cache(7)
    t = bulk_eval(ctx, DeltaAt(3))
    assert list(t.values) == [0, 0, 0, 1, 0, 0, 0]
    add = bulk_eval(ctx, AdditiveCharOfRational(RatFunc((0, 1))))
    assert abs(add.values.sum()) < 1e-12
    assert np.allclose(add.values, [e(n / 7) for n in range(7)])


def test_poles_are_zero(ctx_cache):
    ctx = ctx_cache(11)
    t = bulk_eval(ctx, parse_spec("(addchar (rat (poly 1) (poly 0 1)))"))
    assert t(0) == 0
    assert abs(t(2) - e(6 / 11)) < 1e-12  # 1/2 = 6 mod 11
    t = bulk_eval(ctx, MultCharOfRational(5, RatFunc((0, 0, 1))))
    assert t(0) == 0 and np.allclose(np.abs(t.values[1:]), 1)


def test_degenerate_spec_rejected(ctx_cache):
    with pytest.raises(ValidationError):
        bulk_eval(ctx_cache(7), AdditiveCharOfRational(RatFunc((1, 7))))


def test_pullback_and_product(ctx_cache):
    ctx = ctx_cache(31)
    spec = parse_spec("(product (pullback (kloosterman 2) 3 2) (addchar (poly 0 2)))")
    t = bulk_eval(ctx, spec)
    kl = bulk_eval(ctx, HyperKloosterman(2))
    for n in range(1, 31):
        assert abs(t(n) - kl(3 * n * n) * e(2 * n / 31)) < 1e-12
    inv = bulk_eval(ctx, parse_spec("(pullback (delta 2) 1 -1)"))
    assert inv(16) == 1 and inv(0) == 0  # 1/16 = 2 mod 31


def test_conductor_examples():
    assert conductor_estimate(AdditiveCharOfRational(RatFunc((0, 0, 0, 1)))) == 5
    assert conductor_estimate(HyperKloosterman(4)) == 7
    assert conductor_estimate(MultCharOfRational(1, RatFunc((0, -1, 1)))) == 4
    assert conductor_estimate(MultCharOfRational(1, RatFunc((0, 0, 1)))) == 3  # one distinct zero


def _random_table(ctx, seed):
    rng = np.random.default_rng(seed)
    return table_from_values(ctx, rng.normal(size=ctx.p) + 1j * rng.normal(size=ctx.p))


def test_fourier_examples(ctx_cache):
    ctx = ctx_cache(13)
    d0 = fourier_transform(bulk_eval(ctx, DeltaAt(0)))
    assert np.allclose(d0.values, 13**-0.5)
    a = 4
    f = fourier_transform(bulk_eval(ctx, AdditiveCharOfRational(RatFunc((0, a)))))
    want = np.zeros(13)
    want[(-a) % 13] = 13**0.5
    assert np.allclose(f.values, want, atol=1e-12)


@given(st.integers(0, 2**31))
@settings(max_examples=20)
def test_fourier_parseval_and_reflection(seed):
    ctx = build_context(101)
    t = _random_table(ctx, seed)
    f = fourier_transform(t)
    assert abs(np.sum(np.abs(t.values) ** 2) - np.sum(np.abs(f.values) ** 2)) < 1e-8 * np.sum(np.abs(t.values) ** 2)
    ff = fourier_transform(f)
    assert np.max(np.abs(ff.values - t.values[(-np.arange(101)) % 101])) < 1e-8


def test_mellin_examples(ctx_cache):
    ctx = ctx_cache(31)
    j0 = 7
    m = mellin_transform(table_from_values(ctx, mult_char_table(ctx, j0)))
    assert abs(abs(m[j0]) ** 2 - 30) < 1e-9
    assert np.max(np.abs(np.delete(m, j0))) < 1e-9
    ones = np.ones(31)
    ones[0] = 0
    m = mellin_transform(table_from_values(ctx, ones))
    assert abs(m[0] - 30**0.5) < 1e-9 and np.max(np.abs(m[1:])) < 1e-9


def test_mellin_matches_definition(ctx_cache):
    ctx = ctx_cache(29)
    t = _random_table(ctx, 3)
    m = mellin_transform(t)
    for j in (0, 1, 5, 14):
        chi = mult_char_table(ctx, j)
        want = np.sum(t.values[1:] * np.conj(chi[1:])) / 28**0.5
        assert abs(m[j] - want) < 1e-10


def test_mellin_parseval_kl2(kl2):
    t = kl2(101)
    m = mellin_transform(t)
    assert abs(np.sum(np.abs(m) ** 2) - np.sum(np.abs(t.values[1:]) ** 2)) < 1e-8


def test_detect_legendre_and_twisted(ctx_cache):
    ctx = ctx_cache(13)
    j = legendre_index(13)
    w = detect_exceptional(bulk_eval(ctx, MultCharOfRational(j, RatFunc((0, 1)))))
    assert w is not None and (w.j, w.b) == (j, 0) and abs(w.c - 1) < 1e-9
    spec = parse_spec(f"(product (multchar 5 (poly 0 1)) (addchar (poly 0 3)))")
    w = detect_exceptional(bulk_eval(ctx, spec))
    assert w is not None and (w.j, w.b) == (5, 3)


@pytest.mark.parametrize("p", [101, 211])
def test_detect_rejects_kloosterman(p, kl2, ctx_cache):
    assert detect_exceptional(kl2(p), 0.1) is None
    assert detect_exceptional(bulk_eval(ctx_cache(p), HyperKloosterman(3)), 0.1) is None


def test_detect_capacity(ctx_cache):
    with pytest.raises(CapacityError):
        detect_exceptional(bulk_eval(ctx_cache(101), DeltaAt(1)), max_p=50)


def test_bulk_eval_detect_flag(ctx_cache):
    t = bulk_eval(ctx_cache(13), parse_spec("(multchar 6 (poly 0 1))"), detect=True)
    assert t.exceptional is not None


def test_poly_value_stats_examples(ctx_cache):
    s = poly_value_stats(ctx_cache(7), (0, 1))
    assert s.value_set_size == 7 and not s.counts.any()
    s = poly_value_stats(ctx_cache(7), (0, 0, 1))
    assert s.value_set_size == 4 and set(np.flatnonzero(s.indicator)) == {0, 1, 2, 4}
    s = poly_value_stats(ctx_cache(7), (-1, 0, 1))
    assert s.counts.sum() == 0
    with pytest.raises(ValidationError):
        poly_value_stats(ctx_cache(7), (3, 7))


@given(st.lists(st.integers(-20, 20), min_size=2, max_size=5).filter(lambda c: c[-1] % 101 and any(c[1:])))
def test_value_counts_sum_to_zero(coeffs):
    s = poly_value_stats(build_context(101), coeffs)
    assert s.counts.sum() == 0
    assert s.value_set_size == int(s.indicator.sum())
