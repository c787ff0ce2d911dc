import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from oracles import kl_composite_direct, kl_direct, primes_naive
from tracelab.errors import CapacityError, TracelabError, ValidationError
from tracelab.ffield import build_context
from tracelab.satotate import (
    all_argument_report,
    kloosterman_angles,
    kloosterman_composite,
    kloosterman_prime,
    largesums_experiment,
    prime_argument_sample,
    prime_arguments,
    sato_tate_cdf,
    semiprime_pairs,
    twisted_product,
)


def test_cdf_matches_density():
    for t in (0.3, 1.0, 2.5, math.pi):
        ref = integrate.quad(lambda s: 2 / math.pi * math.sin(s) ** 2, 0, t)[0]
        assert sato_tate_cdf(t) == pytest.approx(ref, abs=1e-12)
    assert sato_tate_cdf(0.0) == 0.0 and sato_tate_cdf(math.pi) == pytest.approx(1.0)


def test_angle_example(ctx_cache):
    theta = kloosterman_angles(ctx_cache(5))
    assert theta[0] == pytest.approx(math.acos(0.0854102), abs=1e-7)
    assert 2 * math.cos(theta[0]) == pytest.approx(kl_direct(1, 5, 2).real, abs=1e-12)


def test_angles_reject_bad_table(ctx_cache):
    ctx = ctx_cache(7)
    with pytest.raises(TracelabError):
        kloosterman_angles(ctx, np.full(6, 2.5 + 0j))
    with pytest.raises(TracelabError):
        kloosterman_angles(ctx, np.full(6, 1 + 0.1j))


def test_composite_examples():
    assert kloosterman_composite(1, 4) == pytest.approx(-1, abs=1e-12)
    v = kloosterman_composite(1, 35)
    assert v == pytest.approx(kl_composite_direct(1, 35), abs=1e-12)
    assert v == pytest.approx(twisted_product(1, 5, 7), abs=1e-12)


@given(st.integers(1, 200), st.sampled_from([2, 6, 9, 12, 21, 25, 77, 100, 143]))
@settings(max_examples=40)
def test_composite_against_oracle(a, c):
    assert kloosterman_composite(a, c) == pytest.approx(kl_composite_direct(a, c), abs=1e-10)


def test_composite_kl3_prime_modulus():
    for a in (1, 2, 5):
        assert kloosterman_composite(a, 13, 3) == pytest.approx(kl_direct(a, 13, 3), abs=1e-10)


def test_composite_kl3_twisted():
    assert kloosterman_composite(3, 35, 3) == pytest.approx(twisted_product(3, 5, 7, 3), abs=1e-10)


def test_twisted_multiplicativity_random_pairs():
    rng = np.random.default_rng(7)
    ps = primes_naive(500)
    for _ in range(100):
        p, q = rng.choice(ps, 2, replace=False)
        a = int(rng.integers(1, 10**6))
        p, q = int(p), int(q)
        assert twisted_product(a, p, q) == pytest.approx(kloosterman_composite(a, p * q), abs=1e-9)


def test_composite_is_real():
    for c in (15, 91, 221):
        assert abs(kloosterman_composite(2, c).imag) < 1e-10


def test_kloosterman_prime_degenerate():
    assert kloosterman_prime(0, 7, 2) == pytest.approx(-1 / math.sqrt(7))
    assert kloosterman_prime(1, 2, 2) == pytest.approx(kl_composite_direct(1, 2))


def test_composite_guards():
    with pytest.raises(ValidationError):
        kloosterman_composite(1, 1)
    with pytest.raises(ValidationError):
        kloosterman_composite(1, 10, 4)
    with pytest.raises(CapacityError):
        kloosterman_composite(1, 10007, 3)
    with pytest.raises(ValidationError):
        twisted_product(1, 7, 7)


def test_all_argument_ks_small(ctx_cache):
    r = all_argument_report(ctx_cache(10007))
    assert r.sample_size == 10006 and r.ks < 0.02
    assert sum(r.histogram) == r.sample_size and len(r.bin_edges) == len(r.histogram) + 1


def test_ks_invariant_under_shuffle(ctx_cache, rng):
    theta = kloosterman_angles(ctx_cache(1009))
    a = stats.kstest(theta, sato_tate_cdf).statistic
    b = stats.kstest(rng.permutation(theta), sato_tate_cdf).statistic
    assert a == b


def test_prime_arguments():
    a = prime_arguments(101, 2, 50)
    qs = [q for q in primes_naive(100) if q >= 50 and q != 101]
    assert a.tolist() == [pow(q, -2, 101) for q in qs]
    with pytest.raises(ValidationError):
        prime_arguments(101, 2, 1)


def test_prime_argument_ks_shrinks_with_p(ctx_cache):
    ks = [prime_argument_sample(ctx_cache(p), 2, p).ks for p in (1009, 100003)]
    assert ks[1] < ks[0]


def test_prime_argument_m3(ctx_cache):
    r = prime_argument_sample(ctx_cache(10007), 3, 10007)
    assert r.m == 3 and r.ks < 0.1 and "empirical" in r.reference


def test_histogram_csv(ctx_cache, tmp_path):
    r = prime_argument_sample(ctx_cache(1009), 2, 500)
    path = tmp_path / "h.csv"
    r.write_histogram_csv(path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["bin_lo", "bin_hi", "count"]
    assert sum(int(x[2]) for x in rows[1:]) == r.sample_size


def test_semiprime_pairs():
    pairs = semiprime_pairs(1000, 0.25)
    lo = 1000**0.25
    brute = [(p, q) for p in primes_naive(500) for q in primes_naive(500) if lo <= p < q and p * q <= 1000]
    assert sorted(pairs) == sorted(brute)


def test_largesums_thresholds():
    r0 = largesums_experiment(3000, 0.25, 0.0)
    assert r0.count == r0.pairs > 0
    # |Kl_m(1; pq)| <= m^2 for two prime factors, and the bound m alone is exceeded
    assert largesums_experiment(3000, 0.25, 4.0 + 1e-9).count == 0
    assert largesums_experiment(3000, 0.25, 2.0 + 1e-9).count > 0


def test_largesums_routes_agree():
    a = largesums_experiment(3000, 0.25, 0.3, method="direct")
    b = largesums_experiment(3000, 0.25, 0.3)
    assert a.count == b.count and a.lambda2_mass == pytest.approx(b.lambda2_mass, rel=1e-9)


def test_largesums_guards():
    with pytest.raises(CapacityError):
        largesums_experiment(3000, 0.25, 0.3, method="direct", budget=10)
    with pytest.raises(ValidationError):
        largesums_experiment(3000, 0.6, 0.3)
    with pytest.raises(ValidationError):
        largesums_experiment(3000, 0.25, -1)


def test_single_prime_sample(ctx_cache):
    # p = 5, Q = 3: primes in [3, 6] other than 5 leave q = 3 alone
    r = prime_argument_sample(ctx_cache(5), 2, 3)
    theta = kloosterman_angles(ctx_cache(5))[pow(3, -2, 5) - 1]
    assert r.sample_size == 1
    assert r.ks == pytest.approx(max(sato_tate_cdf(theta), 1 - sato_tate_cdf(theta)))
