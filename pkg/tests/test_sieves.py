import itertools
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chensieve import sieves as S
from chensieve.arith import build_factor_table, mertens_factor, small_primes


def test_cramer_examples(t_small):
    assert all(S.cramer(n, 2, t_small) == 1 for n in range(1, 50))
    assert S.cramer(7, 5, t_small) == pytest.approx(3.0)
    assert S.cramer(6, 5, t_small) == 0
    assert S.cramer_interval(11, 5, 12, t_small) == 0
    assert all(S.cramer_interval(n, 7, 7, t_small) == 1 for n in range(1, 30))
    arr = S.cramer_array(t_small, 30, 1000)
    assert all(arr[n] == pytest.approx(S.cramer(n, 30, t_small)) for n in range(1, 1001))


def test_cramer_mean_bound(t_big):
    for N, P in ((10**5, 20), (10**6, 30), (10**6, 100)):
        mean = math.fsum(S.cramer_array(t_big, P, N)[1:]) / N
        bound = math.exp(-0.5 * math.log(N) / math.log(P)) + 10 * N**-0.5 * math.log(P)
        assert abs(mean - 1) <= bound


def _chain_ok(ps_desc, beta, D, parity):
    for m in range(1, len(ps_desc) + 1):
        if m % 2 == parity and not math.prod(ps_desc[:m]) * ps_desc[m - 1] ** beta < D:
            return False
    return True


def test_beta_membership_exhaustive():
    primes = [5, 7, 11, 13]
    lo, up = S.beta_weights(2, 5, 14, 5000)
    for parity, w in ((0, lo), (1, up)):
        support = set(w.d.tolist())
        for k in range(len(primes) + 1):
            for c in itertools.combinations(primes, k):
                ps = sorted(c, reverse=True)
                assert (math.prod(c) in support) == _chain_ok(ps, 2, 5000, parity)
                assert S.beta_member(ps, 2, 5000, parity) == _chain_ok(ps, 2, 5000, parity)


def test_beta_full_legendre_at_huge_level():
    lo, up = S.beta_weights(2, 5, 20, 1e30)
    for w in (lo, up):
        assert len(w) == 2**6
        for d, lam in w.as_dict().items():
            assert lam == (-1) ** len([p for p in (5, 7, 11, 13, 17, 19) if d % p == 0])


def test_beta_degenerate_low_level():
    lo, up = S.beta_weights(2, 5, 20, 100)   # D < 5^3
    assert up.as_dict() == {1: 1.0}
    assert lo.as_dict() == {1: 1.0, 5: -1.0, 7: -1.0, 11: -1.0, 13: -1.0, 17: -1.0, 19: -1.0}


@pytest.mark.parametrize("beta", [2, 200])
def test_presieve_sandwich_desk(t_big, beta):
    spec = S.SieveSpec.desk(beta=beta)
    lo, up = S.presieves(spec.P1, spec.D1, beta)
    r = S.cramer_array(t_big, spec.P1, 10**6)
    a, b = S.presieve_array(lo, 10**6), S.presieve_array(up, 10**6)
    assert np.all(a[1:] <= r[1:] + 1e-12)
    assert np.all(r[1:] <= b[1:] + 1e-12)


def test_presieve_eval_examples(t_small):
    lo, up = S.presieves(30, 10**4, 2)
    assert S.presieve_eval(12, up, t_small) == 0
    assert S.presieve_eval(1, up, t_small, gate=False) == pytest.approx(
        mertens_factor(small_primes(2, 30)))
    arr = S.presieve_array(lo, 500)
    for n in range(1, 501):
        assert arr[n] == pytest.approx(S.presieve_eval(n, lo, t_small))


def test_presieve_random_sandwich(t_small):
    rng = random.Random(4)
    for _ in range(5):
        P1, D1 = rng.choice([20, 40, 60]), rng.choice([200, 3000, 10**5])
        beta = rng.choice([1.5, 2, 3, 10])
        lo, up = S.presieves(P1, D1, beta)
        r = S.cramer_array(t_small, P1, 50_000)
        assert np.all(S.presieve_array(lo, 50_000) <= r + 1e-12)
        assert np.all(r <= S.presieve_array(up, 50_000) + 1e-12)


def test_fundlem_gap_desk(t_small):
    spec = S.SieveSpec.desk()
    lo, up = S.presieves(spec.P1, spec.D1, spec.beta)
    hi = 10**5
    r = S.cramer_array(t_small, spec.P1, hi)[1:]
    gap = S.fundlem_gap_array(spec, t_small, hi)
    for w in (lo, up):
        assert np.all(np.abs(S.presieve_array(w, hi)[1:] - r) <= gap + 1e-12)
    assert S.fundlem_gap(77, spec, t_small) == pytest.approx(gap[76])


def test_linear_sieve_functions():
    f2, F2 = S.linear_fF(2.0)
    f4, _ = S.linear_fF(4.0)
    assert f2 == pytest.approx(0, abs=1e-12)
    assert F2 == pytest.approx(S.E_GAMMA, abs=1e-5)
    assert f4 == pytest.approx(S.E_GAMMA / 2 * math.log(3), abs=1e-5)
    assert S.linear_fF(3.0)[1] == pytest.approx(2 * S.E_GAMMA / 3, abs=1e-5)
    for s in (3.5, 5.0, 6.5):
        a, b = S.linear_fF(s), S.linear_fF_quad(s)
        assert a[0] == pytest.approx(b[0], abs=1e-6) and a[1] == pytest.approx(b[1], abs=1e-6)
    with pytest.raises(ValueError):
        S.linear_fF(0.5)


def test_linear_sieve_trivial_and_small():
    lo, up = S.linear_sieve_weights(50, 40, 1000)
    assert lo[0].as_dict() == {1: 1.0} and up[0].as_dict() == {1: 1.0}
    lo, up = S.linear_sieve_weights(5, 9, 100)
    w_lo, w_up = S.combine(lo), S.combine(up)
    for n in range(1, 10**4 + 1):
        sifted = 0 if (n % 5 == 0 or n % 7 == 0) else 1
        assert w_lo.divisor_sum(n) <= sifted <= w_up.divisor_sum(n)
    with pytest.raises(ValueError):
        S.linear_sieve_weights(5, 200, 1000)


def test_linear_sieve_sandwich_desk(t_small):
    lo, up = S.linear_sieve_weights(5, 50, 2500)
    a, b = S.combine(lo).divisor_sums(10**5), S.combine(up).divisor_sums(10**5)
    sift = np.ones(10**5 + 1)
    for p in small_primes(5, 50):
        sift[p::p] = 0
    assert np.all(a[1:] <= sift[1:]) and np.all(sift[1:] <= b[1:])


@pytest.mark.xfail(reason="finite-P density is 1.27, not within 0.15 of e^gamma", strict=True)
def test_linear_sieve_upper_density_near_F2():
    _, up = S.linear_sieve_weights(5, 50, 2500)
    assert abs(S.combine(up).density() - S.E_GAMMA) <= 0.15


def test_factorable_split_recombines():
    lo, up = S.linear_sieve_weights(5, 50, 2500)
    for w in lo + up:
        g1, g2 = S.factorable_split(w, 50, 50)
        assert g1.d.max() <= 50 and g2.d.max() <= 50
        assert S.dirichlet_convolve(g1, g2) == pytest.approx(w.as_dict())
    one = S.make_weight({1: 1.0}, 10, 5, 50, "linear_upper")
    g1, g2 = S.factorable_split(one, 10, 10)
    assert g1.as_dict() == g2.as_dict() == {1: 1.0}
    with pytest.raises(ValueError):
        S.factorable_split(lo[0], 5, 5)


def test_weight_csv_roundtrip(tmp_path):
    lo, _ = S.presieves(40, 10**4, 2)
    p = tmp_path / "w.csv"
    lo.to_csv(p)
    back = S.DivisorWeight.from_csv(p)
    assert back.as_dict() == lo.as_dict() and back.normalization == lo.normalization
    assert p.read_bytes().count(b"\r") == 0


def test_density_exact_vs_float():
    lo, up = S.presieves(40, 10**4, 2)
    for w in (lo, up):
        assert w.density() == pytest.approx(
            math.fsum((w.lam / w.phi).tolist()) * w.normalization, rel=1e-12)


def test_spec_hierarchy():
    spec = S.SieveSpec.desk()
    assert spec.hierarchy_violations() == ["P0 > R0", "R0 > D1"]
    with pytest.raises(ValueError):
        spec.check_hierarchy()
    big = S.SieveSpec.from_exponents(1e300, 1e-3)
    assert big.hierarchy_violations() == []


def test_main_sieves_interval_density_legendre_limit():
    # at a level where no constraint binds, the normalised phi-density is prod p(p-2)/(p-1)^2
    spec = S.SieveSpec.desk(P1=5, P0=50, level_P1P0=1e30)
    ms = S.main_sieves(spec)
    limit = math.prod(p * (p - 2) / (p - 1) ** 2 for p in small_primes(5, 50))
    assert ms["Omega_P1P0"].density == pytest.approx(limit, rel=1e-12)
    assert ms["omega_P1P0"].density == pytest.approx(limit, rel=1e-12)
    assert set(ms) == {"omega_M", "Omega_M", "OmegaPrime_M", "omega_P1P0", "Omega_P1P0"}


@pytest.mark.xfail(reason="desk level N^(1/4) is below P1^3, the upper interval sieve "
                          "collapses to {1} and its density is 1.90", strict=True)
def test_main_sieves_interval_density_desk():
    ms = S.main_sieves(S.SieveSpec.desk())
    assert abs(ms["Omega_P1P0"].density - 1) <= 0.2


def test_main_sieves_lower_density_below_upper():
    ms = S.main_sieves(S.SieveSpec.desk(P1=3, P0=30))
    assert ms["omega_M"].density <= ms["OmegaPrime_M"].density


def test_main_sieves_omega_M_minorant(t_small):
    spec = S.SieveSpec.desk(N=10**5, P1=3, P0=30)
    w = S.main_sieves(spec)["omega_M"].weight
    rng = random.Random(5)
    z1, z2 = spec.z1, spec.z2
    shifted = small_primes(max(z1, spec.P1), z2)
    for n in (rng.randrange(1, 200_000) for _ in range(10**4)):
        ps = {p for p in small_primes(2, 100) if n % p == 0}
        rough = not any(spec.P1 <= p < z1 for p in ps)
        k = sum(1 for p in shifted if n % p == 0)
        bound = (1 - 0.5 * k) if rough else 0.0
        assert w.divisor_sum(n) <= bound + 1e-9


def test_divisor_sum_identity_examples():
    ok, lhs, rhs = S.divisor_sum_identity_check({1: 1.0}, {5: 0.2}, 1, 5)
    assert ok and lhs == pytest.approx(rhs)
    ok, lhs, rhs = S.divisor_sum_identity_check({1: 2.5}, {}, 1, 1)
    assert ok and lhs == rhs == 2.5
    rng = random.Random(6)
    divs = [1, 5, 7, 11, 35, 55, 77, 385]
    for _ in range(100):
        lam = {d: rng.uniform(-1, 1) for d in divs}
        g = {p: rng.uniform(0, 0.9) for p in (5, 7, 11)}
        assert S.divisor_sum_identity_check(lam, g, rng.choice(divs), 385)[0]


@settings(max_examples=30, deadline=None)
@given(P1=st.integers(6, 60), logD=st.floats(1, 12), beta=st.floats(1, 6))
def test_presieve_lower_below_upper(P1, logD, beta):
    lo, up = S.presieves(P1, math.exp(logD), beta)
    n = np.arange(3000)
    a, b = lo.divisor_sums(2999), up.divisor_sums(2999)
    assert np.all(a[1:] <= b[1:] + 1e-12)
