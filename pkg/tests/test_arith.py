import math
import random

import numpy as np
import pytest
from sympy import factorint, isprime, mobius, totient, divisor_count

from chensieve import arith
from chensieve.arith import build_factor_table, factorize, mult_fn


def test_small_tables():
    t = build_factor_table(12)
    assert [int(t.spf[n]) for n in (12, 11, 9)] == [2, 11, 3]
    assert int(build_factor_table(100).spf[91]) == 7


def test_spf_matches_trial_division(t_big):
    rng = random.Random(1)
    for n in (rng.randrange(2, 10**6) for _ in range(1000)):
        assert int(t_big.spf[n]) == min(factorint(n))


def test_factorize_examples(t_small):
    t = build_factor_table(2**20)
    assert factorize(12, t) == [(2, 2), (3, 1)]
    assert factorize(97, t) == [(97, 1)]
    assert factorize(2**20, t) == [(2, 20)]


def test_mult_fn_examples(t_small):
    assert mult_fn("phi", 12, t_small) == 4
    assert mult_fn("mu", 30, t_small) == -1
    assert mult_fn("bigomega", 12, t_small) == 3
    assert mult_fn("vonmangoldt", 8, t_small) == 0.0
    assert mult_fn("vonmangoldt", 7, t_small) == pytest.approx(math.log(7))
    with pytest.raises(ValueError):
        mult_fn("sigma", 5, t_small)


def test_mult_fn_against_sympy(t_small):
    rng = random.Random(2)
    for n in (rng.randrange(1, 200_000) for _ in range(300)):
        assert mult_fn("phi", n, t_small) == totient(n)
        assert mult_fn("mu", n, t_small) == mobius(n)
        assert mult_fn("tau", n, t_small) == divisor_count(n)


def test_factor_stats_vs_scalar(t_small):
    st = arith.factor_stats(t_small, 1, 5000)
    for n in range(1, 5001, 7):
        f = factorint(n)
        assert st.bigomega[n - 1] == sum(f.values())
        assert st.smallomega[n - 1] == len(f)
        assert st.tau[n - 1] == divisor_count(n)
        assert st.squarefree[n - 1] == all(e == 1 for e in f.values())


def test_prime_mask_and_vonmangoldt(t_small):
    pm = arith.prime_mask(t_small, 1000)
    assert [n for n in range(1001) if pm[n]] == [n for n in range(1001) if isprime(n)]
    lam = arith.vonmangoldt_array(t_small, 100)
    assert lam[9] == 0 and lam[97] == pytest.approx(math.log(97))


def test_cache_roundtrip(tmp_path):
    t = build_factor_table(5000)
    p = tmp_path / "spf.bin"
    arith.save_factor_table(t, p)
    u = arith.load_factor_table(p)
    assert u.limit == 5000 and np.array_equal(u.spf, t.spf)
    p.write_bytes(b"XXXX" + p.read_bytes()[4:])
    with pytest.raises(ValueError):
        arith.load_factor_table(p)


def test_errors():
    with pytest.raises(ValueError):
        build_factor_table(1)
    with pytest.raises(arith.CapacityError):
        build_factor_table(10**6, memory_cap=1000)
    t = build_factor_table(50)
    with pytest.raises(ValueError):
        t.check(51)


def test_small_primes_half_open():
    assert arith.small_primes(5, 13) == [5, 7, 11]
    assert arith.small_primes(5, 13, closed=True) == [5, 7, 11, 13]
    assert arith.mertens_factor([2, 3]) == pytest.approx(3.0)
