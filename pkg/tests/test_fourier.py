import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chensieve import fourier as F
from chensieve.arith import build_factor_table, vonmangoldt_array


def test_exp_sum_examples():
    f = F.Window.ones(10)
    assert F.exp_sum(f, 0.0) == pytest.approx(5)
    assert F.exp_sum(F.Window.ones(8), 0.5) == pytest.approx(0, abs=1e-12)
    vals = np.zeros(5)
    vals[2] = 1
    d = F.Window(10, vals)
    z = F.exp_sum(d, 0.3)
    assert abs(z) == pytest.approx(1) and z == pytest.approx(np.exp(2j * np.pi * 0.3 * 8))


def test_window_shifts():
    f = F.Window(20, np.arange(1.0, 11.0))
    assert f(11) == 1 and f(20) == 10 and f(21) == 0 and f(10) == 0
    assert f.plus()(11) == f(13) and f.plus()(19) == 0
    back = f.plus().minus()
    assert np.array_equal(back.values[2:-2], f.values[2:-2])


def test_window_io(tmp_path):
    f = F.Window(20, np.arange(10, dtype=np.int64))
    g = F.Window(21, np.linspace(0, 1, 11))
    for w in (f, g):
        w.to_csv(tmp_path / "w.csv")
        assert np.array_equal(F.Window.from_csv(tmp_path / "w.csv").values, w.values)
        w.dump(tmp_path / "w.bin")
        u = F.Window.load(tmp_path / "w.bin")
        assert u.N == w.N and np.array_equal(u.values, w.values)


def test_fourier_norm_constant():
    value, defect = F.fourier_norm(F.Window.ones(1000))
    assert value == pytest.approx(500)
    assert defect > 0


def test_fourier_norm_random_sign():
    rng = np.random.default_rng(0)
    f = F.Window(4000, rng.choice([-1.0, 1.0], 2000))
    v8, d8 = F.fourier_norm(f, 8)
    v32, d32 = F.fourier_norm(f, 32)
    assert v8 >= math.sqrt(2000)
    assert abs(v8 - v32) <= max(d8, d32)
    assert F.parseval_gap(f) < 1e-12


def test_arcs():
    arcs = F.major_arcs(1, 100)
    assert arcs.centers == (Fraction(0), Fraction(1))
    assert F.classify(0.5, F.major_arcs(2, 10**6)) == "major"
    N = 10**6
    assert F.classify(Fraction(1, 3) + Fraction(6, N), F.major_arcs(3, N)) == "minor"
    assert F.classify(Fraction(1, 3) + Fraction(3, N), F.major_arcs(3, N)) == "major"


def test_grid_mask_matches_classify():
    arcs = F.major_arcs(4, 2000)
    L = 997
    mask = F.grid_major_mask(L, arcs)
    for k in range(L):
        assert mask[k] == (F.classify(Fraction(k, L), arcs) == "major")


def test_restricted_norms():
    f = F.Window.ones(1000)
    arcs = F.major_arcs(3, 1000)
    assert F.restricted_norm(f, arcs, "major")[0] == pytest.approx(500)
    t = build_factor_table(10**5)
    lam = F.Window.from_array(10**5, vonmangoldt_array(t, 10**5))
    arcs = F.major_arcs(10, 10**5)
    minor = F.restricted_norm(lam, arcs, "minor")[0]
    assert minor < abs(F.exp_sum(lam, 0.0))


def test_convolution_triangle():
    N = 100
    c = F.convolve(F.Window.ones(N), F.Window.ones(N), mode="exact_integer")
    m = np.arange(N + 1, 2 * N + 1)
    expect = np.array([sum(1 for a in range(51, 101) if 51 <= k - a <= 100) for k in m])
    assert np.array_equal(c, expect)
    assert c.max() == N // 2


@pytest.mark.parametrize("seed", range(10))
def test_exact_convolution_random_windows(seed):
    rng = np.random.default_rng(seed)
    N = 2**12
    f = F.Window(N, rng.integers(0, 2, N // 2).astype(np.int64))
    g = F.Window(N, rng.integers(0, 2, N // 2).astype(np.int64))
    exact = F.convolve(f, g, mode="exact_integer")
    assert np.array_equal(exact, F.convolve_direct(f, g))
    assert np.array_equal(np.rint(F.convolve(f, g)).astype(np.int64), exact)


def test_exact_convolution_limb_path():
    rng = np.random.default_rng(11)
    a = rng.integers(-2**20, 2**20, 3000)
    b = rng.integers(-2**20, 2**20, 3000)
    assert F._fft_error_bound(a, b) >= 0.25
    c = F._exact_conv(a, b)
    ref = [sum(int(a[i]) * int(b[k - i]) for i in range(max(0, k - 2999), min(k, 2999) + 1))
           for k in (0, 1, 1500, 2999, 4000, 5998)]
    assert [int(c[k]) for k in (0, 1, 1500, 2999, 4000, 5998)] == ref
    assert F.identity_check(a, b, c)
    c[7] += 1
    assert not F.identity_check(a, b, c)


def test_convolution_errors():
    with pytest.raises(OverflowError):
        F.convolve(F.Window(10, np.full(5, 2**31)), F.Window.ones(10), mode="exact_integer")
    with pytest.raises(ValueError):
        F.convolve(F.Window.ones(10), F.Window.ones(12))
    with pytest.raises(ValueError):
        F.convolve(F.Window(10, np.full(5, 0.5)), F.Window.ones(10), mode="exact_integer")


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(-1000, 1000), min_size=1, max_size=60),
       st.lists(st.integers(-1000, 1000), min_size=1, max_size=60))
def test_exact_conv_property(a, b):
    a, b = np.array(a, dtype=np.int64), np.array(b, dtype=np.int64)
    assert np.array_equal(F._exact_conv(a, b), np.convolve(a, b))


def test_bR_transform():
    rep = F.bR_transform_check(10**6, 3)
    assert rep.in_regime
    assert rep.at_zero_dev <= 10 / 3
    assert rep.major_max_dev <= 10 / 3 and rep.minor_max <= 10
    with pytest.raises(ValueError):
        F.bR_transform_check(10**6, 6)


def test_bR_out_of_regime_runs_when_not_strict():
    rep = F.bR_transform_check(10**6, 6, strict=False)
    assert not rep.in_regime
    assert rep.major_max_dev <= 10 / 6 and rep.minor_max <= 10
