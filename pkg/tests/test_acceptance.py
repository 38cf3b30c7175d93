"""The fourteen acceptance criteria at their stated sizes and tolerances.

Each test records a PASS/FAIL line; the lines are printed in the pytest
terminal summary, or directly when this file is run as a script.  Criteria
that do not hold at desk scale keep their literal assertion and are marked
xfail(strict=True), so they show FAIL here and would flag if they ever passed.
"""
import math
import random
import time

import numpy as np
import pytest

from chensieve import characters as X
from chensieve import chen as C
from chensieve import fourier as F
from chensieve import goldbach as G
from chensieve import models as M
from chensieve import sieves as S
from chensieve.arith import build_factor_table

RESULTS: dict[int, tuple[bool, str]] = {}


def record(k: int, ok: bool, detail: str) -> None:
    RESULTS[k] = (bool(ok), detail)


def summary_lines() -> list[str]:
    return [f"criterion {k:2d}: {'PASS' if RESULTS[k][0] else 'FAIL'}  {RESULTS[k][1]}"
            for k in sorted(RESULTS)]


@pytest.fixture(scope="module")
def t2m():
    return build_factor_table(1_750_010)


def test_c01_exceptional_scan(t2m):
    t0 = time.perf_counter()
    rep = G.exceptional_scan(10**6, t2m)
    dt = time.perf_counter() - t0
    above = rep.exceptions_above(1000)
    ok = not above and rep.verified and dt <= 300
    record(1, ok, f"exceptions above 10^3: {above}; below: {rep.exceptions}; {dt:.1f}s")
    assert ok


@pytest.mark.parametrize("beta", [2, 200])
def test_c02_sieve_sandwich(t2m, beta):
    spec = S.SieveSpec.desk(beta=beta)
    lo, up = S.presieves(spec.P1, spec.D1, beta)
    hi = 10**6
    r = S.cramer_array(t2m, spec.P1, hi)[1:]
    a, b = S.presieve_array(lo, hi)[1:], S.presieve_array(up, hi)[1:]
    bad = int(np.sum(a > r + 1e-12) + np.sum(r > b + 1e-12))
    prev = RESULTS.get(2, (True, ""))
    record(2, prev[0] and bad == 0, (prev[1] + f" beta={beta}: {bad} violations;").strip())
    assert bad == 0


def test_c03_fundamental_lemma_gap(t2m):
    spec = S.SieveSpec.desk()
    lo, up = S.presieves(spec.P1, spec.D1, spec.beta)
    hi = 10**5
    r = S.cramer_array(t2m, spec.P1, hi)[1:]
    gap = S.fundlem_gap_array(spec, t2m, hi)
    bad = [int(np.sum(np.abs(S.presieve_array(w, hi)[1:] - r) > gap)) for w in (lo, up)]
    record(3, sum(bad) == 0, f"violations lower/upper: {bad[0]}/{bad[1]}")
    assert sum(bad) == 0


def test_c04_cramer_mean(t2m):
    parts, ok = [], True
    for N, P in ((10**5, 20), (10**6, 30), (10**6, 100)):
        dev = abs(math.fsum(S.cramer_array(t2m, P, N)[1:].tolist()) / N - 1)
        bound = math.exp(-0.5 * math.log(N) / math.log(P)) + 10 * N**-0.5 * math.log(P)
        ok &= dev <= bound
        parts.append(f"({N:.0e},{P}) {dev:.2e}<={bound:.2e}")
    record(4, ok, "; ".join(parts))
    assert ok


@pytest.mark.xfail(strict=True, reason="holds only up to an implicit constant; see ledger")
def test_c05_heath_brown_majorant():
    t = build_factor_table(10**4)
    total, worst = 0, 0.0
    for R in (20, 50):
        for r in (1, 3, 5, 7, 15):
            viol, _, w = M.hb_violations(R, r, t, 10**4)
            total += len(viol)
            worst = max(worst, w)
    record(5, total == 0, f"{total} violations, worst ratio {worst:.2f}")
    assert total == 0


def test_c06_gauss_sums():
    worst, count = 0.0, 0
    for q in range(1, 201):
        for chi in X.primitive_characters(q):
            worst = max(worst, abs(abs(X.gauss_sum(chi)) - math.sqrt(q)))
            count += 1
    record(6, worst <= 1e-9, f"{count} primitive characters, max deviation {worst:.1e}")
    assert worst <= 1e-9


def test_c07_bR_kernel():
    rep = F.bR_transform_check(10**6, 3, samples=100, seed=0)
    ok = rep.major_max_dev <= 10 / 3 and rep.minor_max <= 10
    record(7, ok, f"major |b-1| max {rep.major_max_dev:.4f}, minor |b| max {rep.minor_max:.4f}")
    assert ok


def test_c08_dual_formulas():
    rng = random.Random(2024)
    worst = 0.0
    for _ in range(200):
        n, r, R = rng.randint(1, 10**4), rng.randint(1, 20), rng.randint(2, 30)
        a, b = M.lambda_Rr(n, R, r), M.lambda_Rr_divisor(n, R, r)
        scale = max(abs(a), abs(b))
        worst = max(worst, abs(a - b) / scale if scale else 0.0)
    record(8, worst <= 1e-9, f"max relative difference {worst:.1e}")
    assert worst <= 1e-9


@pytest.mark.xfail(strict=True, reason="P1 = 10 leaves the singular series truncated; see ledger")
def test_c09_presieve_additive(t2m):
    N = 10**6
    spec = S.SieveSpec.desk(N=N)
    fs = G._presieve_pair(spec, 7 * N // 4 + 3)
    rng = random.Random(0)
    ms = []
    while len(ms) < 50:
        m = rng.randint(5 * N // 4, 7 * N // 4)
        if m % 6 == 4:
            ms.append(m)
    ratios = [G.presieve_additive_check(m, N, spec, ("lower",) * 4, t2m, sieves=fs).ratio
              for m in ms]
    inside = sum(0.9 <= r <= 1.1 for r in ratios)
    record(9, inside >= 45, f"{inside}/50 ratios in [0.9, 1.1], range "
                            f"[{min(ratios):.3f}, {max(ratios):.3f}]")
    assert inside >= 45


def test_c10_exceptional_sums():
    (chi5,) = X.real_primitive_characters(5)
    Ssums, _, _, _ = G.character_sums(4, chi5)
    hand = Ssums[0] == 1 and Ssums[2] / Ssums[0] == 1
    rng = random.Random(10)
    bad = cases = 0
    for r in range(3, 201):
        tau = sum(1 for d in range(1, r + 1) if r % d == 0)
        for chi in X.real_primitive_characters(r):
            for _ in range(50):
                m = rng.randrange(4, 10**6, 6)
                S_, *_ = G.character_sums(m, chi)
                s1 = S_[2] / S_[0] if S_[0] else 0.0
                s2 = S_[3] / S_[0] if S_[0] else 0.0
                cases += 1
                bad += not (abs(s1) <= 1 and abs(s2) <= 1
                            and abs(S_[5]) <= 3 * math.sqrt(r) * tau)
    ok = hand and bad == 0
    record(10, ok, f"{cases} (chi, m) cases, {bad} violations; r=5, m=4 sigma1 = 1: {hand}")
    assert ok


def test_c11_chen_constant():
    v = C.chen_constant(1e-3)
    fine = C.chen_constant(1e-3, refine=2, h=2.5e-5)   # 4x finer grid, 100x tighter quad
    f2, F2 = S.linear_fF(2.0)
    f4, _ = S.linear_fF(4.0)
    e = S.E_GAMMA
    ok = (v > 0 and fine > 0 and abs(f2) <= 1e-5 and abs(F2 - e) <= 1e-5
          and abs(f4 - e / 2 * math.log(3)) <= 1e-5)
    record(11, ok, f"c0 = {v:.8f}, refined {fine:.8f}; f(2), F(2), f(4) within 1e-5")
    assert ok


@pytest.mark.xfail(strict=True, reason="needs coefficient 0.867 instead of 3/5 + delta1; see ledger")
def test_c12_minorisation_audit(t2m):
    res = C.minorisation_audit(10**5, 1e-3, t2m)
    record(12, res.violations == 0,
           f"{res.violations}/{res.checked} primes violate; coefficient {res.coefficient:.3f}, "
           f"required {res.required_coefficient:.4f}")
    assert res.violations == 0


def test_c13_gallagher_trend(t2m):
    vals = [X.gallagher_discrepancy("lambda", N, 10, t=t2m) for N in (10**4, 10**5, 10**6)]
    exact = X.gallagher_discrepancy("lambda", 10**4, 10, t=t2m, exact=True)
    dec = vals[0].value > vals[1].value > vals[2].value
    within = vals[0].value - 1e-12 <= exact.value <= vals[0].value + vals[0].defect + 1e-12
    record(13, dec and within,
           "values " + ", ".join(f"{d.value:.4f}" for d in vals)
           + f"; exact at 10^4 {exact.value:.4f} vs grid {vals[0].value:.4f}"
           + f" + defect {vals[0].defect:.4f}")
    assert dec and within


def test_c14_convolution_exactness():
    rng = np.random.default_rng(14)
    N = 2**12
    same = 0
    for _ in range(10):
        f = F.Window(N, rng.integers(0, 2, N // 2).astype(np.int64))
        g = F.Window(N, rng.integers(0, 2, N // 2).astype(np.int64))
        ref = F.convolve_direct(f, g)
        same += (np.array_equal(F.convolve(f, g, mode="exact_integer"), ref)
                 and np.array_equal(np.rint(F.convolve(f, g)).astype(np.int64), ref))
    record(14, same == 10, f"{same}/10 windows equal on every output")
    assert same == 10


if __name__ == "__main__":
    t = build_factor_table(1_750_010)
    for name, fn in sorted(globals().items()):
        if not name.startswith("test_c"):
            continue
        fn = getattr(fn, "__wrapped__", fn)
        args = []
        if "t2m" in fn.__code__.co_varnames[:fn.__code__.co_argcount]:
            args.append(t)
        runs = [(2,), (200,)] if name == "test_c02_sieve_sandwich" else [()]
        for extra in runs:
            try:
                fn(*args, *extra)
            except AssertionError:
                pass
    print("\n".join(summary_lines()))
