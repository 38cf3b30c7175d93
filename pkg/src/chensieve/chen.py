"""Chen primes, the weights Lambda_2 and Lambda_{E3*}, the pointwise Chen
minorant and the positivity constant c_0.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from .arith import (FactorTable, factor_stats, factorize, mertens_factor, small_primes,
                    vonmangoldt_array)
from .sieves import (SieveSpec, cramer_array, linear_fF, main_sieves, presieve_array,
                     presieves)


@dataclass(frozen=True)
class ChenParams:
    N: int
    delta1: float
    epsabs: float = 1e-12

    def __post_init__(self):
        if not 0 < self.delta1 < 0.1:
            raise ValueError("need 0 < delta1 < 1/10")

    @property
    def z1(self) -> float:
        return self.N ** 0.1

    @property
    def z2(self) -> float:
        return self.N ** (1 / 3 - self.delta1)

    @property
    def z3(self) -> float:
        return self.N ** (1 / 6)


def is_chen_prime(p: int, t: FactorTable) -> bool:
    if p + 2 > t.limit:
        raise ValueError("p + 2 beyond factor table")
    if not t.is_prime(p):
        return False
    return sum(e for _, e in factorize(p + 2, t)) <= 2


def chen_prime_mask(t: FactorTable, hi: int) -> np.ndarray:
    """Chen primes p <= hi (needs hi + 2 <= t.limit)."""
    if hi + 2 > t.limit:
        raise ValueError("hi + 2 beyond factor table")
    st = factor_stats(t, 1, hi + 2)
    big = np.concatenate([[99], st.bigomega])   # index n
    mask = (big[:hi + 1] == 1) & (big[2:hi + 3] <= 2)
    return mask


def lambda2(n: int, params: ChenParams, t: FactorTable) -> float:
    t.check(n)
    f = factorize(n, t) if n > 1 else []
    if sum(e for _, e in f) > 2:
        return 0.0
    ps = small_primes(2, params.z1)
    if any(p < params.z1 for p, _ in f):
        return 0.0
    return mertens_factor(ps)


def lambda2_array(params: ChenParams, t: FactorTable, hi: int) -> np.ndarray:
    st = factor_stats(t, 1, hi)
    out = cramer_array(t, params.z1, hi)
    out[1:][st.bigomega > 2] = 0.0
    return out


# ---------------------------------------------------------------------------
# the densities c_B


def _cB_1d(region: str, u: float, d: float, epsabs: float) -> float:
    """log N * c_B: t1-integral of the closed-form t2-integral.

    int dt2 / (t2 (a - t2)) = (1/a) log(t2 / (a - t2)) with a = u - t1.
    """
    z2 = 1 / 3 - d

    def inner(t1):
        a = u - t1
        lo = z2 if region == "B1" else t1
        hi = min((1 - t1) / 2, a - 0.1)
        if hi <= lo:
            return 0.0
        return (math.log(hi / (a - hi)) - math.log(lo / (a - lo))) / (a * t1)

    if region == "B1":
        a, b = 0.1, z2
    elif region == "B2":
        a, b = z2, 1 / 3
    else:
        raise ValueError("region must be 'B1' or 'B2'")
    if b <= a:
        return 0.0
    # kinks where the t2 upper limit switches branch or the range closes
    pts = [x for x in (2 * u - 1.2, 1 - 2 * z2, u - 0.1 - z2, (u - 0.1) / 2) if a < x < b]
    val, err = integrate.quad(inner, a, b, points=pts or None, epsabs=epsabs, epsrel=1e-13,
                              limit=400)
    return val


def cB(region: str, n: float, params: ChenParams, refine: int = 0) -> float:
    """c_{B1}(n) or c_{B2}(n)."""
    lN = math.log(params.N)
    u = math.log(n) / lN
    return _cB_1d(region, u, params.delta1, params.epsabs / 10**refine) / lN


def cB_dblquad(region: str, n: float, params: ChenParams, epsabs: float = 1e-11) -> float:
    """Direct 2-D quadrature of the defining integral (reference)."""
    lN = math.log(params.N)
    u = math.log(n) / lN
    z2 = 1 / 3 - params.delta1
    f = lambda t2, t1: 1.0 / (t1 * t2 * lN * (u - t1 - t2))
    hi = lambda t1: max(min((1 - t1) / 2, u - t1 - 0.1), lo(t1))
    if region == "B1":
        lo = lambda t1: z2
        a, b = 0.1, z2
    else:
        lo = lambda t1: t1
        a, b = z2, 1 / 3
    if b <= a:
        return 0.0
    return integrate.dblquad(f, a, b, lo, hi, epsabs=epsabs, epsrel=1e-12)[0]


def c_E3(n: float, params: ChenParams) -> float:
    return _c_E3_cached(float(n), params)


@lru_cache(maxsize=1 << 16)
def _c_E3_cached(n: float, params: ChenParams) -> float:
    return cB("B1", n, params) / 2 + cB("B2", n, params)


def c_E3_constant(params: ChenParams) -> float:
    """c_{E3*} = c_{E3*}(N) log N."""
    return c_E3(params.N, params) * math.log(params.N)


def _c_E3_spline(params: ChenParams, lo: float, hi: float, nodes: int = 400):
    xs = np.linspace(math.log(lo), math.log(hi), nodes)
    ys = [c_E3(math.exp(x), params) for x in xs]
    return CubicSpline(xs, ys)


# ---------------------------------------------------------------------------
# B1 / B2 membership


def _in_B(p1, p2, p3, params: ChenParams):
    """Membership of the ordered triple in B1 and in B2 (numpy-friendly)."""
    N, z1, z2 = params.N, params.z1, params.z2
    upper = p2 * p2 * p1 <= N            # p2 <= (N/p1)^{1/2}
    b1 = (z1 <= p1) & (p1 < z2) & (z2 <= p2) & upper & (p3 >= z1)
    b2 = (z2 <= p1) & (p1 <= p2) & upper & (p3 >= z1)
    return b1, b2


_ORDERS = ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0))


def b_membership(n: int, params: ChenParams, t: FactorTable) -> tuple[bool, bool]:
    t.check(n)
    if n < 8:
        return False, False
    ps = [p for p, e in factorize(n, t) for _ in range(e)]
    if len(ps) != 3:
        return False, False
    in1 = in2 = False
    for o in _ORDERS:
        a, b, c = (ps[i] for i in o)
        x, y = _in_B(a, b, c, params)
        in1 |= bool(x)
        in2 |= bool(y)
    return in1, in2


def lambda_E3(n: int, params: ChenParams, t: FactorTable) -> float:
    in1, in2 = b_membership(n, params, t)
    if not (in1 or in2):
        return 0.0
    return (0.5 * in1 + in2) / c_E3(n, params)


def lambda_E3_array(params: ChenParams, t: FactorTable, hi: int,
                    exact: bool = False) -> np.ndarray:
    """Lambda_{E3*}(n) for n = 0..hi.

    c_{E3*}(n) comes from a cubic spline in log n (400 nodes) unless exact=True.
    """
    st = factor_stats(t, 1, hi)
    n = np.flatnonzero(st.bigomega == 3) + 1
    out = np.zeros(hi + 1)
    if n.size == 0:
        return out
    a = t.spf[n].astype(np.int64)
    m = n // a
    b = t.spf[m].astype(np.int64)
    c = m // b
    trip = (a, b, c)
    in1 = np.zeros(n.size, dtype=bool)
    in2 = np.zeros(n.size, dtype=bool)
    for o in _ORDERS:
        x, y = _in_B(trip[o[0]], trip[o[1]], trip[o[2]], params)
        in1 |= x
        in2 |= y
    keep = in1 | in2
    n, w = n[keep], 0.5 * in1[keep] + in2[keep]
    if n.size == 0:
        return out
    if exact:
        cs = np.array([c_E3(int(v), params) for v in n])
    else:
        lo, hi_ = float(n.min()), float(n.max())
        if hi_ / lo < 1.01:
            cs = np.array([c_E3(int(v), params) for v in n])
        else:
            cs = _c_E3_spline(params, lo, hi_)(np.log(n))
    out[n] = w / cs
    return out


# ---------------------------------------------------------------------------
# the minorant


@dataclass
class ChenSieves:
    spec: SieveSpec
    omega: np.ndarray        # pre-sieves on 0..hi
    Omega: np.ndarray
    omega_M: np.ndarray
    Omega_M: np.ndarray
    OmegaPrime_M: np.ndarray


def build_chen_sieves(spec: SieveSpec, hi: int) -> ChenSieves:
    lo, up = presieves(spec.P1, spec.D1, spec.beta)
    ms = main_sieves(spec)
    return ChenSieves(spec, presieve_array(lo, hi), presieve_array(up, hi),
                      ms["omega_M"].values(hi), ms["Omega_M"].values(hi),
                      ms["OmegaPrime_M"].values(hi))


def audit_spec(N: int, delta1: float, **kw) -> SieveSpec:
    """SieveSpec with P1 = N^{1/10}, the largest pre-sieve range compatible with the minorant."""
    kw.setdefault("P1", N ** 0.1)
    kw.setdefault("D1", N ** 0.3)
    kw.setdefault("P0", N ** 0.2)   # only the [P1, P0) interval sieves use it
    return SieveSpec.from_exponents(N, delta1, **kw)


def chen_minorant(n: int, spec: SieveSpec, params: ChenParams, t: FactorTable,
                  sieves: ChenSieves | None = None, coefficient: float | None = None):
    """(g1, g2, g3) at n."""
    if n + 2 > t.limit:
        raise ValueError("n + 2 beyond factor table")
    s = sieves or build_chen_sieves(spec, n + 2)
    coef = 3 / 5 + params.delta1 if coefficient is None else coefficient
    lam = vonmangoldt_array(t, n)[n]
    g1 = lam * s.Omega[n + 2] * s.omega_M[n + 2]
    g2 = coef * c_E3_constant(params) * s.Omega[n] * s.Omega_M[n] * lambda_E3(n + 2, params, t)
    g3 = lam * (s.omega[n + 2] - s.Omega[n + 2]) * s.OmegaPrime_M[n + 2]
    return float(g1), float(g2), float(g3)


@dataclass
class AuditResult:
    rows: list          # (n, lhs, g1, g2, g3, slack, passed)
    violations: int
    checked: int
    coefficient: float = float("nan")
    # smallest coefficient in front of g2 clearing every row (inf if some row fails with g2 = 0)
    required_coefficient: float = float("nan")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "lhs", "g1", "g2", "g3", "slack", "pass"])
            for r in self.rows:
                w.writerow([r[0], *(repr(float(x)) for x in r[1:6]), int(r[6])])


def minorisation_audit(N: int, delta1: float, t: FactorTable, spec: SieveSpec | None = None,
                       coefficient: float | None = None, C: float = 1.0,
                       tol: float = 1e-9) -> AuditResult:
    """Check Lambda(n) Lambda_2(n+2) >= g1 - g2 + g3 - slack for every prime n in (N/2, N].

    slack(n) = C Lambda(n) r_{N^{1/10}}(n+2) #{p^2 | n+2 : p >= N^{1/10}}.
    """
    hi = N + 2
    if t.limit < hi:
        raise ValueError("factor table too small")
    params = ChenParams(N, delta1)
    spec = spec or audit_spec(N, delta1)
    s = build_chen_sieves(spec, hi)
    coef = 3 / 5 + delta1 if coefficient is None else coefficient
    cE = c_E3_constant(params)
    lam = vonmangoldt_array(t, hi)
    l2 = lambda2_array(params, t, hi)
    lE = lambda_E3_array(params, t, hi, exact=True)
    rz = cramer_array(t, params.z1, hi)
    sq = np.zeros(hi + 1)
    for p in small_primes(params.z1, math.isqrt(hi), closed=True):
        sq[p * p::p * p] += 1
    n = np.arange(N // 2 + 1, N + 1)
    n = n[lam[n] > 0]
    m = n + 2
    lhs = lam[n] * l2[m]
    g1 = lam[n] * s.Omega[m] * s.omega_M[m]
    g2 = coef * cE * s.Omega[n] * s.Omega_M[n] * lE[m]
    g3 = lam[n] * (s.omega[m] - s.Omega[m]) * s.OmegaPrime_M[m]
    slack = C * lam[n] * rz[m] * sq[m]
    rhs = g1 - g2 + g3 - slack
    ok = lhs >= rhs - tol * np.maximum(1.0, np.abs(rhs))
    rows = list(zip(n.tolist(), lhs, g1, g2, g3, slack, ok))
    need = g1 + g3 - slack - lhs
    unit = g2 / coef
    hard = (need > tol) & (unit == 0)
    pos = unit > 0
    req = math.inf if hard.any() else max(0.0, float(np.max(need[pos] / unit[pos], initial=0)))
    return AuditResult(rows, int((~ok).sum()), int(n.size), coef, req)


# ---------------------------------------------------------------------------
# the constant c_0


def chen_constant(delta1: float, coefficient: float | None = None, refine: int = 0,
                  h: float = 1e-4) -> float:
    """f(5) - 1/2 int F(5-10t) dt/t - (coef/2) F(3) double integral, delta1-corrections dropped.

    coefficient defaults to 3/5 + delta1; refine tightens the quadrature tolerances
    by 10^refine, and h is the step of the sieve-function grid.
    """
    if not 0 < delta1 <= 0.01:
        raise ValueError("need 0 < delta1 <= 0.01")
    coef = 3 / 5 + delta1 if coefficient is None else coefficient
    eps = 1e-10 / 10**refine
    f5 = linear_fF(5.0, h)[0]
    F3 = linear_fF(3.0, h)[1]
    i1 = integrate.quad(lambda x: linear_fF(5 - 10 * x, h)[1] / x, 0.1, 1 / 3,
                        points=[0.2], epsabs=eps, limit=400)[0]
    # inner t2-integral in closed form, as for c_B with u = 1
    def inner(t1):
        a = 1 - t1
        lo, hi = 1 / 3, min((1 - t1) / 2, a - 0.1)
        if hi <= lo:
            return 0.0
        return (math.log(hi / (a - hi)) - math.log(lo / (a - lo))) / (a * t1)
    i2 = integrate.quad(inner, 0.1, 1 / 3, epsabs=eps, limit=400)[0]
    return f5 - 0.5 * i1 - 0.5 * coef * F3 * i2


def chen_double_integral_dblquad() -> float:
    """The double integral in chen_constant by direct 2-D quadrature (reference)."""
    return integrate.dblquad(lambda t2, t1: 1 / (t1 * t2 * (1 - t1 - t2)), 0.1, 1 / 3,
                             lambda t1: 1 / 3, lambda t1: max((1 - t1) / 2, 1 / 3),
                             epsabs=1e-12)[0]
