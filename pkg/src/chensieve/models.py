"""The bump G, the major-arc kernel b_R, Heath-Brown's model Lambda_{R,r}
and the multiplicative majorant H_R.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .arith import FactorTable, factor_stats, factorize, radical


def _sigma(u):
    return np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)


def _smoothstep(u):
    a, b = _sigma(u), _sigma(1.0 - u)
    return a / (a + b)


def bump_G(t):
    """Smooth bump: 1 on [0, 1], 0 outside (-2, 2), smooth-step ramps in between.

    Accepts scalars or arrays.
    """
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    out[(t >= 0) & (t <= 1)] = 1.0
    left = (t > -2) & (t < 0)
    right = (t > 1) & (t < 2)
    out[left] = _smoothstep((t[left] + 2) / 2)
    out[right] = _smoothstep(2 - t[right])
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ModelParams:
    N: int
    R: int
    r: int = 1
    xi_cut: float = 50.0
    nodes: int = 0   # 0: exact piecewise integration

    def __post_init__(self):
        if self.R < 2 or self.r < 1 or self.xi_cut < 10:
            raise ValueError("need R >= 2, r >= 1, xi cutoff >= 10")


# ---------------------------------------------------------------------------
# small arithmetic tables for moduli up to R^2


@lru_cache(maxsize=16)
def _mu_phi(Q: int):
    mu = np.ones(Q + 1, dtype=np.int64)
    phi = np.arange(Q + 1, dtype=np.int64)
    done = np.zeros(Q + 1, dtype=bool)
    for p in range(2, Q + 1):
        if done[p]:
            continue
        done[p::p] = True
        mu[p::p] *= -1
        mu[p * p::p * p] = 0
        phi[p::p] -= phi[p::p] // p
    mu[0] = 0
    return mu, phi


def _prime_factors(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def ramanujan_c(q: int, n: int) -> int:
    """c_q(n) = sum_{d | (q, n)} d mu(q/d)."""
    g = math.gcd(q, n) if n else q
    mu, _ = _mu_phi(max(q, 1))
    return sum(d * int(mu[q // d]) for d in range(1, g + 1) if g % d == 0)


# ---------------------------------------------------------------------------
# b_R


def _bR_coeffs(R: int):
    Q = R * R
    _, phi = _mu_phi(Q)
    rs = np.arange(1, Q + 1)
    return rs, bump_G(np.log(rs) / math.log(R))


def b_R(n: int, N: int, R: int) -> float:
    if R < 2:
        raise ValueError("need R >= 2")
    if abs(n) > N / R**4:
        return 0.0
    rs, g = _bR_coeffs(R)
    total = math.fsum(ramanujan_c(int(r), abs(n)) * gv for r, gv in zip(rs, g) if gv)
    return R**4 / (2 * N) * total


def b_R_array(N: int, R: int) -> tuple[np.ndarray, np.ndarray]:
    """(n, b_R(n)) for |n| <= N/R^4."""
    H = math.floor(N / R**4)
    ns = np.arange(-H, H + 1)
    rs, g = _bR_coeffs(R)
    mu, _ = _mu_phi(R * R)
    vals = np.zeros(ns.size)
    an = np.abs(ns)
    for r, gv in zip(rs.tolist(), g.tolist()):
        if not gv:
            continue
        # c_r(n) = sum_{d | r, d | n} d mu(r/d)
        c = np.zeros(ns.size)
        for d in range(1, r + 1):
            if r % d == 0 and mu[r // d]:
                c += np.where(an % d == 0, d * int(mu[r // d]), 0)
        vals += gv * c
    return ns, vals * R**4 / (2 * N)


def b_R_direct(n: int, N: int, R: int) -> float:
    """Double sum over (r, b) of e_r(bn), the brute-force oracle."""
    if abs(n) > N / R**4:
        return 0.0
    total = 0.0
    for r in range(1, R * R + 1):
        gv = bump_G(math.log(r) / math.log(R))
        if gv:
            bs = np.array([b for b in range(1, r + 1) if math.gcd(b, r) == 1])
            total += gv * float(np.cos(2 * np.pi * bs * n / r).sum())
    return R**4 / (2 * N) * total


# ---------------------------------------------------------------------------
# Lambda_{R,r}


def lambda_Rr(n: int, R: float, r: int) -> float:
    """Ramanujan-sum form: sum over (q, r) = 1 of mu(q) c_q(n) / phi(q) G(log rq / log R)."""
    Q = int(R * R // r)
    if Q < 1:
        return 0.0
    mu, phi = _mu_phi(Q)
    lR = math.log(R)
    terms = []
    for q in range(1, Q + 1):
        if not mu[q] or math.gcd(q, r) != 1:
            continue
        g = bump_G(math.log(r * q) / lR)
        if g:
            terms.append(int(mu[q]) * ramanujan_c(q, n) / int(phi[q]) * g)
    return math.fsum(terms)


@lru_cache(maxsize=64)
def _divisor_coeffs(R: float, r: int) -> np.ndarray:
    """coef[d] = d mu(d)/phi(d) * sum_{(l, dr)=1} mu(l)^2/phi(l) G(log(l d r)/log R)."""
    Q = int(R * R // r)
    coef = np.zeros(max(Q, 1) + 1)
    if Q < 1:
        return coef
    mu, phi = _mu_phi(Q)
    lR = math.log(R)
    for d in range(1, Q + 1):
        if not mu[d] or math.gcd(d, r) != 1:
            continue
        dr = d * r
        acc = []
        for l in range(1, Q // d + 1):
            if mu[l] and math.gcd(l, dr) == 1:
                g = bump_G(math.log(l * dr) / lR)
                if g:
                    acc.append(g / int(phi[l]))
        coef[d] = d * int(mu[d]) / int(phi[d]) * math.fsum(acc)
    return coef


def lambda_Rr_divisor(n: int, R: float, r: int) -> float:
    """Divisor form: sum over d | n, (d, r) = 1 of coef[d]."""
    coef = _divisor_coeffs(R, r)
    return math.fsum(coef[d] for d in range(1, min(n, coef.size - 1) + 1)
                     if n % d == 0 and coef[d])


def lambda_Rr_array(R: float, r: int, hi: int) -> np.ndarray:
    """Lambda_{R,r}(n) for n = 0..hi by scattering the divisor coefficients."""
    coef = _divisor_coeffs(R, r)
    out = np.zeros(hi + 1)
    for d in np.flatnonzero(coef):
        if d <= hi:
            out[d::d] += coef[d]
    out[0] = 0.0
    return out


# ---------------------------------------------------------------------------
# h_xi and H_R


def h_xi(n: int, xi: float, R: float, t: FactorTable) -> float:
    t.check(n)
    if n == 1:
        return 1.0
    f = factorize(n, t)
    if any(e > 1 for _, e in f):
        return 0.0
    c = 10 * (1 + abs(xi)) / math.log(R)
    return math.prod(min(1.0, c * math.log(p)) for p, _ in f)


def _h_integral(ps, R: float, cut: float) -> float:
    """int_{-cut}^{cut} prod_p min(1, c_p (1+|xi|)) (1+|xi|)^{-10} d xi, exactly.

    With u = 1 + |xi| each factor is c_p u below u = 1/c_p and 1 above, so
    the integrand is a monomial on each piece between breakpoints.
    """
    lR = math.log(R)
    cs = sorted(10 * math.log(p) / lR for p in ps)
    top = 1.0 + cut
    breaks = sorted({1.0, top} | {1 / c for c in cs if 1 < 1 / c < top})
    total = 0.0
    for a, b in zip(breaks, breaks[1:]):
        mid = 0.5 * (a + b)
        small = [c for c in cs if c * mid < 1]
        coef = math.prod(small)
        k = len(small) - 10
        total += coef * (b ** (k + 1) - a ** (k + 1)) / (k + 1)
    return 2 * total


def H_R(n: int, R: float, t: FactorTable, params: ModelParams | None = None,
        squarefull: str = "radical") -> float:
    """tau(n) log R int h_xi(n) (1+|xi|)^{-10} d xi, with the tail |xi| > cut bounded by h <= 1.

    squarefull="radical" evaluates h_xi at rad(n) for non-squarefree n,
    squarefull="zero" follows the squarefree support of h_xi literally.
    """
    t.check(n)
    cut = params.xi_cut if params else 50.0
    f = factorize(n, t) if n > 1 else []
    if any(e > 1 for _, e in f) and squarefull == "zero":
        return 0.0
    tau = math.prod(e + 1 for _, e in f)
    ps = [p for p, _ in f]
    if params is not None and params.nodes:
        body = _h_integral_quad(ps, R, cut, params.nodes)
    else:
        body = _h_integral(ps, R, cut)
    tail = 2 * (1 + cut) ** -9 / 9
    return tau * math.log(R) * (body + tail)


def _h_integral_quad(ps, R, cut, nodes):
    """Same integral by fixed-order Gauss-Legendre panels split at the kinks."""
    lR = math.log(R)
    cs = [10 * math.log(p) / lR for p in ps]
    f = lambda x: np.prod([np.minimum(1.0, c * (1 + x)) for c in cs], axis=0) * (1 + x) ** -10.0
    # geometric panels follow the (1+xi)^{-10} decay
    geo = {2.0**k - 1 for k in range(1, 64) if 2.0**k - 1 < cut}
    kinks = sorted({0.0, cut} | geo | {1 / c - 1 for c in cs if 0 < 1 / c - 1 < cut})
    x, w = np.polynomial.legendre.leggauss(nodes)
    total = 0.0
    for a, b in zip(kinks, kinks[1:]):
        xs = 0.5 * (b - a) * x + 0.5 * (a + b)
        total += 0.5 * (b - a) * float(np.dot(w, f(xs)))
    return 2 * total


def H_R_quad(n: int, R: float, t: FactorTable, cut: float = 50.0) -> float:
    """Adaptive-quadrature reference for H_R on squarefree n."""
    ps = [p for p, _ in factorize(n, t)] if n > 1 else []
    lR = math.log(R)
    cs = [10 * math.log(p) / lR for p in ps]
    f = lambda x: math.prod(min(1.0, c * (1 + x)) for c in cs) * (1 + x) ** -10
    pts = [1 / c - 1 for c in cs if 0 < 1 / c - 1 < cut]
    body = 2 * integrate.quad(f, 0, cut, points=pts or None, limit=200, epsabs=1e-14)[0]
    return 2 ** len(ps) * lR * (body + 2 * (1 + cut) ** -9 / 9)


def H_R_array(R: float, t: FactorTable, hi: int, squarefull: str = "radical") -> np.ndarray:
    """H_R(n) for n = 1..hi (index i <-> n = i + 1)."""
    st = factor_stats(t, 1, hi)
    out = np.empty(hi)
    cache: dict[int, float] = {}
    for i in range(hi):
        n = i + 1
        if not st.squarefree[i] and squarefull == "zero":
            out[i] = 0.0
            continue
        k = radical(n, t)
        if k not in cache:
            ps = [p for p, _ in factorize(k, t)] if k > 1 else []
            cache[k] = math.log(R) * (_h_integral(ps, R, 50.0) + 2 * 51.0**-9 / 9)
        out[i] = st.tau[i] * cache[k]
    return out


def hb_upper_check(n: int, R: float, r: int, t: FactorTable, C: float = 1.0) -> bool:
    """(r/phi(r)) |Lambda_{R,r}(n)| <= C H_R(n) (1 + 1e-9)."""
    if math.gcd(n, r) != 1:
        raise ValueError("need gcd(n, r) = 1")
    phi_r = r * math.prod(1 - 1 / p for p in _prime_factors(r))
    lhs = r / phi_r * abs(lambda_Rr_divisor(n, R, r))
    return lhs <= C * H_R(n, R, t) * (1 + 1e-9)


def hb_violations(R: float, r: int, t: FactorTable, hi: int, C: float = 1.0):
    """Squarefree n <= hi coprime to r with (r/phi(r))|Lambda| > C H_R (1 + 1e-9).

    Returns (violations as list of (n, lhs, H), number checked, worst ratio).
    """
    lam = lambda_Rr_array(R, r, hi)[1:]
    H = H_R_array(R, t, hi)
    st = factor_stats(t, 1, hi)
    n = np.arange(1, hi + 1)
    keep = st.squarefree & (np.gcd(n, r) == 1)
    phi_r = r * math.prod(1 - 1 / p for p in _prime_factors(r))
    lhs = r / phi_r * np.abs(lam)
    bad = keep & (lhs > C * H * (1 + 1e-9))
    worst = float(np.max(lhs[keep] / H[keep]))
    return [(int(a), float(b), float(c)) for a, b, c in zip(n[bad], lhs[bad], H[bad])], \
        int(keep.sum()), worst
