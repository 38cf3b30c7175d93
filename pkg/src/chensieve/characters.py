"""Dirichlet characters, Ramanujan and Gauss sums, real L-values,
exceptional-zero certification and the Gallagher / Bombieri-Vinogradov
discrepancy sums.

A character mod q is stored by its exponent vector on the CRT components of
(Z/q)^*, each component cyclic with a fixed generator.  Values are exact
integer exponents of a primitive L-th root of unity (L = group exponent), so
equality and realness tests never touch floating point.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .arith import FactorTable, build_factor_table, prime_mask, vonmangoldt_array

EPS = np.finfo(float).eps


# ---------------------------------------------------------------------------
# small integer helpers (moduli here are tiny, trial division is fine)


def _factor(n: int) -> list[tuple[int, int]]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def _mu(n: int) -> int:
    f = _factor(n)
    if any(e > 1 for _, e in f):
        return 0
    return -1 if len(f) % 2 else 1


def _phi(n: int) -> int:
    out = n
    for p, _ in _factor(n):
        out = out // p * (p - 1)
    return out


def _primitive_root(p: int, e: int) -> int:
    ells = [l for l, _ in _factor(p - 1)]
    g = 2
    while any(pow(g, (p - 1) // l, p) == 1 for l in ells):
        g += 1
    if e > 1 and pow(g, p - 1, p * p) == 1:
        g += p
    return g


def _power_table(g: int, count: int, mod: int) -> np.ndarray:
    """[g^0, g^1, ..., g^(count-1)] mod `mod`, by repeated doubling."""
    pw = np.ones(1, dtype=np.int64)
    while pw.size < count:
        step = pow(g, int(pw.size), mod)
        pw = np.concatenate([pw, pw * step % mod])
    return pw[:count]


# ---------------------------------------------------------------------------
# group structure


@dataclass
class _Component:
    p: int
    e: int
    pe: int
    order: int
    role: str  # "odd", "minus_one" (sign part of 2^e), "five"
    log: np.ndarray = field(repr=False)  # discrete log of x mod pe, -1 off units


def _components(q: int) -> list[_Component]:
    comps = []
    for p, e in _factor(q):
        pe = p**e
        if p == 2:
            if e == 1:
                continue
            if e == 2:
                log = np.full(4, -1, dtype=np.int64)
                log[1], log[3] = 0, 1
                comps.append(_Component(2, 2, 4, 2, "minus_one", log))
                continue
            half = pe // 4
            pw = _power_table(5, half, pe)
            sign = np.full(pe, -1, dtype=np.int64)
            five = np.full(pe, -1, dtype=np.int64)
            k = np.arange(half, dtype=np.int64)
            sign[pw], five[pw] = 0, k
            sign[pe - pw], five[pe - pw] = 1, k
            comps.append(_Component(2, e, pe, 2, "minus_one", sign))
            comps.append(_Component(2, e, pe, half, "five", five))
        else:
            order = (p - 1) * p ** (e - 1)
            g = _primitive_root(p, e)
            pw = _power_table(g, order, pe)
            log = np.full(pe, -1, dtype=np.int64)
            log[pw] = np.arange(order, dtype=np.int64)
            comps.append(_Component(p, e, pe, order, "odd", log))
    return comps


def _vp(k: int, p: int) -> int:
    v = 0
    while k % p == 0 and k:
        k //= p
        v += 1
    return v


def _conductor(comps: list[_Component], ks: tuple[int, ...]) -> int:
    cond = 1
    i = 0
    while i < len(comps):
        c, k = comps[i], ks[i]
        if c.role == "odd":
            if k % c.order:
                cond *= c.p ** (c.e - min(_vp(k, c.p), c.e - 1))
            i += 1
        elif c.e == 2:
            if k:
                cond *= 4
            i += 1
        else:
            ka, kb = k, ks[i + 1]
            if kb:
                cond *= 2 ** (c.e - _vp(kb, 2))
            elif ka:
                cond *= 4
            i += 2
    return cond


class CharacterGroup:
    def __init__(self, q: int):
        if q < 1:
            raise ValueError("modulus must be positive")
        self.q = q
        self.components = _components(q)
        self.orders = tuple(c.order for c in self.components)
        self.exponent = math.lcm(*self.orders) if self.orders else 1
        res = np.arange(q, dtype=np.int64)
        self.units = np.gcd(res, q) == 1
        self._logs = [c.log[res % c.pe] for c in self.components]

    def table(self, ks) -> np.ndarray:
        L = self.exponent
        acc = np.zeros(self.q, dtype=np.int64)
        for k, o, lg in zip(ks, self.orders, self._logs):
            if k:
                acc += (k * (L // o)) * np.where(lg < 0, 0, lg)
        acc %= L
        acc[~self.units] = -1
        return acc

    def character(self, ks, index: int | None = None) -> "DirichletCharacter":
        ks = tuple(int(k) % o for k, o in zip(ks, self.orders))
        if index is None:
            index = 0
            for k, o in zip(ks, self.orders):
                index = index * o + k
        cond = _conductor(self.components, ks)
        real = all((2 * k) % o == 0 for k, o in zip(ks, self.orders))
        return DirichletCharacter(self.q, ks, self.orders, cond, cond == self.q, real,
                                  index, self.exponent, self.table(ks))


@dataclass(frozen=True, eq=False)
class DirichletCharacter:
    modulus: int
    exponents: tuple
    orders: tuple
    conductor: int
    primitive: bool
    is_real: bool
    index: int
    order_lcm: int
    table: np.ndarray = field(repr=False)

    @property
    def principal(self) -> bool:
        return not any(self.exponents)

    def values(self) -> np.ndarray:
        """Complex values on residues 0..q-1."""
        t = self.table
        L = self.order_lcm
        out = np.exp(2j * np.pi * np.where(t < 0, 0, t) / L)
        # snap exact fourth roots of unity
        quarter = (4 * t) % L == 0
        out[quarter] = np.array([1, 1j, -1, -1j])[(4 * t[quarter]) // L]
        out[t < 0] = 0
        return out

    def real_values(self) -> np.ndarray:
        if not self.is_real:
            raise ValueError("character is not real")
        t = self.table
        out = np.where(t == 0, 1, -1).astype(np.int64)
        out[t < 0] = 0
        return out

    def __call__(self, n: int) -> complex:
        return complex(self.values()[n % self.modulus])

    def key(self) -> tuple[int, int]:
        return (self.modulus, self.index)


@lru_cache(maxsize=256)
def _group(q: int) -> CharacterGroup:
    return CharacterGroup(q)


@lru_cache(maxsize=512)
def _characters_mod(q: int) -> tuple:
    g = _group(q)
    return tuple(g.character(ks, i) for i, ks in
                 enumerate(itertools.product(*[range(o) for o in g.orders])))


def characters_mod(q: int) -> list[DirichletCharacter]:
    if q < 1:
        raise ValueError("modulus must be positive")
    if q > 10**6:
        raise ValueError("modulus above 10^6")
    return list(_characters_mod(q))


def primitive_characters(q: int) -> list[DirichletCharacter]:
    return [c for c in characters_mod(q) if c.primitive]


def _admits_real_primitive(q: int) -> bool:
    if q == 1:
        return True
    v = _vp(q, 2)
    odd = q >> v
    if v not in (0, 2, 3):
        return False
    return all(e == 1 for _, e in _factor(odd)) if odd > 1 else v > 0


def real_primitive_characters(q: int) -> list[DirichletCharacter]:
    """Real primitive characters mod q without enumerating the full group."""
    if q < 3 or not _admits_real_primitive(q):
        return []
    g = _group(q)
    out = []
    for halves in itertools.product((0, 1), repeat=len(g.orders)):
        ks = tuple(h * o // 2 for h, o in zip(halves, g.orders))
        chi = g.character(ks)
        if chi.primitive:
            out.append(chi)
    return out


# ---------------------------------------------------------------------------
# classical sums


def ramanujan_sum(q: int, n: int) -> int:
    if q < 1:
        raise ValueError("q must be positive")
    g = math.gcd(q, n)
    return sum(d * _mu(q // d) for d in range(1, g + 1) if g % d == 0)


def gauss_sum(chi: DirichletCharacter) -> complex:
    q = chi.modulus
    a = np.arange(q)
    return complex(np.sum(chi.values() * np.exp(2j * np.pi * a / q)))


def u_P(n: int, a: int, q: int, P: int) -> complex:
    if math.gcd(a, q) != 1:
        raise ValueError("gcd(a, q) must be 1")
    if P < 1:
        raise ValueError("P must be at least 1")
    x = n * pow(a, -1, q) % q if q > 1 else 0
    total = sum(c.values()[x] for c in _characters_mod(q) if c.conductor > P)
    return complex(total) / _phi(q)


# ---------------------------------------------------------------------------
# real L-values


def _prefix_range(vals: np.ndarray) -> int:
    q = vals.size
    pref = np.cumsum(vals[np.arange(1, q + 1) % q])
    return int(max(pref.max(), 0) - min(pref.min(), 0))


def _default_terms(q: int) -> int:
    M = min(max(100_000, 200 * q), 1_000_000)
    return M - M % q


def _l_eval(vals: np.ndarray, sigma: float, M: int, W: int) -> tuple[float, float]:
    n = np.arange(1, M + 1, dtype=float)
    terms = vals[np.arange(1, M + 1) % vals.size] * n**-sigma
    value = float(np.sum(terms))
    rounding = EPS * (math.log2(M) + 4) * float(np.sum(np.abs(terms)))
    return value, W * (M + 1.0) ** -sigma + rounding


def l_real(sigma: float, chi: DirichletCharacter, M: int | None = None) -> tuple[float, float]:
    """L(sigma, chi) for real primitive non-principal chi, with a rigorous error bound.

    Partial summation against the bounded prefix sums of chi gives
    |tail| <= W (M+1)^{-sigma}, W the range of the prefix sums over a period.
    """
    if not chi.is_real or chi.principal:
        raise ValueError("l_real needs a real non-principal character")
    if not chi.primitive:
        raise ValueError("l_real needs a primitive character")
    if not 0.5 < sigma <= 1.5:
        raise ValueError("sigma must lie in (0.5, 1.5]")
    vals = chi.real_values()
    M = M or _default_terms(chi.modulus)
    return _l_eval(vals, sigma, M, _prefix_range(vals))


def _deriv_bound(sigma: float, M: int, W: int, logs: np.ndarray) -> float:
    head = float(np.sum(logs * np.exp(-sigma * logs)))
    x = M + 1.0
    if math.log(x) >= 1.0 / sigma:
        wmax = math.log(x) * x**-sigma
        tail = W * wmax
    else:
        tail = 2 * W / (math.e * sigma)
    return head * (1 + 1e-12) + tail


@dataclass
class ExceptionalZeroReport:
    level: int
    quality: float
    candidates: list = field(default_factory=list)  # dicts: modulus, character, interval

    @property
    def clear(self) -> bool:
        return not self.candidates

    def to_dict(self) -> dict:
        return {"level": self.level, "quality": self.quality, "clear": self.clear,
                "candidates": [{"modulus": c["modulus"], "character": c["character"],
                                "interval": list(c["interval"])} for c in self.candidates]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def certify_positive(chi: DirichletCharacter, lo: float, hi: float, grid: int = 8,
                     max_depth: int = 12, M: int | None = None):
    """Try to prove L(sigma, chi) > 0 on [lo, hi].

    Returns None on success or the first interval that resisted certification.
    On [a, b] with lower bounds l_a, l_b and |L'| <= D, positivity follows from
    l_a + l_b > D (b - a).
    """
    vals = chi.real_values()
    W = _prefix_range(vals)
    M = M or _default_terms(chi.modulus)
    logs = np.log(np.arange(1, M + 1, dtype=float))
    cache: dict[float, float] = {}

    def lower(s):
        if s not in cache:
            v, err = _l_eval(vals, s, M, W)
            cache[s] = v - err
        return cache[s]

    nodes = np.linspace(lo, hi, grid + 1)
    stack = [(float(a), float(b), 0) for a, b in zip(nodes[:-1], nodes[1:])][::-1]
    while stack:
        a, b, depth = stack.pop()
        la, lb = lower(a), lower(b)
        if la > 0 and lb > 0 and la + lb > _deriv_bound(a, M, W, logs) * (b - a):
            continue
        if la <= 0 or lb <= 0 or depth >= max_depth:
            return (a, b)
        mid = 0.5 * (a + b)
        stack.append((mid, b, depth + 1))
        stack.append((a, mid, depth + 1))
    return None


def exceptional_zero_search(P: int, kappa: float, grid: int = 8, max_depth: int = 12,
                            M: int | None = None) -> ExceptionalZeroReport:
    if not 3 <= P <= 10**4:
        raise ValueError("P must lie in [3, 10^4]")
    if not 0 < kappa < 1:
        raise ValueError("kappa must lie in (0, 1)")
    lo = 1.0 - kappa / math.log(P)
    report = ExceptionalZeroReport(P, kappa)
    for q in range(3, P + 1):
        for chi in real_primitive_characters(q):
            bad = certify_positive(chi, lo, 1.0, grid, max_depth, M)
            if bad is not None:
                report.candidates.append({"modulus": q, "character": chi.index,
                                          "interval": bad})
    return report


# ---------------------------------------------------------------------------
# Gallagher discrepancy


@dataclass
class Discrepancy:
    value: float   # certified lower bound for the true maximum
    defect: float  # true value <= value + defect

    def __float__(self):
        return self.value


def _gallagher_base(kind: str, N: int, t: FactorTable | None, delta1: float | None):
    """(weights f*(n), principal main term, final multiplier) on n = 0..N."""
    if kind == "lambda":
        t = t if t is not None and t.limit >= N else build_factor_table(max(N, 2))
        main = np.ones(N + 1)
        main[0] = 0
        return vonmangoldt_array(t, N), main, 1.0
    if kind == "prime_indicator":
        t = t if t is not None and t.limit >= N else build_factor_table(max(N, 2))
        f = prime_mask(t, N).astype(float)
        main = np.zeros(N + 1)
        main[2:] = 1.0 / np.log(np.arange(2, N + 1))
        return f, main, math.log(N)
    if kind == "e3":
        if delta1 is None:
            raise ValueError("kind 'e3' needs delta1")
        from .chen import ChenParams, lambda_E3_array
        t = t if t is not None and t.limit >= N else build_factor_table(max(N, 2))
        main = np.ones(N + 1)
        main[0] = 0
        return lambda_E3_array(ChenParams(N, delta1), t, N), main, 1.0
    raise ValueError(f"unknown kind {kind!r}")


def _grid_spacing(N: int, R: int) -> int:
    # power of two not above ceil(N/R^2): grids nest as R grows
    g = -(-N // (R * R))
    return 1 << (g.bit_length() - 1)


def _interval_max(S: np.ndarray, pts: np.ndarray, c: float) -> float:
    vals = S[pts]
    best = 0.0
    for i in range(pts.size - 1):
        num = np.abs(vals[i + 1:] - vals[i])
        den = (pts[i + 1:] - pts[i]) + c
        best = max(best, float(np.max(num / den)))
    return best


def _exact_max(S: np.ndarray, c: float, block: int = 512) -> float:
    N = S.size - 1
    best = 0.0
    a = np.arange(N + 1)
    for b0 in range(1, N + 1, block):
        bs = np.arange(b0, min(b0 + block, N + 1))
        num = np.abs(S[bs][:, None] - S[None, :bs[-1]])
        den = (bs[:, None] - a[None, :bs[-1]]).astype(float) + c
        ratio = np.where(a[None, :bs[-1]] < bs[:, None], num / den, 0.0)
        best = max(best, float(ratio.max()))
    return best


def gallagher_discrepancy(kind: str, N: int, R: int, exceptional=None, *,
                          delta1: float | None = None, t: FactorTable | None = None,
                          exact: bool = False) -> Discrepancy:
    """Sum over r <= R and primitive chi mod r of the normalised interval maximum.

    Intervals: endpoints on a dyadic grid of spacing about N/R^2, plus every
    prefix (0, x].  With exact=True all O(N^2) intervals are scanned instead
    (only allowed for N <= 2*10^4).
    """
    if R < 1 or R * R > N:
        raise ValueError("need 1 <= R and R^2 <= N")
    if exact and N > 20_000:
        raise ValueError("exact sweep limited to N <= 2*10^4")
    f, main, mult = _gallagher_base(kind, N, t, delta1)
    c = N / R
    g = _grid_spacing(N, R)
    pts = np.unique(np.append(np.arange(0, N + 1, g), N))
    n = np.arange(N + 1)
    cell_start = (n // g) * g
    value = []
    defect = []
    for r in range(1, R + 1):
        for chi in primitive_characters(r):
            vals = chi.real_values() if chi.is_real else chi.values()
            w = f * vals[n % r]
            if r == 1:
                w = w - main
            if exceptional is not None:
                echi, beta = exceptional
                if echi.key() == chi.key():
                    w = w + np.where(n > 0, n.astype(float) ** (beta - 1.0), 0.0)
            w[0] = 0
            S = np.concatenate([[0], np.cumsum(w[1:])])
            if exact:
                value.append(_exact_max(S, c))
                continue
            prefix = float(np.max(np.abs(S[1:]) / (n[1:] + c)))
            V = max(prefix, _interval_max(S, pts, c))
            Mcell = float(np.max(np.abs(S - S[cell_start])))
            value.append(V)
            defect.append((V * g + 2 * Mcell) / c)
    total = math.fsum(value) * mult
    return Discrepancy(total, 0.0 if exact else math.fsum(defect) * mult)


# ---------------------------------------------------------------------------
# Bombieri-Vinogradov discrepancy


def _bv_weights(kind: str, N: int, P: int, t: FactorTable, delta1: float | None) -> np.ndarray:
    if kind == "lambda":
        return vonmangoldt_array(t, N)
    if kind == "rough":
        from .sieves import cramer_array
        return cramer_array(t, P, N)
    if kind == "e3":
        if delta1 is None:
            raise ValueError("kind 'e3' needs delta1")
        from .chen import ChenParams, lambda_E3_array
        return lambda_E3_array(ChenParams(N, delta1), t, N)
    raise ValueError(f"unknown kind {kind!r}")


def bv_discrepancy(kind: str, N: int, Q: int, P: int, *, delta1: float | None = None,
                   t: FactorTable | None = None) -> float:
    if Q < 1 or Q * Q > N:
        raise ValueError("need 1 <= Q <= sqrt(N)")
    if not 1 <= P <= Q:
        raise ValueError("need 1 <= P <= Q")
    t = t if t is not None and t.limit >= N else build_factor_table(max(N, 2))
    w = _bv_weights(kind, N, P, t, delta1)
    n = np.arange(N // 2 + 1, N + 1)
    wn = w[n]
    terms = []
    for q in range(1, Q + 1):
        T = np.bincount(n % q, weights=wn, minlength=q)
        low = [c for c in _characters_mod(q) if c.conductor <= P]
        units = np.flatnonzero(_group(q).units)
        S = T[units].astype(complex)
        for c in low:
            v = c.values()
            S -= np.conj(v[units]) * np.sum(v * T) / _phi(q)
        terms.append(float(np.max(np.abs(S))))
    return math.fsum(terms)
