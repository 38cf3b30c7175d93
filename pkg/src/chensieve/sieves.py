"""Cramer models, beta and linear sieve weights, main-sieve assembly and
the finite checks around them (sandwich, fundamental-lemma gap,
divisor-sum identity).
"""
from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import integrate

from .arith import FactorTable, factor_stats, mertens_factor, small_primes

EULER_GAMMA = 0.57721566490153286061
E_GAMMA = math.exp(EULER_GAMMA)


# ---------------------------------------------------------------------------
# Cramer models


def cramer(n: int, P: float, t: FactorTable) -> float:
    t.check(n)
    ps = small_primes(2, P)
    if any(n % p == 0 for p in ps):
        return 0.0
    return mertens_factor(ps)


def cramer_interval(n: int, Q: float, P: float, t: FactorTable) -> float:
    if Q > P:
        raise ValueError("need Q <= P")
    t.check(n)
    ps = small_primes(Q, P)
    if any(n % p == 0 for p in ps):
        return 0.0
    return mertens_factor(ps)


def cramer_array(t: FactorTable, P: float, hi: int, Q: float = 2) -> np.ndarray:
    """r_{[Q,P)}(n) on n = 0..hi (index 0 set to 0)."""
    ps = small_primes(Q, P)
    out = np.full(hi + 1, mertens_factor(ps))
    out[0] = 0.0
    for p in ps:
        out[p::p] = 0.0
    return out


# ---------------------------------------------------------------------------
# divisor weights


KINDS = {"beta_lower", "beta_upper", "linear_lower", "linear_upper", "main_omega",
         "main_Omega", "main_OmegaPrime", "interval_lower", "interval_upper"}


@dataclass(frozen=True)
class DivisorWeight:
    d: np.ndarray          # squarefree support, ascending
    lam: np.ndarray        # lambda(d)
    phi: np.ndarray        # phi(d), carried along for density sums
    level: float
    sift_lo: float
    sift_hi: float
    kind: str
    normalization: float = 1.0
    cells: tuple = ()      # product structure of a well-factorable piece

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown weight kind {self.kind!r}")

    def __len__(self):
        return int(self.d.size)

    def as_dict(self) -> dict[int, float]:
        return {int(a): float(b) for a, b in zip(self.d, self.lam)}

    def divisor_sum(self, n: int) -> float:
        lookup = self.as_dict()
        ps = [p for p in _prime_divisors(n) if self.sift_lo <= p < self.sift_hi]
        total = 0.0
        for k in range(len(ps) + 1):
            for c in itertools.combinations(ps, k):
                total += lookup.get(math.prod(c), 0.0)
        return total

    def divisor_sums(self, hi: int) -> np.ndarray:
        """sum_{d | n} lambda(d) for n = 0..hi."""
        out = np.zeros(hi + 1)
        for d, lam in zip(self.d.tolist(), self.lam.tolist()):
            if d <= hi:
                out[d::d] += lam
        out[0] = 0.0
        return out

    def density(self) -> float:
        """normalization * sum lambda(d)/phi(d); exact rational when small."""
        if self.d.size <= 10**5 and np.all(2 * self.lam == np.round(2 * self.lam)):
            phis = [int(x) for x in self.phi]
            L = math.lcm(*phis)
            num = sum(int(round(2 * l)) * (L // f) for l, f in zip(self.lam, phis))
            return float(Fraction(num, 2 * L)) * self.normalization
        return math.fsum((self.lam / self.phi).tolist()) * self.normalization

    def to_csv(self, path) -> None:
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["d", "lambda"])
            for d, lam in zip(self.d.tolist(), self.lam.tolist()):
                w.writerow([d, repr(lam)])
        with open(str(path) + ".json", "w", encoding="utf-8") as fh:
            json.dump({"kind": self.kind, "level": self.level, "sift_lo": self.sift_lo,
                       "sift_hi": self.sift_hi, "normalization": self.normalization}, fh,
                      indent=2)
            fh.write("\n")

    @classmethod
    def from_csv(cls, path) -> "DivisorWeight":
        with open(str(path) + ".json", encoding="utf-8") as fh:
            meta = json.load(fh)
        with open(path, encoding="utf-8") as fh:
            rows = list(csv.reader(fh))[1:]
        entries = {int(a): float(b) for a, b in rows}
        return make_weight(entries, meta["level"], meta["sift_lo"], meta["sift_hi"],
                           meta["kind"], meta["normalization"])


def _prime_divisors(n: int) -> list[int]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def _phi_squarefree(d: int) -> int:
    return math.prod(p - 1 for p in _prime_divisors(d))


def make_weight(entries: dict, level, sift_lo, sift_hi, kind, normalization=1.0,
                cells=()) -> DivisorWeight:
    ds = sorted(k for k, v in entries.items() if v != 0)
    if 1 in entries and entries[1] == 0:
        ds = sorted(set(ds) | {1})
    d = np.array(ds, dtype=np.int64)
    lam = np.array([entries[k] for k in ds], dtype=float)
    phi = np.array([_phi_squarefree(k) for k in ds], dtype=np.int64)
    return DivisorWeight(d, lam, phi, float(level), float(sift_lo), float(sift_hi), kind,
                         float(normalization), tuple(cells))


def _from_rows(rows, level, lo, hi, kind, norm, cells=()) -> DivisorWeight:
    """rows: (d, lam, phi) with distinct d."""
    rows = sorted(rows)
    d = np.array([r[0] for r in rows], dtype=np.int64)
    lam = np.array([r[1] for r in rows], dtype=float)
    phi = np.array([r[2] for r in rows], dtype=np.int64)
    return DivisorWeight(d, lam, phi, float(level), float(lo), float(hi), kind, float(norm),
                         tuple(cells))


def combine(weights, kind: str | None = None, scale=None) -> DivisorWeight:
    """Pointwise sum of weights (optionally scaled), keeping the first one's metadata."""
    acc: dict[int, list] = {}
    scale = scale or [1.0] * len(weights)
    for w, s in zip(weights, scale):
        for d, lam, ph in zip(w.d.tolist(), w.lam.tolist(), w.phi.tolist()):
            if d in acc:
                acc[d][0] += s * lam
            else:
                acc[d] = [s * lam, ph]
    w0 = weights[0]
    rows = [(d, v[0], v[1]) for d, v in acc.items() if v[0] != 0 or d == 1]
    lo = min(w.sift_lo for w in weights)
    hi = max(w.sift_hi for w in weights)
    return _from_rows(rows, max(w.level for w in weights), lo, hi, kind or w0.kind,
                      w0.normalization)


# ---------------------------------------------------------------------------
# beta sieve


def _parity_support(primes_desc, logD, parity, size, slack=0.0):
    """Squarefree d = p1 > ... > pn with prefix condition on steps m == parity (mod 2).

    `size(p)` is the log-size used in the condition (log p for the beta sieve,
    a rounded block endpoint for the linear sieve).  Returns (d, mu, phi, primes).
    """
    out = [(1, 1, 1, ())]
    stack = [(1, 1, 0.0, 0, -1, ())]
    while stack:
        d, ph, logsum, m, last, ps = stack.pop()
        for i in range(last + 1, len(primes_desc)):
            p, (lp, cost) = primes_desc[i], size(primes_desc[i])
            mm = m + 1
            ls = logsum + lp
            if mm % 2 == parity and ls + cost >= logD - slack:
                continue
            nd, nph, nps = d * p, ph * (p - 1), ps + (p,)
            out.append((nd, -1 if mm % 2 else 1, nph, nps))
            stack.append((nd, nph, ls, mm, i, nps))
    return out


def beta_weights(beta: float, P_lo: float, P_hi: float, D: float):
    """(lambda^-, lambda^+) of the beta sieve over primes in [P_lo, P_hi).

    d = p1 > ... > pn belongs to D^+ when p1...pm pm^beta < D for every odd m,
    to D^- when the same holds for every even m.
    """
    if beta < 1 or D < 1:
        raise ValueError("need beta >= 1 and D >= 1")
    primes = small_primes(P_lo, P_hi)
    if not primes:
        raise ValueError("empty prime range")
    desc = primes[::-1]
    logD = math.log(D)
    size = lambda p: (math.log(p), beta * math.log(p))
    out = []
    for parity, kind in ((0, "beta_lower"), (1, "beta_upper")):
        rows = [(d, mu, ph) for d, mu, ph, _ in _parity_support(desc, logD, parity, size)]
        out.append(_from_rows(rows, D, P_lo, P_hi, kind, mertens_factor(primes)))
    return out[0], out[1]


def beta_member(ps_desc, beta: float, D: float, parity: int) -> bool:
    """Direct check of the defining chain for a decreasing prime tuple."""
    prod = 1
    for m, p in enumerate(ps_desc, start=1):
        prod *= p
        if m % 2 == parity and not prod * p**beta < D:
            return False
    return True


def presieves(P1: float, D1: float, beta: float):
    """(lambda^-, lambda^+) sifting primes 5 <= p < P1; normalisation over all p < P1."""
    norm = mertens_factor(small_primes(2, P1))
    if not small_primes(5, P1):
        one = _from_rows([(1, 1.0, 1)], D1, 5, P1, "beta_lower", norm)
        return one, replace(one, kind="beta_upper")
    lo, up = beta_weights(beta, 5, P1, D1)
    return replace(lo, normalization=norm), replace(up, normalization=norm)


def presieve_eval(n: int, w: DivisorWeight, t: FactorTable, gate: bool = True) -> float:
    if n > t.limit:
        raise ValueError("n beyond factor table")
    if gate and math.gcd(n, 6) != 1:
        return 0.0
    return w.normalization * w.divisor_sum(n)


def presieve_array(w: DivisorWeight, hi: int) -> np.ndarray:
    """Normalised pre-sieve on n = 0..hi, including the (n,6)=1 gate."""
    out = w.divisor_sums(hi) * w.normalization
    n = np.arange(hi + 1)
    out[(n % 2 == 0) | (n % 3 == 0)] = 0.0
    return out


# ---------------------------------------------------------------------------
# parameters


@dataclass
class SieveSpec:
    N: int
    delta1: float
    beta: float = 2.0
    P0: float = 0.0
    P1: float = 0.0
    D1: float = 0.0
    DM1: float = 0.0
    DM2: float = 0.0
    R0: float = 0.0
    R1: float = 0.0
    Rt: float = 0.0
    level_M: float = 0.0       # main-sieve level N^{1/2 - 2 delta1}
    level_P1P0: float = 0.0    # level of the [P1, P0) interval sieves, N^{1/4}
    eta: float = 0.1           # block ratio of the well-factorable construction

    @classmethod
    def from_exponents(cls, N: int, delta1: float, beta: float = 2.0, **overrides):
        d = delta1
        vals = dict(P0=N**d, P1=N**d**4, D1=N**(d**3 / 100), DM1=N**(1 / 3 - d),
                    DM2=N**(1 / 6 - d), R0=N**d**3, R1=N**(d**4 / 100), Rt=N**(2 * d**5),
                    level_M=N**(0.5 - 2 * d), level_P1P0=N**0.25)
        vals.update(overrides)
        return cls(N, delta1, beta, **vals)

    @classmethod
    def desk(cls, N: int = 10**6, delta1: float = 1e-3, beta: float = 2.0, **overrides):
        vals = dict(P1=10, P0=100, D1=1000, DM1=1000, DM2=300, R0=300, R1=5, Rt=3)
        vals.update(overrides)
        return cls.from_exponents(N, delta1, beta, **vals)

    @property
    def z1(self) -> float:
        return self.N ** 0.1

    @property
    def z2(self) -> float:
        return self.N ** (1 / 3 - self.delta1)

    @property
    def z3(self) -> float:
        return self.N ** (1 / 6)

    def hierarchy_violations(self) -> list[str]:
        names = ["DM1", "DM2", "P0", "R0", "D1", "P1", "R1", "Rt"]
        vals = [getattr(self, k) for k in names]
        return [f"{a} > {b}" for a, b, x, y in zip(names, names[1:], vals, vals[1:])
                if not x > y]

    def check_hierarchy(self) -> None:
        bad = self.hierarchy_violations()
        if bad:
            raise ValueError("parameter hierarchy violated: " + ", ".join(bad))

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


# ---------------------------------------------------------------------------
# fundamental lemma gap


def _gap_schedule(spec: SieveSpec):
    """(r0, thresholds Y_r for r0 <= r < r_empty, r_empty)."""
    P1, beta = spec.P1, spec.beta
    s = math.log(spec.D1) / math.log(P1)
    x = (s - beta - 1) / 2
    r0 = max(0, math.floor(x) + 1)
    a = (beta - 1) / (beta + 1)
    ys = []
    r = r0
    while True:
        y = P1 ** (a**r) if r else P1
        if y <= 5:
            break
        ys.append(y)
        r += 1
    return r0, ys, r


def _least_prime_ge5(t: FactorTable, n: np.ndarray) -> np.ndarray:
    m = n.astype(np.int64).copy()
    for p in (2, 3):
        while True:
            hit = (m % p == 0) & (m > 1)
            if not hit.any():
                break
            m[hit] //= p
    out = np.full(m.size, np.inf)
    big = m > 1
    out[big] = t.spf[m[big]]
    return out


def fundlem_gap_array(spec: SieveSpec, t: FactorTable, hi: int) -> np.ndarray:
    """Fundamental-lemma gap on n = 1..hi (index i <-> n = i + 1)."""
    norm = mertens_factor(small_primes(2, spec.P1))
    r0, ys, r_empty = _gap_schedule(spec)
    n = np.arange(1, hi + 1)
    lp = _least_prime_ge5(t, n)
    series = np.full(hi, 4.0 ** -r_empty * 4 / 3)
    for k, y in enumerate(ys):
        series += np.where(lp >= y, 4.0 ** -(r0 + k), 0.0)
    tau = factor_stats(t, 1, hi).tau.astype(float)
    return norm * tau**2 * series


def fundlem_gap(n: int, spec: SieveSpec, t: FactorTable) -> float:
    t.check(n)
    return float(fundlem_gap_array_at(spec, t, np.array([n]))[0])


def fundlem_gap_array_at(spec, t, ns):
    norm = mertens_factor(small_primes(2, spec.P1))
    r0, ys, r_empty = _gap_schedule(spec)
    lp = _least_prime_ge5(t, ns)
    series = np.full(ns.size, 4.0 ** -r_empty * 4 / 3)
    for k, y in enumerate(ys):
        series += np.where(lp >= y, 4.0 ** -(r0 + k), 0.0)
    tau = np.array([factor_stats(t, int(v), int(v)).tau[0] for v in ns], dtype=float)
    return norm * tau**2 * series


def fundlem_precondition(spec: SieveSpec) -> bool:
    """s > beta + 2, the regime in which the gap bound is proved."""
    return math.log(spec.D1) / math.log(spec.P1) > spec.beta + 2


# ---------------------------------------------------------------------------
# linear sieve functions f and F


@lru_cache(maxsize=4)
def _fF_tables(h: float = 1e-4):
    s = 1.0 + h * np.arange(int(round(6 / h)) + 1)
    F = np.where(s <= 3, 2 * E_GAMMA / s, 0.0)
    f = np.where((s >= 2) & (s <= 4), 2 * E_GAMMA * np.log(np.maximum(s - 1, 1e-300)) / s, 0.0)
    lag = int(round(1 / h))
    i3, i4 = int(round(2 / h)), int(round(3 / h))
    sF, sf = s * F, s * f
    for i in range(i3 + 1, s.size):
        sF[i] = sF[i - 1] + h * 0.5 * (f[i - 1 - lag] + f[i - lag])
        F[i] = sF[i] / s[i]
        if i > i4:
            sf[i] = sf[i - 1] + h * 0.5 * (F[i - 1 - lag] + F[i - lag])
            f[i] = sf[i] / s[i]
    return s, f, F


def linear_fF(s: float, h: float = 1e-4) -> tuple[float, float]:
    """Upper and lower linear sieve functions (f(s), F(s)) for 1 <= s <= 7."""
    if not 1 <= s <= 7:
        raise ValueError("s must lie in [1, 7]")
    f = 2 * E_GAMMA * math.log(s - 1) / s if 2 <= s <= 4 else None
    F = 2 * E_GAMMA / s if s <= 3 else None
    if s < 2:
        f = 0.0
    if f is None or F is None:
        grid, fs, Fs = _fF_tables(h)
        f = float(np.interp(s, grid, fs)) if f is None else f
        F = float(np.interp(s, grid, Fs)) if F is None else F
    return f, F


def linear_fF_quad(s: float) -> tuple[float, float]:
    """Independent evaluation of (f, F) by nested adaptive quadrature."""

    @lru_cache(maxsize=None)
    def F(x):
        if x <= 3:
            return 2 * E_GAMMA / x
        return (3 * F(3) + integrate.quad(lambda u: f(u - 1), 3, x, epsabs=1e-13,
                                          limit=200)[0]) / x

    @lru_cache(maxsize=None)
    def f(x):
        if x <= 2:
            return 0.0
        if x <= 4:
            return 2 * E_GAMMA * math.log(x - 1) / x
        return (4 * f(4) + integrate.quad(lambda u: F(u - 1), 4, x, epsabs=1e-13,
                                          limit=200)[0]) / x

    return f(s), F(s)


# ---------------------------------------------------------------------------
# linear sieve with interval blocks


class FactorizationError(ValueError):
    pass


def _blocks(primes, P: float, eta: float):
    """Block index of each prime: j with P^{(1+eta)^j} <= p < P^{(1+eta)^{j+1}}."""
    lP = math.log(P)
    out = {}
    for p in primes:
        j = int(math.floor(math.log(math.log(p) / lP) / math.log1p(eta) + 1e-12))
        while P ** ((1 + eta) ** (j + 1)) <= p:
            j += 1
        while j > 0 and P ** ((1 + eta) ** j) > p:
            j -= 1
        out[p] = j
    return out


def _linear_pieces(P: float, z: float, D: float, eta: float, parity: int, kind: str,
                   norm_primes=None) -> list[DivisorWeight]:
    primes = small_primes(P, z)
    norm = mertens_factor(norm_primes if norm_primes is not None else primes)
    if not primes or D < 1:
        return [_from_rows([(1, 1.0, 1)], D, P, z, kind, norm, ())]
    block = _blocks(primes, P, eta)
    lP = math.log(P)
    # every prime is rounded up to its block's upper endpoint
    logU = {p: lP * (1 + eta) ** (block[p] + 1) for p in primes}
    desc = primes[::-1]
    size = lambda p: (logU[p], 2 * logU[p])
    support = _parity_support(desc, math.log(D), parity, size)
    members: dict[int, list] = {}
    for p in primes:
        members.setdefault(block[p], []).append(p)
    groups: dict[tuple, list] = {}
    for d, mu, ph, ps in support:
        counts: dict[int, int] = {}
        for p in ps:
            counts[block[p]] = counts.get(block[p], 0) + 1
        cells = []
        for p in ps:
            if counts[block[p]] == 1:
                cells.append(tuple(members[block[p]]))
            else:
                cells.append((p,))
        key = tuple(sorted(cells, key=lambda c: (-max(c), c)))
        groups.setdefault(key, []).append((d, float(mu), ph))
    pieces = []
    for key in sorted(groups, key=lambda k: (len(k), k)):
        pieces.append(_from_rows(groups[key], D, P, z, kind, norm, key))
    return pieces


def linear_sieve_weights(P: float, z: float, D: float, eta: float = 0.1):
    """Well-factorable linear sieve pieces (lower list, upper list).

    Membership uses the beta = 2 chain with every prime replaced by the upper
    endpoint of its block P^{(1+eta)^j}; the combined weights are exact
    lower/upper sieves and each piece is a product over disjoint prime cells.
    """
    if z <= P:
        one = _from_rows([(1, 1.0, 1)], D, P, z, "linear_lower", 1.0)
        return [one], [replace(one, kind="linear_upper")]
    if z * z > D:
        raise ValueError("need z <= sqrt(D)")
    lower = _linear_pieces(P, z, D, eta, 0, "linear_lower")
    upper = _linear_pieces(P, z, D, eta, 1, "linear_upper")
    return lower, upper


def factorable_split(w: DivisorWeight, R: float, S: float):
    """gamma1 * gamma2 = w with gamma1 on [1, R] and gamma2 on [1, S]."""
    if R * S < w.level:
        raise ValueError("need R*S >= level")
    one = lambda: _from_rows([(1, 1.0, 1)], R, w.sift_lo, w.sift_hi, w.kind, 1.0)
    if not w.cells:
        if w.d.size == 1 and w.d[0] == 1:
            g1 = _from_rows([(1, float(w.lam[0]), 1)], R, w.sift_lo, w.sift_hi, w.kind, 1.0)
            return g1, replace(one(), level=S)
        raise FactorizationError("weight carries no block structure")
    cells = sorted(w.cells, key=lambda c: -max(c))
    logR, logS = math.log(R) + 1e-12, math.log(S) + 1e-12
    side = [0] * len(cells)

    def place(i, a, b):
        if i == len(cells):
            return True
        lc = math.log(max(cells[i]))
        for s_, room in ((0, a), (1, b)):
            if lc <= room:
                side[i] = s_
                if place(i + 1, a - lc if s_ == 0 else a, b - lc if s_ == 1 else b):
                    return True
        return False

    if not place(0, logR, logS):
        raise FactorizationError("no split of the block structure fits R, S")
    d0 = int(w.d[0])
    coef = float(w.lam[0]) * (-1) ** len(_prime_divisors(d0)) if d0 > 1 else float(w.lam[0])

    def product(cs, c):
        rows = [(1, c, 1)]
        for cell in cs:
            rows = [(d * p, -lam, ph * (p - 1)) for d, lam, ph in rows for p in cell]
        return rows

    g1c = [c for c, s_ in zip(cells, side) if s_ == 0]
    g2c = [c for c, s_ in zip(cells, side) if s_ == 1]
    g1 = _from_rows(product(g1c, coef), R, w.sift_lo, w.sift_hi, w.kind, 1.0, g1c)
    g2 = _from_rows(product(g2c, 1.0), S, w.sift_lo, w.sift_hi, w.kind, 1.0, g2c)
    return g1, g2


def dirichlet_convolve(a: DivisorWeight, b: DivisorWeight) -> dict[int, float]:
    out: dict[int, float] = {}
    for d1, l1 in zip(a.d.tolist(), a.lam.tolist()):
        for d2, l2 in zip(b.d.tolist(), b.lam.tolist()):
            out[d1 * d2] = out.get(d1 * d2, 0.0) + l1 * l2
    return out


# ---------------------------------------------------------------------------
# main sieves


@dataclass
class MainSieve:
    weight: DivisorWeight
    pieces: list = field(repr=False)

    @property
    def density(self) -> float:
        return self.weight.density()

    def values(self, hi: int) -> np.ndarray:
        return self.weight.divisor_sums(hi) * self.weight.normalization


def main_sieves(spec: SieveSpec) -> dict[str, MainSieve]:
    """omega_M, Omega_M, Omega'_M and the [P1, P0) interval sieves.

    Each sieve is normalised by the Mertens product over its own sifting range.
    """
    P1, eta = spec.P1, spec.eta
    z1, z2, z3, L = spec.z1, spec.z2, spec.z3, spec.level_M
    if not (P1 < spec.P0 and L >= 1 and spec.level_P1P0 >= 1 and z1 < z2):
        raise ValueError("parameter hierarchy violated for main sieves")
    out = {}

    lower = _linear_pieces(P1, z1, L, eta, 0, "main_omega")
    pieces = list(lower)
    scale = [1.0] * len(lower)
    for p in small_primes(max(z1, P1), z2):
        up = _linear_pieces(P1, z1, L / p, eta, 1, "main_omega")
        for w in up:
            rows = [(d * p, lam, ph * (p - 1)) for d, lam, ph in
                    zip(w.d.tolist(), w.lam.tolist(), w.phi.tolist())]
            cells = w.cells + ((p,),)
            pieces.append(_from_rows(rows, L, P1, z2, "main_omega", w.normalization, cells))
            scale.append(-0.5)
    out["omega_M"] = MainSieve(combine(pieces, scale=scale), list(zip(scale, pieces)))

    ups = _linear_pieces(P1, math.nextafter(z3, math.inf), L, eta, 1, "main_Omega")
    out["Omega_M"] = MainSieve(combine(ups), ups)
    ups = _linear_pieces(P1, z1, L, eta, 1, "main_OmegaPrime")
    out["OmegaPrime_M"] = MainSieve(combine(ups), ups)
    lo = _linear_pieces(P1, spec.P0, spec.level_P1P0, eta, 0, "interval_lower")
    out["omega_P1P0"] = MainSieve(combine(lo), lo)
    up = _linear_pieces(P1, spec.P0, spec.level_P1P0, eta, 1, "interval_upper")
    out["Omega_P1P0"] = MainSieve(combine(up), up)
    return out


# ---------------------------------------------------------------------------
# divisor-sum identity


def divisor_sum_identity_check(lam: dict, g: dict, e: int, Pcal: int, tol: float = 1e-12):
    """Both sides of the divisor-sum identity by exhaustive enumeration.

    lam: d -> lambda(d) on divisors of Pcal; g: p -> g(p) in [0, 1).
    Returns (ok, lhs, rhs).
    """
    ps = _prime_divisors(Pcal)
    if math.prod(ps) != Pcal or Pcal % e:
        raise ValueError("need Pcal squarefree and e | Pcal")
    if any(not 0 <= g[p] < 1 for p in ps):
        raise ValueError("need 0 <= g(p) < 1")
    if any(Pcal % d for d in lam):
        raise ValueError("lambda must live on divisors of Pcal")

    def divs(n):
        q = [p for p in ps if n % p == 0]
        return [math.prod(c) for k in range(len(q) + 1) for c in itertools.combinations(q, k)]

    def mult(fn, n):
        return math.prod(fn(p) for p in ps if n % p == 0)

    gf = lambda n: mult(lambda p: g[p], n)
    hf = lambda n: mult(lambda p: g[p] / (1 - g[p]), n)
    muf = lambda n: (-1) ** sum(1 for p in ps if n % p == 0)
    theta = lambda b: sum(lam.get(d, 0.0) for d in divs(b))

    lhs = gf(e) * sum(lam.get(d * e, 0.0) * gf(d) for d in divs(Pcal // e))
    rhs_sum = sum(theta(b) * hf(b) * muf(math.gcd(b, e)) / hf(math.gcd(b, e))
                  for b in divs(Pcal))
    rhs = math.prod(1 - g[p] for p in ps) * muf(e) * hf(e) * rhs_sum
    return abs(lhs - rhs) <= tol * max(1.0, abs(lhs), abs(rhs)), lhs, rhs
