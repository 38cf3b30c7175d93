"""Singular series, Chen-prime representation counts, the exceptional-set
scan and the sifted additive-sum checks.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass, field

import numpy as np

from .arith import FactorTable, factorize, small_primes
from .characters import DirichletCharacter
from .chen import chen_prime_mask
from .fourier import _exact_conv
from .models import H_R_array
from .sieves import SieveSpec, presieve_array, presieves

# |log local factor| <= TAIL_C / p^2 for p >= 1000
TAIL_C = 6.1


# ---------------------------------------------------------------------------
# singular series


@dataclass(frozen=True)
class SingularSeriesValue:
    m: int
    value: float
    cutoff: int
    tail_bound: float


_C0_CACHE: dict[int, float] = {}


def generic_product(cutoff: int, lo: int = 5) -> float:
    """prod_{lo <= p <= cutoff} (1 - 4/p)(1 - 1/p)^{-4}."""
    key = (cutoff, lo)
    if key not in _C0_CACHE:
        ps = np.array(small_primes(lo, cutoff, closed=True), dtype=float)
        logs = np.log1p(-4 / ps) - 4 * np.log1p(-1 / ps)
        _C0_CACHE[key] = math.exp(math.fsum(logs.tolist()))
    return _C0_CACHE[key]


def tail_bound(cutoff: int) -> float:
    """Relative error of truncating the generic product at cutoff.

    sum_{p > x} p^{-2} <= sum_{n > x, (n,6)=1} n^{-2} <= 1/(3x) + 2/x^2.
    """
    x = cutoff
    return math.expm1(TAIL_C * (1 / (3 * x) + 2 / x**2))


def _odd_prime_factors(n: int, t: FactorTable) -> list[int]:
    return [p for p, _ in factorize(n, t) if p >= 5] if n > 1 else []


def local_factor(m: int, primes_mm4, primes_m2) -> float:
    out = 1.0
    for p in primes_mm4:
        out *= 1 + 1 / (p - 4)
    for p in primes_m2:
        out *= 1 + 2 / (p - 4)
    return out


def singular_series(m: int, t: FactorTable, cutoff: int = 10**5) -> SingularSeriesValue:
    if cutoff < 1000:
        raise ValueError("cutoff must be >= 1000")
    if m < 1:
        raise ValueError("m must be positive")
    if m + 4 > t.limit:
        raise ValueError("m + 4 beyond factor table")
    if m % 6 != 4:
        return SingularSeriesValue(m, 0.0, cutoff, tail_bound(cutoff))
    mm4 = sorted(set(_odd_prime_factors(m, t)) | set(_odd_prime_factors(m + 4, t)))
    m2 = _odd_prime_factors(m + 2, t)
    val = 13.5 * generic_product(cutoff) * local_factor(m, mm4, m2)
    return SingularSeriesValue(m, val, cutoff, tail_bound(cutoff))


def _prime_log_sums(t: FactorTable, hi: int, weight) -> np.ndarray:
    """sum over distinct primes p >= 5 dividing n of weight(p), for n = 0..hi."""
    m = np.arange(hi + 1, dtype=np.int64)
    out = np.zeros(hi + 1)
    last = np.zeros(hi + 1, dtype=np.int64)
    active = np.flatnonzero(m > 1)
    while active.size:
        p = t.spf[m[active]].astype(np.int64)
        new = (p != last[active]) & (p >= 5)
        out[active[new]] += weight(p[new].astype(float))
        last[active] = p
        m[active] //= p
        active = active[m[active] > 1]
    return out


def singular_series_array(t: FactorTable, hi: int, cutoff: int = 10**5) -> np.ndarray:
    """S(m) for m = 0..hi."""
    if hi + 4 > t.limit:
        raise ValueError("hi + 4 beyond factor table")
    g1 = _prime_log_sums(t, hi + 4, lambda p: np.log1p(1 / (p - 4)))
    g2 = _prime_log_sums(t, hi + 4, lambda p: np.log1p(2 / (p - 4)))
    m = np.arange(hi + 1)
    # no prime p >= 5 divides both m and m + 4
    out = 13.5 * generic_product(cutoff) * np.exp(g1[m] + g1[m + 4] + g2[m + 2])
    out[m % 6 != 4] = 0.0
    return out


# ---------------------------------------------------------------------------
# representation counts


def chen_indicator(t: FactorTable, hi: int) -> np.ndarray:
    """0/1 array over n = 0..hi marking odd Chen primes.

    2 is a Chen prime (4 = 2 * 2) but representations use odd primes only,
    so odd m always get 0.
    """
    c = chen_prime_mask(t, hi).astype(np.int64)
    c[:3] = 0
    return c


def rep_count(m: int, t: FactorTable) -> int:
    """Ordered pairs (p1, p2) of odd Chen primes with p1 + p2 = m, by a direct loop."""
    if m < 0 or m + 2 > t.limit:
        raise ValueError("m out of range for factor table")
    c = chen_indicator(t, m)
    total = 0
    for p in np.flatnonzero(c).tolist():
        total += int(c[m - p])
    return total


def rep_counts_upto(t: FactorTable, hi: int) -> np.ndarray:
    """Ordered Chen-pair counts for m = 0..hi by one exact convolution."""
    c = chen_indicator(t, hi)
    return _exact_conv(c, c)[:hi + 1]


def rep_window(N: int, t: FactorTable) -> np.ndarray:
    """Counts for m in (N, 2N] (index i <-> m = N + 1 + i)."""
    if 2 * N + 2 > t.limit:
        raise ValueError("factor table must reach 2N + 2")
    return rep_counts_upto(t, 2 * N)[N + 1:]


def unordered(m: int, ordered: int, t: FactorTable) -> int:
    """Unordered pair count from the ordered one."""
    half = m // 2
    diag = int(m % 2 == 0 and half + 2 <= t.limit and chen_indicator(t, half)[half])
    return (ordered + diag) // 2


@dataclass
class ScanReport:
    N: int
    residue_filter: str = "m % 6 == 4"
    exceptions: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)   # decade -> {count, exceptions, min, sum}
    last_m: int = 0
    verified: bool = False

    def to_dict(self) -> dict:
        d = asdict(self)
        for row in d["stats"].values():
            row["avg"] = row["sum"] / row["count"] if row["count"] else 0.0
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "ScanReport":
        stats = {k: {kk: v for kk, v in row.items() if kk != "avg"}
                 for k, row in d.get("stats", {}).items()}
        return cls(d["N"], d.get("residue_filter", "m % 6 == 4"), list(d["exceptions"]),
                   stats, d.get("last_m", 0), d.get("verified", False))

    def merge(self, other: "ScanReport") -> "ScanReport":
        stats = {k: dict(v) for k, v in self.stats.items()}
        for k, row in other.stats.items():
            if k in stats:
                a = stats[k]
                a["count"] += row["count"]
                a["exceptions"] += row["exceptions"]
                a["sum"] += row["sum"]
                a["min"] = min(a["min"], row["min"])
            else:
                stats[k] = dict(row)
        return ScanReport(max(self.N, other.N), self.residue_filter,
                          sorted(set(self.exceptions) | set(other.exceptions)), stats,
                          max(self.last_m, other.last_m), self.verified and other.verified)

    def exceptions_above(self, lo: int) -> list:
        return [m for m in self.exceptions if m > lo]


def _decade(m: int) -> str:
    k = len(str(m)) - 1
    return f"1e{k}"


def _write_atomic(path, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".ckpt-")
    with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _load_checkpoint(path, N: int, filt: str):
    if not path or not os.path.exists(path):
        return None
    with open(path, encoding="utf-8") as fh:
        d = json.load(fh)
    if d.get("N") != N or d.get("filter") != filt:
        raise ValueError("checkpoint belongs to a different scan")
    return ScanReport(N, filt, list(d["partial_exceptions"]), d.get("stats", {}), d["last_m"])


def exceptional_scan(N: int, t: FactorTable, checkpoint=None, chunk: int = 1 << 17,
                     on_chunk=None) -> ScanReport:
    """All m = 4 (mod 6), m <= N with no ordered pair of Chen primes summing to m.

    Works in chunks of m; after each chunk the partial report is written to
    `checkpoint` (if given) atomically, and a rerun resumes from it.  Every
    exception is re-verified by a direct loop at the end.
    """
    if N + 2 > t.limit:
        raise ValueError("factor table must reach N + 2")
    filt = "m % 6 == 4"
    rep = _load_checkpoint(checkpoint, N, filt) or ScanReport(N, filt)
    c = chen_indicator(t, N)
    a = rep.last_m
    while a < N:
        b = min(N, a + chunk)
        counts = _exact_conv(c[:b + 1], c[:b + 1])[a + 1:b + 1]
        ms = np.arange(a + 1, b + 1)
        sel = ms % 6 == 4
        for m, k in zip(ms[sel].tolist(), counts[sel].tolist()):
            row = rep.stats.setdefault(_decade(m), {"count": 0, "exceptions": 0,
                                                     "min": k, "sum": 0})
            row["count"] += 1
            row["sum"] += k
            row["min"] = min(row["min"], k)
            if k == 0:
                row["exceptions"] += 1
                rep.exceptions.append(m)
        rep.last_m = b
        if checkpoint:
            _write_atomic(checkpoint, json.dumps({
                "N": N, "filter": filt, "last_m": b,
                "partial_exceptions": rep.exceptions, "stats": rep.stats}, sort_keys=True))
        if on_chunk:
            on_chunk(rep)
        a = b
    rep.exceptions.sort()
    rep.verified = [m for m in rep.exceptions if rep_count(m, t) == 0] == rep.exceptions
    return rep


# ---------------------------------------------------------------------------
# sifted additive sums


def _presieve_pair(spec: SieveSpec, hi: int):
    lo, up = presieves(spec.P1, spec.D1, spec.beta)
    return {"lower": presieve_array(lo, hi), "upper": presieve_array(up, hi)}


def _four_sum(f1, f2, f3, f4, m: int, X: int, weight=None) -> float:
    n = np.arange(1, X + 1)
    k = m - n
    ok = k >= 0
    n, k = n[ok], k[ok]
    v = f1[n] * f2[n + 2] * f3[k] * f4[k + 2]
    if weight is not None:
        v = v * weight[n]
    return math.fsum(v.tolist())


@dataclass
class AdditiveResult:
    m: int
    X: int
    lhs: float
    main: float
    ratio: float | None      # None when the singular series vanishes


def presieve_additive_check(m: int, X: int, spec: SieveSpec, kinds, t: FactorTable,
                            sieves=None, cutoff: int = 10**5) -> AdditiveResult:
    """lhs = sum_{n <= X} f1(n) f2(n+2) f3(m-n) f4(m-n+2) against X S(m)."""
    if X > m:
        raise ValueError("need X <= m")
    fs = sieves or _presieve_pair(spec, m + 2)
    f = [fs[k] for k in kinds]
    lhs = _four_sum(*f, m, X)
    S = singular_series(m, t, cutoff).value
    main = X * S
    return AdditiveResult(m, X, lhs, main, lhs / main if S else None)


def truncated_singular_series(m: int, P: float) -> float:
    """The singular series with every product restricted to 5 <= p < P."""
    if m % 6 != 4:
        return 0.0
    out = 13.5
    for p in small_primes(5, P):
        out *= (1 - 4 / p) * (1 - 1 / p) ** -4
        if m % p == 0 or (m + 4) % p == 0:
            out *= 1 + 1 / (p - 4)
        if (m + 2) % p == 0:
            out *= 1 + 2 / (p - 4)
    return out


@dataclass
class ExceptionalResult:
    m: int
    r: int
    case: str
    lhs: float
    sigma1: float | None
    sigma2: float | None
    S: tuple          # S1..S6
    S7: int           # sum chi(b) chi(b+2) over (m-b)(m-b+2) coprime to r
    predicted: float | None
    alpha_sum: int    # sum over b mod r of the restriction a(b)


def character_sums(m: int, chi: DirichletCharacter):
    """S1..S7 and the restriction tables a1, a2 over b mod r."""
    r = chi.modulus
    x = chi.real_values()
    b = np.arange(r)
    cop = np.gcd(b, r) == 1
    u = lambda k: cop[(k) % r]
    c = lambda k: x[(k) % r]
    S1 = int(np.sum(u(b) & u(b + 2) & u(m - b) & u(m - b + 2)))
    S2 = int(np.sum(c(b) * (u(b + 2) & u(m - b) & u(m - b + 2))))
    S3 = int(np.sum(c(b) * c(m - b) * (u(b + 2) & u(m - b + 2))))
    S4 = int(np.sum(c(b + 2) * c(m - b) * (u(b) & u(m - b + 2))))
    S5 = int(np.sum(c(b + 2) * (u(b) & u(m - b) & u(m - b + 2))))
    S6 = int(np.sum(c(b) * c(b + 2) * c(m - b) * u(m - b + 2)))
    S7 = int(np.sum(c(b) * c(b + 2) * (u(m - b) & u(m - b + 2))))
    a1 = ((c(b) == -1) & (c(m - b) == -1) & u(b + 2) & u(m - b + 2)).astype(np.int64)
    a2 = ((c(b) == 1) & (c(b + 2) == 1) & (c(m - b) == -1) & u(m - b + 2)).astype(np.int64)
    return (S1, S2, S3, S4, S5, S6), S7, a1, a2


def exceptional_additive_check(m: int, X: int, chi: DirichletCharacter, case: str,
                               spec: SieveSpec, t: FactorTable, kinds=("lower",) * 4,
                               sieves=None, cutoff: int = 10**5,
                               with_lhs: bool = True) -> ExceptionalResult:
    """The character-restricted sifted sum next to its predicted main term."""
    if not (chi.is_real and chi.primitive) or chi.modulus < 3:
        raise ValueError("need a real primitive character of modulus >= 3")
    if case not in ("a1", "a2"):
        raise ValueError("case must be 'a1' or 'a2'")
    S, S7, a1, a2 = character_sums(m, chi)
    S1 = S[0]
    s1 = S[2] / S1 if S1 else None
    s2 = S[3] / S1 if S1 else None
    a = a1 if case == "a1" else a2
    lhs = float("nan")
    if with_lhs:
        fs = sieves or _presieve_pair(spec, m + 2)
        f = [fs[k] for k in kinds]
        w = a[np.arange(X + 1) % chi.modulus].astype(float)
        lhs = _four_sum(*f, m, X, weight=w)
    pred = None
    if S1:
        SS = singular_series(m, t, cutoff).value if m + 4 <= t.limit else float("nan")
        pred = X * SS * ((1 + s1) / 4 if case == "a1" else (1 - s1 - s2) / 8)
    return ExceptionalResult(m, chi.modulus, case, lhs, s1, s2, S, S7, pred, int(a.sum()))


def correlation_upper_check(m: int, N: int, R: float, spec: SieveSpec, t: FactorTable,
                            kinds=("lower", "lower", "lower"), slot: int = 0,
                            sieves=None, H=None, cutoff: int = 10**5):
    """(lhs, envelope, ratio) for sum_{N/2 < n <= N} H_R(n)|f1(n+2)||f2(m-n)||f3(m-n+2)|.

    slot moves H_R to position 0..3 among (n, n+2, m-n, m-n+2).
    """
    top = m + 2
    if m + 4 > t.limit:
        raise ValueError("factor table must reach m + 4")
    fs = sieves or _presieve_pair(spec, top)
    H = H if H is not None else np.concatenate([[0.0], H_R_array(R, t, top)])
    n = np.arange(N // 2 + 1, N + 1)
    args = [n, n + 2, m - n, m - n + 2]
    ws = [np.abs(fs[k]) for k in kinds]
    ws.insert(slot, H)
    v = np.ones(n.size)
    for w, a in zip(ws, args):
        v = v * w[a]
    lhs = math.fsum(v.tolist())
    env = N * singular_series(m, t, cutoff).value
    return lhs, env, lhs / env if env else None
