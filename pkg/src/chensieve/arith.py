"""Smallest-prime-factor tables and multiplicative functions.

Everything downstream evaluates arithmetic functions through a FactorTable,
either one integer at a time or as whole numpy arrays over a range.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

# 32-bit entries, so a 10^8 table is 400 MB; raise the cap explicitly if needed
DEFAULT_MEMORY_CAP = 1 << 30

CACHE_MAGIC = b"SPFT"
CACHE_VERSION = 1
_HEADER = struct.Struct("<4sIQ")  # magic, version, N_max -> 16 bytes


class CapacityError(MemoryError):
    pass


@dataclass(frozen=True)
class FactorTable:
    limit: int
    spf: np.ndarray  # uint32, spf[0] = 0, spf[1] = 1

    def __post_init__(self):
        self.spf.setflags(write=False)

    def check(self, n: int) -> None:
        if not 1 <= n <= self.limit:
            raise ValueError(f"n={n} outside factor table range [1, {self.limit}]")

    def is_prime(self, n: int) -> bool:
        return 2 <= n <= self.limit and int(self.spf[n]) == n

    def primes(self, lo: int = 2, hi: int | None = None) -> np.ndarray:
        """Primes in [lo, hi] (hi defaults to the table limit)."""
        hi = self.limit if hi is None else min(hi, self.limit)
        lo = max(lo, 2)
        if hi < lo:
            return np.zeros(0, dtype=np.int64)
        idx = np.arange(lo, hi + 1, dtype=np.int64)
        return idx[self.spf[lo:hi + 1] == idx]


def build_factor_table(n_max: int, memory_cap: int = DEFAULT_MEMORY_CAP) -> FactorTable:
    if not 2 <= n_max <= 2**32 - 1:
        raise ValueError("N_max must lie in [2, 2^32 - 1]")
    need = 4 * (n_max + 1)
    if need > memory_cap:
        raise CapacityError(f"table of {need} bytes exceeds memory cap {memory_cap}")
    spf = np.zeros(n_max + 1, dtype=np.uint32)
    spf[1] = 1
    spf[2::2] = 2
    for p in range(3, math.isqrt(n_max) + 1, 2):
        if spf[p] == 0:
            block = spf[p * p::2 * p]
            block[block == 0] = p
    rest = np.flatnonzero(spf == 0)
    rest = rest[rest >= 2]
    spf[rest] = rest.astype(np.uint32)
    return FactorTable(n_max, spf)


def save_factor_table(t: FactorTable, path) -> None:
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(CACHE_MAGIC, CACHE_VERSION, t.limit))
        fh.write(t.spf.astype("<u4").tobytes())


def load_factor_table(path) -> FactorTable:
    with open(path, "rb") as fh:
        magic, version, n_max = _HEADER.unpack(fh.read(_HEADER.size))
        if magic != CACHE_MAGIC or version != CACHE_VERSION:
            raise ValueError("not a factor table cache file")
        spf = np.frombuffer(fh.read(), dtype="<u4")
    if spf.size != n_max + 1:
        raise ValueError("truncated factor table cache")
    return FactorTable(int(n_max), spf.astype(np.uint32))


def factorize(n: int, t: FactorTable) -> list[tuple[int, int]]:
    if not 2 <= n <= t.limit:
        raise ValueError(f"n={n} outside [2, {t.limit}]")
    out: list[tuple[int, int]] = []
    spf = t.spf
    while n > 1:
        p = int(spf[n])
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        out.append((p, e))
    return out


def _factor_or_empty(n: int, t: FactorTable):
    return [] if n == 1 else factorize(n, t)


def mult_fn(name: str, n: int, t: FactorTable):
    """phi, mu, tau, bigomega, smallomega or vonmangoldt at n.

    vonmangoldt follows the prime-only convention: log p at primes, 0 at
    prime powers p^k with k >= 2.
    """
    if n < 1:
        raise ValueError("n must be positive")
    f = _factor_or_empty(n, t)
    if name == "phi":
        out = 1
        for p, e in f:
            out *= (p - 1) * p ** (e - 1)
        return out
    if name == "mu":
        if any(e > 1 for _, e in f):
            return 0
        return -1 if len(f) % 2 else 1
    if name == "tau":
        return math.prod(e + 1 for _, e in f)
    if name == "bigomega":
        return sum(e for _, e in f)
    if name == "smallomega":
        return len(f)
    if name == "vonmangoldt":
        return math.log(n) if len(f) == 1 and f[0][1] == 1 else 0.0
    raise ValueError(f"unknown multiplicative function {name!r}")


def divisors(n: int, t: FactorTable) -> list[int]:
    ds = [1]
    for p, e in _factor_or_empty(n, t):
        ds = [d * p**k for d in ds for k in range(e + 1)]
    return sorted(ds)


def radical(n: int, t: FactorTable) -> int:
    return math.prod(p for p, _ in _factor_or_empty(n, t))


# ---------------------------------------------------------------------------
# vectorised range helpers


@dataclass
class FactorStats:
    """Per-n statistics for n in [lo, hi]; index i corresponds to n = lo + i."""
    lo: int
    bigomega: np.ndarray
    smallomega: np.ndarray
    squarefree: np.ndarray
    tau: np.ndarray


def factor_stats(t: FactorTable, lo: int, hi: int) -> FactorStats:
    if lo < 1 or hi > t.limit or hi < lo:
        raise ValueError("range outside factor table")
    m = np.arange(lo, hi + 1, dtype=np.int64)
    size = m.size
    big = np.zeros(size, dtype=np.int32)
    small = np.zeros(size, dtype=np.int32)
    sqf = np.ones(size, dtype=bool)
    tau = np.ones(size, dtype=np.int64)
    run = np.zeros(size, dtype=np.int64)  # exponent of the current prime
    last = np.zeros(size, dtype=np.int64)
    active = np.flatnonzero(m > 1)
    spf = t.spf
    while active.size:
        p = spf[m[active]].astype(np.int64)
        same = p == last[active]
        new = ~same
        a_new = active[new]
        # close out the previous prime's exponent
        tau[a_new] *= run[a_new] + 1
        run[a_new] = 1
        small[a_new] += 1
        a_same = active[same]
        run[a_same] += 1
        sqf[a_same] = False
        last[active] = p
        big[active] += 1
        m[active] //= p
        active = active[m[active] > 1]
    tau *= run + 1
    return FactorStats(lo, big, small, sqf, tau)


def prime_mask(t: FactorTable, hi: int) -> np.ndarray:
    """Boolean array of length hi+1 marking primes."""
    idx = np.arange(hi + 1, dtype=np.int64)
    out = t.spf[:hi + 1].astype(np.int64) == idx
    out[:2] = False
    return out


def vonmangoldt_array(t: FactorTable, hi: int) -> np.ndarray:
    """Prime-only von Mangoldt values on 0..hi."""
    out = np.zeros(hi + 1)
    pm = prime_mask(t, hi)
    out[pm] = np.log(np.flatnonzero(pm))
    return out


def rough_mask(t: FactorTable, P: float, hi: int, lo: float = 2) -> np.ndarray:
    """n in 0..hi having no prime factor in [lo, P); index 0 is False."""
    out = np.ones(hi + 1, dtype=bool)
    out[0] = False
    for p in t.primes(2, int(math.ceil(P)) - 1 if P == int(P) else int(P)):
        if p >= lo and p < P:
            out[p::p] = False
    return out


def mertens_factor(primes) -> float:
    """prod (1 - 1/p)^{-1} over the given primes."""
    out = 1.0
    for p in primes:
        out *= p / (p - 1.0)
    return out


def small_primes(lo: float, hi: float, closed: bool = False) -> list[int]:
    """Primes p with lo <= p < hi (or <= hi when closed), by trial division.

    Used for sifting ranges that may exceed any table at hand; ranges are short.
    """
    top = math.floor(hi)
    if not closed and top == hi:
        top -= 1
    start = max(2, math.ceil(lo))
    if top < start:
        return []
    sieve = np.ones(top + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(top) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return [int(p) for p in np.flatnonzero(sieve) if p >= start]
