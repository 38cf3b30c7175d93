"""Windows on (N/2, N], exponential sums and grid Fourier norms, major/minor
arc geometry and additive convolution (float FFT or exact integer).
"""
from __future__ import annotations

import csv
import math
import random
import struct
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .models import b_R_array

DEFAULT_GRID_CAP = 1 << 28   # complex grid points allowed in one FFT

WINDOW_MAGIC = b"WNDW"
_WHEADER = struct.Struct("<4sQI4x")  # magic, N, mode (0 float, 1 int64)


@dataclass(frozen=True)
class Window:
    N: int
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.length,):
            raise ValueError(f"window for N={self.N} needs {self.length} values")
        self.values.setflags(write=False)

    @property
    def start(self) -> int:
        return self.N // 2 + 1

    @property
    def length(self) -> int:
        return self.N - self.N // 2

    @property
    def n(self) -> np.ndarray:
        return np.arange(self.start, self.N + 1)

    @classmethod
    def from_array(cls, N: int, full: np.ndarray) -> "Window":
        """Restrict an array indexed by n = 0..>=N to (N/2, N]."""
        return cls(N, np.array(full[N // 2 + 1:N + 1]))

    @classmethod
    def ones(cls, N: int) -> "Window":
        return cls(N, np.ones(N - N // 2))

    def __call__(self, n: int):
        return self.values[n - self.start] if self.start <= n <= self.N else 0

    def shift(self, k: int) -> "Window":
        """n -> f(n + k), zero outside the window."""
        out = np.zeros_like(self.values)
        if k >= 0:
            out[:self.length - k] = self.values[k:]
        else:
            out[-k:] = self.values[:self.length + k]
        return Window(self.N, out)

    def plus(self) -> "Window":
        return self.shift(2)

    def minus(self) -> "Window":
        return self.shift(-2)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "value"])
            ints = np.issubdtype(self.values.dtype, np.integer)
            for n, v in zip(self.n.tolist(), self.values.tolist()):
                w.writerow([n, v if ints else repr(v)])

    @classmethod
    def from_csv(cls, path) -> "Window":
        with open(path, encoding="utf-8") as fh:
            rows = list(csv.reader(fh))[1:]
        N = int(rows[-1][0])
        vals = [r[1] for r in rows]
        if all(v.lstrip("-").isdigit() for v in vals):
            return cls(N, np.array([int(v) for v in vals], dtype=np.int64))
        return cls(N, np.array([float(v) for v in vals]))

    def dump(self, path) -> None:
        ints = np.issubdtype(self.values.dtype, np.integer)
        with open(path, "wb") as fh:
            fh.write(_WHEADER.pack(WINDOW_MAGIC, self.N, int(ints)))
            fh.write(self.values.astype("<i8" if ints else "<f8").tobytes())

    @classmethod
    def load(cls, path) -> "Window":
        with open(path, "rb") as fh:
            magic, N, mode = _WHEADER.unpack(fh.read(_WHEADER.size))
            if magic != WINDOW_MAGIC:
                raise ValueError("not a window dump")
            vals = np.frombuffer(fh.read(), dtype="<i8" if mode else "<f8")
        return cls(int(N), vals.astype(np.int64 if mode else np.float64))


# ---------------------------------------------------------------------------
# exponential sums


def exp_sum(f: Window, alpha: float) -> complex:
    ph = np.exp(2j * np.pi * ((alpha * f.n) % 1.0))
    return complex(np.sum(f.values * ph))


def _grid_transform(f: Window, oversample: int, cap: int):
    if oversample < 4:
        raise ValueError("oversample must be >= 4")
    L = oversample * f.N
    if L > cap:
        raise MemoryError(f"grid of {L} points exceeds cap {cap}")
    x = np.zeros(L, dtype=complex if np.iscomplexobj(f.values) else float)
    x[f.start:f.N + 1] = f.values
    # S(k/L) = sum_n f(n) e(kn/L) = L * ifft(x)[k]
    S = np.fft.ifft(x) * L
    defect = math.pi * float(np.sum(np.abs(f.n * f.values))) / L
    return L, S, defect


def fourier_norm(f: Window, oversample: int = 8, cap: int = DEFAULT_GRID_CAP):
    """(max_k |S(k/L)|, defect) on the grid L = oversample * N.

    The true supremum lies in [value, value + defect].
    """
    _, S, defect = _grid_transform(f, oversample, cap)
    return float(np.max(np.abs(S))), defect


def parseval_gap(f: Window, oversample: int = 8) -> float:
    """Relative difference between sum |S|^2 / L over the grid and ||f||_2^2."""
    L, S, _ = _grid_transform(f, oversample, DEFAULT_GRID_CAP)
    lhs = float(np.sum(np.abs(S) ** 2)) / L
    rhs = float(np.sum(np.abs(f.values) ** 2))
    return abs(lhs - rhs) / max(rhs, 1e-300)


# ---------------------------------------------------------------------------
# arcs


@dataclass(frozen=True)
class ArcSet:
    R: int
    N: int
    centers: tuple  # Fractions b/q in [0, 1]

    @property
    def radius(self) -> Fraction:
        return Fraction(self.R, self.N)


def major_arcs(R: int, N: int) -> ArcSet:
    if R < 1:
        raise ValueError("need R >= 1")
    cs = {Fraction(b, q) for q in range(1, R + 1) for b in range(0, q + 1)
          if math.gcd(b, q) == 1}
    return ArcSet(R, N, tuple(sorted(cs)))


def in_regime(R: int, N: int) -> bool:
    return R**11 <= N


def classify(alpha, arcs: ArcSet) -> str:
    """'major' or 'minor' by exact rational comparison (floats are taken exactly)."""
    a = Fraction(alpha) % 1
    rad = arcs.radius
    for q in range(1, arcs.R + 1):
        b = round(a * q)
        for bb in (b - 1, b, b + 1):
            if math.gcd(bb, q) == 1 and abs(a - Fraction(bb, q)) <= rad:
                return "major"
    return "minor"


def grid_major_mask(L: int, arcs: ArcSet) -> np.ndarray:
    """Mask of grid points k/L (k < L) inside the major arcs, in exact integers.

    k/L is within R/N of b/q iff |k q - b L| N <= R L q.
    """
    k = np.arange(L, dtype=np.int64)
    mask = np.zeros(L, dtype=bool)
    R, N = arcs.R, arcs.N
    for q in range(1, R + 1):
        b0 = (k * q + L // 2) // L
        for b in (b0 - 1, b0, b0 + 1):
            ok = np.gcd(b, q) == 1
            dist = np.abs(k * q - b * L)
            mask |= ok & (dist * N <= R * L * q)
    return mask


def restricted_norm(f: Window, arcs: ArcSet, side: str, oversample: int = 8,
                    cap: int = DEFAULT_GRID_CAP):
    """Grid Fourier norm over the major or minor side, with the same defect."""
    if side not in ("major", "minor"):
        raise ValueError("side must be 'major' or 'minor'")
    L, S, defect = _grid_transform(f, oversample, cap)
    mask = grid_major_mask(L, arcs)
    if side == "minor":
        mask = ~mask
    vals = np.abs(S[mask])
    return (float(vals.max()) if vals.size else 0.0), defect


# ---------------------------------------------------------------------------
# convolution


def _fft_conv(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    L = a.size + b.size - 1
    size = 1 << (L - 1).bit_length()
    out = np.fft.irfft(np.fft.rfft(a, size) * np.fft.rfft(b, size), size)
    return out[:L]


def _fft_error_bound(a: np.ndarray, b: np.ndarray) -> float:
    L = a.size + b.size
    na = float(np.linalg.norm(a.astype(float)))
    nb = float(np.linalg.norm(b.astype(float)))
    return na * nb * np.finfo(float).eps * (12 * math.log2(max(L, 2)) + 12)


def _exact_conv(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Integer convolution: rounded FFT when its error bound is < 1/4, limb split otherwise."""
    if _fft_error_bound(a, b) < 0.25:
        return np.rint(_fft_conv(a.astype(float), b.astype(float))).astype(np.int64)
    bits = max(int(np.abs(a).max()).bit_length(), int(np.abs(b).max()).bit_length())
    if bits <= 1:
        # cannot split further; schoolbook in exact integers
        return np.convolve(a, b)
    h = (bits + 1) // 2
    B = 1 << h
    a_hi, a_lo = np.divmod(a, B)
    b_hi, b_lo = np.divmod(b, B)
    hh = _exact_conv(a_hi, b_hi)
    mid = _exact_conv(a_hi, b_lo) + _exact_conv(a_lo, b_hi)
    ll = _exact_conv(a_lo, b_lo)
    return (hh << (2 * h)) + (mid << h) + ll


def _poly_mod(c: np.ndarray, x: int, p: int) -> int:
    """sum c[i] x^i mod p, p < 2^31."""
    n = c.size
    B = 1 << 10
    pw = np.ones(B, dtype=np.int64)
    for j in range(1, B):
        pw[j] = pw[j - 1] * x % p
    step = pow(x, B, p)
    total, scale = 0, 1
    cm = c % p
    for s in range(0, n, B):
        blk = cm[s:s + B]
        total = (total + scale * int(np.sum(blk * pw[:blk.size] % p))) % p
        scale = scale * step % p
    return total


def identity_check(a, b, c, trials: int = 3, seed: int = 0) -> bool:
    """Randomised check of the polynomial identity A(x) B(x) = C(x) modulo a prime."""
    rng = random.Random(seed)
    p = 2147483629  # prime below 2^31
    for _ in range(trials):
        x = rng.randrange(2, p - 1)
        if _poly_mod(a, x, p) * _poly_mod(b, x, p) % p != _poly_mod(c, x, p):
            return False
    return True


def convolve(f: Window, g: Window, mode: str = "float", verify: bool = True) -> np.ndarray:
    """(f*g)(m) for m = N+1..2N (index i <-> m = N + 1 + i)."""
    if f.N != g.N:
        raise ValueError("windows must share N")
    N, s = f.N, f.start
    if mode == "float":
        full = _fft_conv(f.values.astype(float), g.values.astype(float))
        out = np.zeros(N)
    elif mode == "exact_integer":
        a, b = f.values, g.values
        if not (np.issubdtype(a.dtype, np.integer) and np.issubdtype(b.dtype, np.integer)):
            if not (np.all(a == np.round(a)) and np.all(b == np.round(b))):
                raise ValueError("exact mode needs integer-valued windows")
        a, b = a.astype(np.int64), b.astype(np.int64)
        if a.size and b.size:
            if max(np.abs(a).max(), np.abs(b).max()) >= 2**31:
                raise OverflowError("window values must be below 2^31 in absolute value")
            if int(np.abs(a).max()) * int(np.abs(b).max()) * a.size >= 2**63:
                raise OverflowError("convolution values could exceed 64 bits")
        full = _exact_conv(a, b)
        if verify and not identity_check(a, b, full):
            raise ArithmeticError("exact convolution failed the modular identity check")
        out = np.zeros(N, dtype=np.int64)
    else:
        raise ValueError("mode must be 'float' or 'exact_integer'")
    # full[i] <-> m = 2s + i; 2s > N
    lo = 2 * s - (N + 1)
    out[lo:lo + full.size] = full
    return out


def convolve_direct(f: Window, g: Window) -> np.ndarray:
    """Schoolbook reference for convolve (exact for integer windows)."""
    N, s = f.N, f.start
    full = np.convolve(f.values, g.values)
    out = np.zeros(N, dtype=full.dtype)
    lo = 2 * s - (N + 1)
    out[lo:lo + full.size] = full
    return out


# ---------------------------------------------------------------------------
# b_R transform


@dataclass
class BRReport:
    N: int
    R: int
    samples: int
    major_max_dev: float
    minor_max: float
    at_zero_dev: float
    in_regime: bool


def bR_hat(alpha, ns: np.ndarray, vals: np.ndarray):
    """sum_n b_R(n) e(alpha n); b_R is even, so a cosine sum."""
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    pos = ns > 0
    c0 = float(vals[ns == 0].sum())
    ph = np.cos(2 * np.pi * np.outer(alpha, ns[pos]) % (2 * np.pi))
    return c0 + 2 * ph @ vals[pos]


def bR_transform_check(N: int, R: int, samples: int = 100, seed: int = 0,
                       strict: bool = True) -> BRReport:
    """Sample the major and minor arcs of order R and evaluate the b_R transform."""
    ok = in_regime(R, N)
    if strict and not ok:
        raise ValueError(f"R^11 <= N violated for R={R}, N={N}")
    ns, vals = b_R_array(N, R)
    arcs = major_arcs(R, N)
    rng = np.random.default_rng(seed)
    rad = R / N
    major = []
    while len(major) < samples:
        q = int(rng.integers(1, R + 1))
        b = int(rng.integers(0, q))
        if math.gcd(b, q) != 1:
            continue
        a = (b / q + rng.uniform(-rad, rad)) % 1.0
        if classify(a, arcs) == "major":
            major.append(a)
    minor = []
    while len(minor) < samples:
        a = float(rng.uniform(0, 1))
        if classify(a, arcs) == "minor":
            minor.append(a)
    dev = float(np.max(np.abs(bR_hat(major, ns, vals) - 1)))
    mn = float(np.max(np.abs(bR_hat(minor, ns, vals))))
    z = float(abs(bR_hat(0.0, ns, vals)[0] - 1))
    return BRReport(N, R, samples, dev, mn, z, ok)
