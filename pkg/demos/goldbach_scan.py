"""Count Chen-prime representations m = p + p' up to N and compare with the
singular-series prediction.

    python3 demos/goldbach_scan.py 200000
"""
import sys

import numpy as np

from chensieve.arith import build_factor_table
from chensieve.goldbach import exceptional_scan, rep_counts_upto, singular_series_array

N = int(sys.argv[1]) if len(sys.argv) > 1 else 200_000
t = build_factor_table(N + 4)

rep = exceptional_scan(N, t)
print(f"N = {N}: exceptions {rep.exceptions}")

counts = rep_counts_upto(t, N)
S = singular_series_array(t, N)
ms = np.arange(4, N + 1, 6)
# the constant in front is not normalised; watch the trend across decades
ratio = counts[ms] / (S[ms] * ms / np.log(ms) ** 4)
for lo in (10**3, 10**4, 10**5):
    sel = (ms > lo) & (ms <= 10 * lo)
    if sel.any():
        print(f"m in ({lo}, {10 * lo}]: count / (S(m) m / log^4 m) median {np.median(ratio[sel]):.3f}")
