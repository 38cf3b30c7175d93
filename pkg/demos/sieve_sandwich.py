"""Upper and lower beta-sieve weights squeeze the rough-number indicator.

    python3 demos/sieve_sandwich.py
"""
import numpy as np

from chensieve.arith import build_factor_table
from chensieve.sieves import SieveSpec, cramer_array, fundlem_gap_array, presieve_array, presieves

hi = 10**5
t = build_factor_table(hi)
spec = SieveSpec.desk()
lo_w, up_w = presieves(spec.P1, spec.D1, spec.beta)
r = cramer_array(t, spec.P1, hi)[1:]
lo, up = presieve_array(lo_w, hi)[1:], presieve_array(up_w, hi)[1:]
gap = fundlem_gap_array(spec, t, hi)

print(f"P1 = {spec.P1}, D1 = {spec.D1}, beta = {spec.beta}")
print(f"support sizes: lower {len(lo_w)}, upper {len(up_w)}")
print(f"sandwich violations: {int(np.sum(lo > r + 1e-12) + np.sum(r > up + 1e-12))}")
print(f"means: lower {lo.mean():.4f}, rough {r.mean():.4f}, upper {up.mean():.4f}")
print(f"max |upper - r| / gap: {np.max(np.abs(up - r) / gap):.3f}")

# a larger sifting range where the truncation actually bites
P, D = 60, 1000
lo_w, up_w = presieves(P, D, 2.0)
r = cramer_array(t, P, hi)[1:]
lo, up = presieve_array(lo_w, hi)[1:], presieve_array(up_w, hi)[1:]
print(f"\nP = {P}, D = {D}: support sizes lower {len(lo_w)}, upper {len(up_w)}")
print(f"sandwich violations: {int(np.sum(lo > r + 1e-9) + np.sum(r > up + 1e-9))}")
print(f"means: lower {lo.mean():.4f}, rough {r.mean():.4f}, upper {up.mean():.4f}")
