"""Chen's positivity constant and how it moves with delta1.

    python3 demos/chen_constant.py
"""
from chensieve.chen import chen_constant
from chensieve.sieves import linear_fF

for s in (2.0, 3.0, 4.0):
    f, F = linear_fF(s)
    print(f"f({s}) = {f:.6f}   F({s}) = {F:.6f}")

for d in (1e-4, 1e-3, 3e-3, 1e-2):
    print(f"delta1 = {d:g}: c0 = {chen_constant(d):.6f}")
