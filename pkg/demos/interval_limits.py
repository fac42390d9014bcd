"""Renormalised limits on the unit interval recover pi^2 k^2.

Run: python3 demos/interval_limits.py
"""
from mpmath import mp, pi

from fracspec import generate_spectrum, get_system, positive_criterion

system = get_system("interval")
print(f"R(z) = {system.R}, c = R'(0) = {system.c_delta}")

gen = generate_spectrum(system, "interval", "dirichlet", count=8, tol=1e-12)
print(f"\nfirst 8 Dirichlet limits ({gen.depth + 1} levels used)")
for k, v in enumerate(gen.values, start=1):
    print(f"  k={k}  {mp.nstr(v.value, 15):>20}  pi^2 k^2 = {mp.nstr(pi**2 * k * k, 15):>20}  bound {mp.nstr(v.error_bound, 3)}")

verdict = positive_criterion(system, [0, 2, 4])
print("\n" + verdict.to_text())
