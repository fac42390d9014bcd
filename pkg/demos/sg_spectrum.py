"""Sierpinski gasket: discrete spectra, decimation and limit spacings.

Run: python3 demos/sg_spectrum.py
"""
from mpmath import mp

from fracspec import generate_spectrum, get_system, level_spectrum, lemma_bound_check, verify_decimation
from fracspec.spacing import min_spacing, positive_criterion

sg = get_system("sg")
for m in range(3):
    res = level_spectrum("sg", m, "combinatorial", "neumann")
    pairs = ", ".join(f"{v:.6g}^{k}" for v, k in zip(res.eigenvalues, res.multiplicities))
    print(f"level {m} Neumann: {pairs}")

for m in range(1, 5):
    rep = verify_decimation("sg", m, sg)
    print(f"R maps level {m} into level {m - 1}: {rep.passed} (max distance {rep.max_distance:.2e})")

for bc in ("dirichlet", "neumann"):
    gen = generate_spectrum(sg, "sg", bc, count=15, tol=1e-12)
    gap, (i, j) = min_spacing(gen.as_mpf())
    print(f"\n{bc}: first 15 limits, min spacing {mp.nstr(gap, 12)} between #{i} and #{j}")
    print("  " + ", ".join(mp.nstr(v, 8) for v in gen.as_mpf()))

D0 = [0, 2, 3, 5, 6]
v = positive_criterion(sg, D0)
print(f"\npositive criterion with D0 = {D0}: {v.verdict}")
for n in range(5):
    r = lemma_bound_check(sg, D0, n, verdict=v)
    print(f"  n={n}: |D_n| = {r.size:4d}  min spacing {mp.nstr(r.min_spacing, 8):>12}  >=  C0/5^n = {mp.nstr(r.bound, 8)}")
