"""A level-3 gasket whose limit spectrum has spacings tending to zero.

A repelling fixed point zeta of R with |R'(zeta)| > R'(0) lets pairs of
limit eigenvalues approach each other geometrically.

Run: python3 demos/sg3_zero_spacing.py
"""
from fractions import Fraction

from mpmath import mp, mpf

from fracspec import extremum_of_derivative, get_system, truncated_spectrum, witness_sequence, zero_criterion
from fracspec.spacing import min_spacing

sg3 = get_system("sg3")
print(f"R(x) = {sg3.R}")
print(f"R'(x) = {sg3.dR}")
print(f"R'(0) = {sg3.c_delta} = {float(sg3.c_delta):.6f}")

ext = extremum_of_derivative(sg3, Fraction(6, 5), Fraction(3, 2))
print(f"R' on [1.2, 1.5] ranges over [{mp.nstr(ext.min_value, 12)}, {mp.nstr(ext.max_value, 8)}]")

z = zero_criterion(sg3)
print("\n" + z.to_text())

c = mpf(90) / 7
zeta_mult = mpf(z.witnesses["zeta_multiplier_enclosure"][0])
print(f"\nwitness pairs from x1 = 3/4, x2 = 1 (predicted ratio c/|R'(zeta)| = {mp.nstr(c / zeta_mult, 8)})")
prev = None
for w in witness_sequence(sg3, Fraction(3, 4), 1, 1, range(7), 8):
    ratio = "" if prev is None else f"  ratio {mp.nstr(w.spacing / prev, 8)}"
    print(f"  m={w.m}: spacing {mp.nstr(w.spacing, 10)}{ratio}")
    prev = w.spacing

print("\ntruncated Neumann limit spectra")
for d in (1, 2, 3):
    vals = [v.value for v in truncated_spectrum(sg3, "sg3", "neumann", d)]
    print(f"  depth {d}: {len(vals):4d} values, min spacing {mp.nstr(min_spacing(vals)[0], 10)}")
