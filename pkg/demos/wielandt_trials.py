"""Eigenvalue shifts under block off-diagonal perturbations.

Run: python3 demos/wielandt_trials.py
"""
import numpy as np

from fracspec.perturbation import run_trials, wielandt_check

a = np.diag([2.0, 0.0])
for eps in (1e-1, 1e-2, 1e-3):
    b = np.array([[0.0, eps], [eps, 0.0]])
    e = wielandt_check(a, b, 1).entries[0]
    print(f"eps={eps:g}: top shift {e.shift:.6e} <= bound ||B||^2/gap = {e.bound:.6e}")

rows = run_trials(10, 4, 200, 0.1, seed=0)
print(f"\n200 random trials, n=10, d=4: {sum(r.violation for r in rows)} violations")
print(f"smallest distance to either end of the allowed interval: top {min(r.worst_margin_top for r in rows):.3e}, bottom {min(r.worst_margin_bottom for r in rows):.3e}")
