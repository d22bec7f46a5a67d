"""
Coulomb levels with a half-integer centrifugal term
===================================================

The radial equation carries hbar^2 k^2 / (8 m' r^2), so the effective
angular momentum l_eff solves l(l+1) = k^2/4 and is not an integer
for k != 0.
"""

from moebius.quantum import (coulomb_comparison, coulomb_levels_paper,
                             effective_angular_momentum)

for k in range(4):
    print(f"k = {k}: l_eff = {effective_angular_momentum(k):.6f}")

rows = coulomb_comparison(0, grid_n=4000)
for r in rows:
    print(f"k=0 n={r['n']}: solver {r['solver']:.6f}  closed {r['closed_form']:.6f}")

###############################################################################
# For k = 2 the integer-n formula misses the numerical levels; the
# non-integer l_eff form tracks them.
for r in coulomb_comparison(2, grid_n=16000):
    print(f"k=2 n_r={r['n_r']}: solver {r['solver']:.6f}  l_eff form {r['closed_form']:.6f}  "
          f"integer n={r['n']}: {r['rydberg']:.6f}  deviation {r['deviation']:+.4f}")

print([(lv.n, lv.allowed) for lv in coulomb_levels_paper(n_max=4, k=3)])
