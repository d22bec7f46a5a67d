"""
Ring spectra with and without flux
==================================

Antiperiodic-friendly ring: the wave function lives on [0, 4 pi), so
the free levels are hbar^2 n^2 / (8 m'). A flux A shifts n/2 -> n/2 - A.
"""

import numpy as np

from moebius import RingHamiltonian, free_spectrum_analytic, ring_eigensolve
from moebius.quantum import flux_spectrum_analytic, flux_sweep

exact = free_spectrum_analytic(max_n=4)
num = ring_eigensolve(RingHamiltonian(grid_n=1024), len(exact), eigenvectors=False)
for n, e, w in zip(exact.quantum_numbers, exact.eigenvalues, num.eigenvalues):
    print(f"n = {n:+d}   exact {e:.6f}   grid {w:.6f}")
print("convergence estimate", num.convergence_estimate)

###############################################################################
# Flux sweep. Levels repeat with period 1/2 in A.
sweep = flux_sweep(np.linspace(0, 1, 9), grid_n=256, n_levels=4)
print(sweep.to_csv())

###############################################################################
# The (n/4 - A)^2 reading of the flux levels does not agree with the
# numerics; the minimal-coupling one does.
closed = flux_spectrum_analytic(A=0.25, max_n=6)
spec = ring_eigensolve(RingHamiltonian(grid_n=1024, flux_A=0.25), 6, eigenvectors=False)
print("grid            ", np.round(spec.eigenvalues, 5))
print("(n/2 - A)^2 form", np.round(closed.minimal_coupling.eigenvalues[:6], 5))
print("(n/4 - A)^2 form", np.round(closed.quarter.eigenvalues[:6], 5))
