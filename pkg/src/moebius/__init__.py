"""Rigid top on a Moebius band: geometry, constrained dynamics and ring spectra.

Submodules:

``geometry``    embedding, tangent frames, normal holonomy, mesh output
``classical``   constrained phase space, Poisson brackets, meridian dynamics
``quantum``     effective mass, 4*pi-periodic ring spectra, Coulomb levels
``acceptance``  the package's exit criteria, also run by ``moebius validate``
"""
from .geometry import MoebiusShape, centerline_normal, embed, emit_mesh, tangents
from .classical import SpinningBody, PhaseState, evolve, meridian_state, poisson_bracket
from .quantum import (RingHamiltonian, Spectrum, coulomb_radial_solve, effective_mass,
                      flux_spectrum_analytic, free_spectrum_analytic, ring_eigensolve)

__version__ = "0.1.0"
