"""Spectra of the 4*pi-periodic ring and the companion Coulomb problem.

The ring Hamiltonian is

    H = (1 / 2 m') (-i hbar d/dtheta - hbar A)^2 + V(theta),   theta in [0, 4 pi)

with ``m' = m0 / (1 + s^2/rho^2)``. Periodicity over 4 pi admits the
half-integer momenta ``exp(i n theta / 2)``, which gives the closed forms

    free:  E_n = hbar^2 n^2 / (8 m')
    flux:  E_n = hbar^2 (n/2 - A)^2 / (2 m')

The flux levels printed in the source derivation use ``(n/4 - A)^2``;
:func:`flux_spectrum_analytic` returns both sets side by side and the
numerical solver decides between them.
"""
from dataclasses import dataclass, field
import json
import math
import warnings

import numpy as np
import scipy.linalg

from .serialize import csv_text, json_text, write_text

PROTON_MASS = 1.673e-27         # kg
PROTON_RADIUS = 0.8418e-15      # m, rms charge radius used as rho
PROTON_SPIN_LENGTH = 1e-15      # m, order of magnitude of s = Sigma / p
FINE_STRUCTURE_C = 137.035999084  # c in atomic-style units, alpha = 1/c


class ConvergenceWarning(UserWarning):
    pass


class BoxSizeWarning(UserWarning):
    pass


def effective_mass(m0, s=0.0, rho=1.0):
    """Spin-renormalized mass ``m0 / (1 + s^2/rho^2)``."""
    if not m0 > 0 or not rho > 0 or not s >= 0:
        raise ValueError(f"need m0 > 0, rho > 0, s >= 0; got m0={m0}, s={s}, rho={rho}")
    return m0 / (1.0 + (s / rho) ** 2)


@dataclass
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = None     # (levels, grid_n), rows are states
    grid_n: int = None
    convergence_estimate: float = None
    quantum_numbers: np.ndarray = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.eigenvalues = np.asarray(self.eigenvalues, dtype=float)
        if np.any(np.diff(self.eigenvalues) < 0):
            raise ValueError("eigenvalues must be ascending")

    def __len__(self):
        return len(self.eigenvalues)

    def as_dict(self):
        out = {
            "params": dict(self.params),
            "eigenvalues": self.eigenvalues.tolist(),
            "convergence_estimate": self.convergence_estimate,
            "grid_n": self.grid_n,
        }
        if self.quantum_numbers is not None:
            out["quantum_numbers"] = [int(n) for n in self.quantum_numbers]
        return out

    def to_json(self, path=None):
        text = json_text(self.as_dict())
        return write_text(path, text) if path is not None else text

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        qn = data.get("quantum_numbers")
        return cls(eigenvalues=np.array(data["eigenvalues"], dtype=float),
                   grid_n=data["grid_n"], convergence_estimate=data["convergence_estimate"],
                   quantum_numbers=None if qn is None else np.array(qn), params=data["params"])

    def to_csv(self, path=None):
        qn = self.quantum_numbers
        if qn is None:
            text = csv_text(("level", "energy"), [[i, e] for i, e in enumerate(self.eigenvalues)])
        else:
            text = csv_text(("level", "n", "energy"),
                            [[i, int(n), e] for i, (n, e) in enumerate(zip(qn, self.eigenvalues))])
        return write_text(path, text) if path is not None else text

    def eigenvectors_csv(self, path=None):
        if self.eigenvectors is None:
            raise ValueError("spectrum carries no eigenvectors")
        n = self.eigenvectors.shape[1]
        theta = 4 * np.pi * np.arange(n) / n
        header = ["theta"]
        cols = [theta]
        for i, psi in enumerate(self.eigenvectors):
            header += [f"re_psi_{i}", f"im_psi_{i}"]
            cols += [psi.real, psi.imag]
        text = csv_text(header, np.column_stack(cols).tolist())
        return write_text(path, text) if path is not None else text


def _sorted_levels(n, energies, params):
    order = np.lexsort((n, energies))
    return Spectrum(eigenvalues=energies[order], quantum_numbers=n[order], params=params)


def _mode_numbers(max_n):
    if max_n < 0:
        raise ValueError("max_n must be >= 0")
    return np.arange(-max_n, max_n + 1)


def free_spectrum_analytic(m_eff=1.0, hbar=1.0, max_n=5):
    """Levels ``hbar^2 n^2 / (8 m')`` for ``n = -max_n .. max_n``."""
    n = _mode_numbers(max_n)
    energies = hbar**2 * n.astype(float) ** 2 / (8 * m_eff)
    return _sorted_levels(n, energies, {"kind": "free-analytic", "m_eff": m_eff,
                                        "hbar": hbar, "max_n": max_n})


@dataclass
class FluxLevels:
    """Closed-form flux spectra under the two competing readings."""

    flux_A: float
    minimal_coupling: Spectrum
    quarter: Spectrum

    def discrepancy(self):
        """Rows ``(n, minimal, quarter, quarter - minimal)`` ordered by ``n``."""
        mc = dict(zip(self.minimal_coupling.quantum_numbers.tolist(),
                      self.minimal_coupling.eigenvalues.tolist()))
        pp = dict(zip(self.quarter.quantum_numbers.tolist(), self.quarter.eigenvalues.tolist()))
        return [(n, mc[n], pp[n], pp[n] - mc[n]) for n in sorted(mc)]


def flux_spectrum_analytic(m_eff=1.0, hbar=1.0, A=0.0, max_n=5):
    n = _mode_numbers(max_n)
    nf = n.astype(float)
    c = hbar**2 / (2 * m_eff)
    params = {"m_eff": m_eff, "hbar": hbar, "flux_A": A, "max_n": max_n}
    return FluxLevels(
        flux_A=A,
        minimal_coupling=_sorted_levels(n, c * (nf / 2 - A) ** 2,
                                        {"kind": "flux-minimal-coupling", **params}),
        quarter=_sorted_levels(n, c * (nf / 4 - A) ** 2, {"kind": "flux-quarter", **params}),
    )


@dataclass
class RingHamiltonian:
    """Uniform ``grid_n``-point discretization of the ring on [0, 4 pi).

    ``potential`` holds ``V`` sampled at ``theta_j = 4 pi j / grid_n``
    (``None`` means zero). ``radius`` scales the kinetic term as a moment
    of inertia ``m' r^2``; the default of 1 keeps ``theta`` as the
    dynamical coordinate.
    """

    m_eff: float = 1.0
    hbar: float = 1.0
    flux_A: float = 0.0
    potential: np.ndarray = None
    grid_n: int = 256
    radius: float = 1.0

    def __post_init__(self):
        if self.grid_n < 16 or self.grid_n % 2:
            raise ValueError(f"grid_n must be even and >= 16, got {self.grid_n}")
        if not self.m_eff > 0 or not self.hbar > 0 or not self.radius > 0:
            raise ValueError("m_eff, hbar and radius must be positive")
        if self.potential is not None:
            pot = np.asarray(self.potential, dtype=float)
            if pot.shape != (self.grid_n,):
                raise ValueError(f"potential must have shape ({self.grid_n},), got {pot.shape}")
            if not np.all(np.isfinite(pot)):
                raise ValueError("potential samples must be finite")
            self.potential = pot

    @classmethod
    def from_function(cls, V, grid_n, **kwargs):
        theta = 4 * np.pi * np.arange(grid_n) / grid_n
        return cls(potential=np.asarray(V(theta), dtype=float) * np.ones(grid_n),
                   grid_n=grid_n, **kwargs)

    @property
    def spacing(self):
        return 4 * np.pi / self.grid_n

    @property
    def theta(self):
        return self.spacing * np.arange(self.grid_n)

    def coarsened(self):
        """The same Hamiltonian on every other grid point."""
        pot = None if self.potential is None else self.potential[::2]
        return RingHamiltonian(m_eff=self.m_eff, hbar=self.hbar, flux_A=self.flux_A,
                               potential=pot, grid_n=self.grid_n // 2, radius=self.radius)

    def matrix(self):
        """Dense Hermitian matrix of the discretized operator.

        Second-order central differences with the flux carried as a phase
        on each nearest-neighbour link, so the point-0/point-(N-1) link
        closes the ring. Real symmetric when ``flux_A == 0``.
        """
        n, h = self.grid_n, self.spacing
        t = self.hbar**2 / (2 * self.m_eff * self.radius**2 * h * h)
        diag = np.full(n, 2 * t)
        if self.potential is not None:
            diag = diag + self.potential
        idx = np.arange(n)
        nxt = (idx + 1) % n
        if self.flux_A == 0:
            H = np.diag(diag)
            H[idx, nxt] = -t
            H[nxt, idx] = -t
        else:
            hop = -t * np.exp(-1j * self.flux_A * h)
            H = np.diag(diag.astype(complex))
            H[idx, nxt] = hop
            H[nxt, idx] = np.conj(hop)
        return H


def _lowest(H, n_levels, vectors):
    return scipy.linalg.eigh(H, eigvals_only=not vectors, subset_by_index=[0, n_levels - 1])


def _fix_phase(vecs):
    # deterministic gauge: largest component of each state real positive
    out = np.empty_like(vecs, dtype=complex)
    for i, psi in enumerate(vecs):
        j = int(np.argmax(np.abs(psi) > 0.999 * np.max(np.abs(psi))))
        out[i] = psi * (abs(psi[j]) / psi[j])
    return out


def ring_eigensolve(H, n_levels=10, eigenvectors=True, estimate_convergence=True):
    """Lowest ``n_levels`` eigenpairs of a :class:`RingHamiltonian`.

    Eigenvectors are returned as rows normalized to ``sum |psi|^2 dtheta
    = 1``. ``convergence_estimate`` is the largest level shift against a
    solve on the grid with half as many points.
    """
    if not 1 <= n_levels <= H.grid_n // 2:
        raise ValueError(f"n_levels must lie in [1, {H.grid_n // 2}], got {n_levels}")
    if eigenvectors:
        w, v = _lowest(H.matrix(), n_levels, True)
        vecs = _fix_phase(v.T / math.sqrt(H.spacing))
    else:
        w, vecs = _lowest(H.matrix(), n_levels, False), None
    estimate = None
    if estimate_convergence and H.grid_n >= 32:
        coarse = H.coarsened()
        k = min(n_levels, coarse.grid_n // 2)
        wc = _lowest(coarse.matrix(), k, False)
        estimate = float(np.max(np.abs(w[:k] - wc)))
        width = float(w[-1] - w[0]) or float(np.max(np.abs(w)))
        if width > 0 and estimate > 1e-3 * width:
            warnings.warn(f"convergence estimate {estimate:.3e} exceeds 1e-3 of spectral "
                          f"width {width:.3e}; refine grid_n", ConvergenceWarning, stacklevel=2)
    params = {"kind": "ring-numerical", "m_eff": H.m_eff, "hbar": H.hbar,
              "flux_A": H.flux_A, "radius": H.radius,
              "potential": "zero" if H.potential is None else "sampled"}
    return Spectrum(eigenvalues=w, eigenvectors=vecs, grid_n=H.grid_n,
                    convergence_estimate=estimate, params=params)


def rayleigh_quotient(H, psi):
    M = H.matrix()
    return float(np.real(np.vdot(psi, M @ psi) / np.vdot(psi, psi)))


@dataclass
class FluxSweep:
    fluxes: np.ndarray
    spectra: list

    def to_csv(self, path=None):
        n = min(len(s) for s in self.spectra)
        header = ["A"] + [f"E_{i}" for i in range(n)]
        rows = [[a] + s.eigenvalues[:n].tolist() for a, s in zip(self.fluxes, self.spectra)]
        text = csv_text(header, rows)
        return write_text(path, text) if path is not None else text


def flux_sweep(fluxes, grid_n=2048, n_levels=10, m_eff=1.0, hbar=1.0, potential=None,
               estimate_convergence=False):
    """Numerical spectra for each flux value, ordered by ascending flux."""
    fluxes = np.sort(np.asarray(fluxes, dtype=float))
    spectra = [ring_eigensolve(RingHamiltonian(m_eff=m_eff, hbar=hbar, flux_A=float(a),
                                               potential=potential, grid_n=grid_n),
                               n_levels, eigenvectors=False,
                               estimate_convergence=estimate_convergence)
               for a in fluxes]
    return FluxSweep(fluxes=fluxes, spectra=spectra)


# --- Coulomb problem ----------------------------------------------------------

def effective_angular_momentum(k):
    """Non-integer ``l`` solving ``l (l + 1) = k^2 / 4``."""
    return (-1.0 + math.sqrt(1.0 + k * k)) / 2.0


def coulomb_closed_form(k, n_r, m_eff=1.0, hbar=1.0, charge_e2=1.0):
    """Exact bound level with ``n_r`` radial nodes for angular index ``k``."""
    nu = n_r + effective_angular_momentum(k) + 1.0
    return -m_eff * charge_e2**2 / (2 * hbar**2 * nu**2)


def coulomb_radial_solve(k, m_eff=1.0, hbar=1.0, charge_e2=1.0, r_max=200.0, grid_n=4000,
                         n_levels=3):
    """Bound energies of the reduced radial equation for ``u = r R``.

    Solves ``-(hbar^2/2m') u'' + [hbar^2 k^2/(8 m' r^2) - e^2/r] u = E u``
    with ``u(0) = u(r_max) = 0`` on ``grid_n`` interior points. Returns
    the negative ones among the ``n_levels`` lowest eigenvalues.
    """
    if grid_n < 200:
        raise ValueError(f"grid_n must be >= 200, got {grid_n}")
    if not 1 <= n_levels <= grid_n:
        raise ValueError("n_levels out of range")
    h = r_max / (grid_n + 1)
    r = h * np.arange(1, grid_n + 1)
    kin = hbar**2 / (2 * m_eff * h * h)
    diag = 2 * kin + hbar**2 * k * k / (8 * m_eff * r * r) - charge_e2 / r
    off = np.full(grid_n - 1, -kin)
    w, v = scipy.linalg.eigh_tridiagonal(diag, off, select="i",
                                         select_range=(0, n_levels - 1))
    ground = v[:, 0]
    tail = abs(ground[-1]) / np.max(np.abs(ground))
    if tail > 1e-6:
        warnings.warn(f"ground state amplitude {tail:.2e} at r_max; enlarge r_max",
                      BoxSizeWarning, stacklevel=2)
    return w[w < 0]


@dataclass(frozen=True)
class CoulombLevel:
    n: int
    k: int
    energy: float
    allowed: bool


def restriction_allows(n, k):
    """Integer test of ``n^2 - n >= k^2 / 4``."""
    return 4 * (n * n - n) >= k * k


def coulomb_levels_paper(m_eff=1.0, alpha=1.0 / FINE_STRUCTURE_C, c=FINE_STRUCTURE_C, n_max=5,
                         k=0):
    """Hydrogen-like levels ``-m' c^2 alpha^2 / (2 n^2)`` tagged by the restriction."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    return [CoulombLevel(n=n, k=k, energy=-0.5 * m_eff * c**2 * alpha**2 / n**2,
                         allowed=restriction_allows(n, k))
            for n in range(1, n_max + 1)]


COULOMB_TABLE_COLUMNS = ("k", "n_r", "solver", "closed_form", "n", "rydberg",
                         "deviation")


def coulomb_comparison(k, m_eff=1.0, hbar=1.0, charge_e2=1.0, r_max=200.0, grid_n=4000,
                       n_levels=3):
    """Solver levels against the exact and the integer-``n`` formulas.

    The i-th solver level is paired with the i-th level the restriction
    allows; ``deviation`` is ``solver - rydberg``. Units follow from
    ``alpha = e^2 / (hbar c)``, so ``c`` drops out.
    """
    solver = coulomb_radial_solve(k, m_eff, hbar, charge_e2, r_max, grid_n, n_levels)
    c = FINE_STRUCTURE_C
    alpha = charge_e2 / (hbar * c)
    allowed = [lv for lv in coulomb_levels_paper(m_eff, alpha, c, n_max=len(solver) + abs(k) + 2,
                                                 k=k) if lv.allowed]
    rows = []
    for n_r, e in enumerate(solver):
        ryd = allowed[n_r]
        rows.append({"k": k, "n_r": n_r, "solver": float(e),
                     "closed_form": coulomb_closed_form(k, n_r, m_eff, hbar, charge_e2),
                     "n": ryd.n, "rydberg": ryd.energy,
                     "deviation": float(e) - ryd.energy})
    return rows


def coulomb_table_csv(rows, path=None):
    text = csv_text(COULOMB_TABLE_COLUMNS, [[r[c] for c in COULOMB_TABLE_COLUMNS] for r in rows])
    return write_text(path, text) if path is not None else text


# --- proton estimate ----------------------------------------------------------

def proton_effective_mass():
    return effective_mass(PROTON_MASS, PROTON_SPIN_LENGTH, PROTON_RADIUS)


def proton_ground_estimate(p_theta):
    """Lowest nonzero free level ``p_theta^2 / (8 m')`` for the proton, SI units."""
    if not math.isfinite(p_theta):
        raise ValueError("p_theta must be finite")
    return p_theta**2 / (8 * proton_effective_mass())
