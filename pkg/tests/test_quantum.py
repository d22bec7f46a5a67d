import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from moebius.quantum import (BoxSizeWarning, ConvergenceWarning, RingHamiltonian, Spectrum,
                             coulomb_closed_form, coulomb_comparison, coulomb_levels_paper,
                             coulomb_radial_solve, coulomb_table_csv, effective_angular_momentum,
                             effective_mass, flux_spectrum_analytic, flux_sweep,
                             free_spectrum_analytic, proton_effective_mass,
                             proton_ground_estimate, rayleigh_quotient, restriction_allows,
                             ring_eigensolve)


def plane_wave_levels(n_levels, A=0.0, V0=0.0, m_eff=1.0, hbar=1.0, kmax=40):
    """Galerkin oracle in the basis exp(i k theta), k in Z/2, for V = V0 cos(theta)."""
    ks = np.arange(-2 * kmax, 2 * kmax + 1) / 2
    H = np.diag(hbar**2 * (ks - A) ** 2 / (2 * m_eff)).astype(complex)
    # cos(theta) couples k to k +- 1, i.e. two steps on the half-integer lattice
    idx = np.arange(len(ks) - 2)
    H[idx, idx + 2] = H[idx + 2, idx] = V0 / 2
    return np.linalg.eigvalsh(H)[:n_levels]


# --- effective mass ---------------------------------------------------------

def test_effective_mass_examples():
    assert effective_mass(3.2, 0.0, 7.0) == 3.2
    assert effective_mass(2.0, 1.0, 1.0) == 1.0
    m = effective_mass(1.673e-27, 1e-15, 0.8418e-15)
    assert m == pytest.approx(6.94e-28, rel=2e-3)
    assert 8 * m == pytest.approx(5.6e-27, rel=0.02)


def test_effective_mass_validation():
    with pytest.raises(ValueError):
        effective_mass(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        effective_mass(1.0, -1.0, 1.0)


@given(st.floats(0.1, 10), st.floats(0.01, 5), st.floats(0.1, 5), st.floats(1.01, 2))
def test_effective_mass_monotone(m0, s, rho, factor):
    m = effective_mass(m0, s, rho)
    assert m <= m0
    assert effective_mass(m0, s * factor, rho) < m
    assert effective_mass(m0, s, rho * factor) > m


def test_proton_estimate():
    assert 8 * proton_effective_mass() == pytest.approx(5.55e-27, rel=1e-3)
    assert proton_ground_estimate(1.0) == pytest.approx(1 / 5.6e-27, rel=0.02)
    assert proton_ground_estimate(0.0) == 0.0
    with pytest.raises(ValueError):
        proton_ground_estimate(math.nan)


# --- closed forms -------------------------------------------------------------

def test_free_analytic_levels():
    spec = free_spectrum_analytic(1.0, 1.0, 2)
    np.testing.assert_array_equal(spec.eigenvalues, [0, 0.125, 0.125, 0.5, 0.5])
    np.testing.assert_array_equal(spec.quantum_numbers, [0, -1, 1, -2, 2])
    assert free_spectrum_analytic(max_n=0).eigenvalues.tolist() == [0.0]
    assert free_spectrum_analytic(2.0, 3.0, 1).eigenvalues[1] == 9 / 16


def test_flux_analytic_readings():
    assert np.array_equal(flux_spectrum_analytic(A=0.0, max_n=4).minimal_coupling.eigenvalues,
                          free_spectrum_analytic(max_n=4).eigenvalues)
    levels = flux_spectrum_analytic(A=0.25, max_n=3)
    n1 = dict(zip(levels.minimal_coupling.quantum_numbers, levels.minimal_coupling.eigenvalues))
    assert n1[1] == 1 / 32
    zero = flux_spectrum_analytic(A=0.0, max_n=3)
    table = {row[0]: row for row in zero.discrepancy()}
    assert table[1][1] == 1 / 8 and table[1][2] == 1 / 32
    assert table[1][3] != 0


def test_numerics_side_with_minimal_coupling():
    spec = ring_eigensolve(RingHamiltonian(grid_n=1024, flux_A=0.25), 6, eigenvectors=False)
    closed = flux_spectrum_analytic(A=0.25, max_n=8)
    mc = closed.minimal_coupling.eigenvalues[:6]
    quarter = closed.quarter.eigenvalues[:6]
    assert np.max(np.abs(spec.eigenvalues - mc)) < 1e-3
    assert np.max(np.abs(spec.eigenvalues - quarter)) > 0.1


# --- ring solver --------------------------------------------------------------

def test_free_ring_lowest_levels():
    spec = ring_eigensolve(RingHamiltonian(grid_n=2048), 5)
    expected = np.array([0, 1 / 8, 1 / 8, 1 / 2, 1 / 2])
    assert abs(spec.eigenvalues[0]) < 1e-10
    np.testing.assert_allclose(spec.eigenvalues[1:], expected[1:], rtol=1e-4)
    assert spec.grid_n == 2048
    assert 0 < spec.convergence_estimate < 1e-4


def test_discrete_plane_wave_dispersion():
    # exact eigenvalues of the discrete operator, shifted half-integer momenta
    n, A = 64, 0.3
    h = 4 * np.pi / n
    ks = np.arange(n) / 2
    exact = np.sort((1 - np.cos((ks - A) * h)) / h**2)
    spec = ring_eigensolve(RingHamiltonian(grid_n=n, flux_A=A), n // 2, eigenvectors=False,
                           estimate_convergence=False)
    np.testing.assert_allclose(spec.eigenvalues, exact[: n // 2], atol=1e-11)


@pytest.mark.parametrize("A, V0", [(0.0, 0.7), (0.15, 1.3)])
def test_ring_matches_plane_wave_oracle(A, V0):
    H = RingHamiltonian.from_function(lambda th: V0 * np.cos(th), 1024, flux_A=A)
    spec = ring_eigensolve(H, 8, eigenvectors=False)
    oracle = plane_wave_levels(8, A=A, V0=V0)
    np.testing.assert_allclose(spec.eigenvalues, oracle, rtol=2e-4, atol=2e-5)


def test_half_flux_period():
    a = ring_eigensolve(RingHamiltonian(grid_n=256, flux_A=0.0), 12, eigenvectors=False)
    b = ring_eigensolve(RingHamiltonian(grid_n=256, flux_A=0.5), 12, eigenvectors=False)
    c = ring_eigensolve(RingHamiltonian(grid_n=256, flux_A=0.37), 12, eigenvectors=False)
    d = ring_eigensolve(RingHamiltonian(grid_n=256, flux_A=0.87), 12, eigenvectors=False)
    np.testing.assert_allclose(a.eigenvalues, b.eigenvalues, atol=1e-6)
    np.testing.assert_allclose(c.eigenvalues, d.eigenvalues, atol=1e-6)


def test_constant_potential_shifts_spectrum():
    base = ring_eigensolve(RingHamiltonian(grid_n=128, flux_A=0.2), 10, eigenvectors=False)
    shifted = ring_eigensolve(RingHamiltonian.from_function(lambda th: 2.5, 128, flux_A=0.2), 10,
                              eigenvectors=False)
    np.testing.assert_allclose(shifted.eigenvalues - base.eigenvalues, 2.5, atol=1e-10)


def test_wraparound_stencil():
    H = RingHamiltonian(grid_n=32, flux_A=0.3).matrix()
    assert H[-1, 0] != 0 and H[0, -1] != 0
    assert H[-1, 0] == np.conj(H[0, -1])
    np.testing.assert_array_equal(H, H.conj().T)
    assert np.max(np.abs(np.linalg.eigvals(H).imag)) < 1e-10


def test_eigenvectors_normalized_and_variational():
    H = RingHamiltonian.from_function(lambda th: np.sin(th / 2) ** 2, 256, flux_A=0.1)
    spec = ring_eigensolve(H, 6)
    for psi, e in zip(spec.eigenvectors, spec.eigenvalues):
        assert np.sum(np.abs(psi) ** 2) * H.spacing == pytest.approx(1, abs=1e-10)
        assert rayleigh_quotient(H, psi) == pytest.approx(e, abs=1e-10)


def test_free_degeneracy_pairs():
    e = ring_eigensolve(RingHamiltonian(grid_n=512), 9, eigenvectors=False).eigenvalues
    for j in range(1, 5):
        assert abs(e[2 * j - 1] - e[2 * j]) / e[2 * j] < 1e-8


def test_second_order_convergence():
    exact = free_spectrum_analytic(max_n=6).eigenvalues[1:10]
    errs = [np.max(np.abs(ring_eigensolve(RingHamiltonian(grid_n=n), 10, eigenvectors=False,
                                          estimate_convergence=False).eigenvalues[1:] - exact)
                   / exact) for n in (256, 512)]
    assert 3 < errs[0] / errs[1] < 5


def test_radius_scales_kinetic_term():
    a = ring_eigensolve(RingHamiltonian(grid_n=128), 5, eigenvectors=False).eigenvalues
    b = ring_eigensolve(RingHamiltonian(grid_n=128, radius=2.0), 5, eigenvectors=False).eigenvalues
    np.testing.assert_allclose(b, a / 4, atol=1e-12)


def test_solver_argument_checks():
    with pytest.raises(ValueError):
        RingHamiltonian(grid_n=15)
    with pytest.raises(ValueError):
        RingHamiltonian(grid_n=14)
    with pytest.raises(ValueError):
        ring_eigensolve(RingHamiltonian(grid_n=32), 17)
    with pytest.raises(ValueError):
        RingHamiltonian(grid_n=32, potential=np.full(32, np.nan))


def test_coarse_grid_warns():
    with pytest.warns(ConvergenceWarning):
        ring_eigensolve(RingHamiltonian(grid_n=32), 16)
    # no half grid to compare against
    assert ring_eigensolve(RingHamiltonian(grid_n=16), 4).convergence_estimate is None


def test_spectrum_json_round_trip(tmp_path):
    spec = ring_eigensolve(RingHamiltonian(grid_n=64, flux_A=0.1), 4)
    path = spec.to_json(tmp_path / "s.json")
    back = Spectrum.from_json(path.read_text())
    np.testing.assert_array_equal(back.eigenvalues, spec.eigenvalues)
    assert back.grid_n == 64 and back.convergence_estimate == spec.convergence_estimate
    data = json.loads(path.read_text())
    assert list(data)[:4] == ["params", "eigenvalues", "convergence_estimate", "grid_n"]
    with pytest.raises(ValueError):
        Spectrum(eigenvalues=[1.0, 0.5])


def test_eigenvector_csv():
    spec = ring_eigensolve(RingHamiltonian(grid_n=32), 3)
    lines = spec.eigenvectors_csv().strip().split("\n")
    assert lines[0] == "theta,re_psi_0,im_psi_0,re_psi_1,im_psi_1,re_psi_2,im_psi_2"
    assert len(lines) == 33
    with pytest.raises(ValueError):
        Spectrum(eigenvalues=[0.0]).eigenvectors_csv()


def test_flux_sweep_orders_by_flux():
    sweep = flux_sweep([0.5, 0.0, 0.25], grid_n=64, n_levels=4)
    assert sweep.fluxes.tolist() == [0.0, 0.25, 0.5]
    lines = sweep.to_csv().strip().split("\n")
    assert lines[0] == "A,E_0,E_1,E_2,E_3"
    assert [float(ln.split(",")[0]) for ln in lines[1:]] == [0.0, 0.25, 0.5]


# --- Coulomb --------------------------------------------------------------------

def test_coulomb_k0_hydrogen_series():
    e = coulomb_radial_solve(0, r_max=200.0, grid_n=4000, n_levels=3)
    np.testing.assert_allclose(e, [-0.5, -0.125, -1 / 18], rtol=1e-3)


def test_coulomb_mass_scaling():
    # halving the box with the grid keeps the mesh fixed in Bohr units
    a = coulomb_radial_solve(0, m_eff=1.0, r_max=200.0, grid_n=4000)
    b = coulomb_radial_solve(0, m_eff=2.0, r_max=100.0, grid_n=4000)
    np.testing.assert_allclose(b / a, 2.0, rtol=1e-10)
    c = coulomb_radial_solve(0, m_eff=2.0, r_max=200.0, grid_n=8000)
    np.testing.assert_allclose(c / a, 2.0, rtol=2e-3)


def test_effective_angular_momentum():
    for k in range(6):
        l = effective_angular_momentum(k)
        assert l * (l + 1) == pytest.approx(k * k / 4)
    assert effective_angular_momentum(2) == pytest.approx((math.sqrt(5) - 1) / 2)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_coulomb_noninteger_l(k):
    e = coulomb_radial_solve(k, grid_n=32000, n_levels=3)
    exact = [coulomb_closed_form(k, n_r) for n_r in range(3)]
    np.testing.assert_allclose(e, exact, rtol=1e-3)


def test_coulomb_small_box_warns():
    with pytest.warns(BoxSizeWarning):
        coulomb_radial_solve(0, r_max=8.0, grid_n=400, n_levels=1)


def test_coulomb_grid_floor():
    with pytest.raises(ValueError):
        coulomb_radial_solve(0, grid_n=100)


def test_rydberg_levels_and_restriction():
    lv = coulomb_levels_paper(m_eff=1.0, alpha=0.5, c=2.0, n_max=3, k=0)
    assert [x.allowed for x in lv] == [True, True, True]
    assert lv[0].energy == -0.5
    k2 = coulomb_levels_paper(n_max=3, k=2)
    assert [x.allowed for x in k2] == [False, True, True]
    k3 = coulomb_levels_paper(n_max=3, k=3)
    assert [x.allowed for x in k3] == [False, False, True]
    assert restriction_allows(3, -3) and not restriction_allows(2, -3)
    with pytest.raises(ValueError):
        coulomb_levels_paper(n_max=0)


def test_coulomb_comparison_table():
    rows = coulomb_comparison(0, grid_n=4000)
    assert [r["n"] for r in rows] == [1, 2, 3]
    assert max(abs(r["deviation"]) for r in rows) < 1e-3
    rows = coulomb_comparison(2, grid_n=8000)
    assert [r["n"] for r in rows] == [2, 3, 4]
    assert all(r["deviation"] < -1e-3 for r in rows)
    text = coulomb_table_csv(rows)
    assert text.startswith("k,n_r,solver,closed_form,n,rydberg,deviation\n")
