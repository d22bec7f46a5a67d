"""Exit criteria for the package, runnable without pytest.

Each ``criterion_*`` function returns a :class:`CriterionResult`. A
criterion passes only if every numeric check holds at its pinned
tolerance and the wall time stays under its limit. ``run_all`` is what
``python -m moebius validate`` executes.
"""
from dataclasses import dataclass, field
from fractions import Fraction
import math
import time

import numpy as np

from . import classical, geometry, quantum

SEED = 20110201


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0
    time_limit: float = None
    data: dict = field(default_factory=dict)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        limit = "" if self.time_limit is None else f" (limit {self.time_limit:g} s)"
        return f"[{status}] {self.number:2d} {self.name}: {self.detail}; {self.seconds:.3f} s{limit}"

    def as_dict(self):
        # no timings here: the report file must be reproducible byte for byte
        return {"number": self.number, "name": self.name, "passed": self.passed,
                "detail": self.detail, "data": self.data}


def _timed(number, name, time_limit):
    def wrap(fn):
        def run():
            start = time.perf_counter()
            ok, detail, data = fn()
            elapsed = time.perf_counter() - start
            within = time_limit is None or elapsed < time_limit
            if not within:
                detail += f"; exceeded time limit {time_limit:g} s"
            return CriterionResult(number, name, bool(ok and within), detail, elapsed,
                                   time_limit, data)
        run.__name__ = fn.__name__
        run.number = number
        return run
    return wrap


def _rel_errors(numerical, exact, floor):
    numerical = np.asarray(numerical, dtype=float)
    exact = np.asarray(exact, dtype=float)
    # zero modes have no scale of their own; measure them against `floor`
    return np.abs(numerical - exact) / np.where(exact == 0, floor, np.abs(exact))


@_timed(1, "normal holonomy", 0.1)
def criterion_01():
    rep = geometry.holonomy_report(geometry.MoebiusShape(), samples=1000)
    ok = rep.flip_residual < 1e-12 and rep.period_residual < 1e-12
    return ok, (f"flip {rep.flip_residual:.2e}, period {rep.period_residual:.2e} (< 1e-12)"), {
        "flip_residual": rep.flip_residual, "period_residual": rep.period_residual}


@_timed(2, "frame/embedding consistency", 1.0)
def criterion_02():
    shape = geometry.MoebiusShape()
    h = 1e-6
    u = np.linspace(0.0, 4 * np.pi, 100, endpoint=False)
    # interior v nodes keep the difference stencil on the strip
    v = np.linspace(-shape.half_width, shape.half_width, 12)[1:-1]
    uu, vv = [a.ravel() for a in np.meshgrid(u, v, indexing="ij")]
    frame = geometry.tangents(shape, uu, vv)
    fd_u = (geometry.embed(shape, uu + h, vv) - geometry.embed(shape, uu - h, vv)) / (2 * h)
    fd_v = (geometry.embed(shape, uu, vv + h) - geometry.embed(shape, uu, vv - h)) / (2 * h)
    err_u = np.max(np.linalg.norm(fd_u - frame.e_u, axis=1) / np.linalg.norm(frame.e_u, axis=1))
    err_v = np.max(np.linalg.norm(fd_v - frame.e_v, axis=1) / np.linalg.norm(frame.e_v, axis=1))
    centre = geometry.tangents(shape, u, 0.0).normal
    err_n = np.max(np.abs(centre - geometry.centerline_normal(u)))
    ok = err_u < 1e-8 and err_v < 1e-8 and err_n < 1e-12
    return ok, (f"fd rel err e_u {err_u:.2e}, e_v {err_v:.2e} (< 1e-8); "
                f"normal {err_n:.2e} (< 1e-12)"), {
        "fd_rel_error_e_u": float(err_u), "fd_rel_error_e_v": float(err_v),
        "normal_error": float(err_n)}


@_timed(3, "canonical Poisson brackets", 0.1)
def criterion_03():
    rng = np.random.default_rng(SEED)
    qs = [classical.coordinate("x", i) for i in range(3)]
    ps = [classical.coordinate("p", i) for i in range(3)]
    symplectic = np.block([[np.zeros((3, 3)), np.eye(3)], [-np.eye(3), np.zeros((3, 3))]])
    worst = 0.0
    for _ in range(100):
        state = classical.PhaseState(t=rng.uniform(-1, 1), p0=rng.uniform(-1, 1),
                                     x=rng.uniform(-1, 1, 3), p=rng.uniform(-1, 1, 3))
        m = classical.poisson_matrix(qs + ps, qs + ps, state, step=1e-5)
        worst = max(worst, float(np.max(np.abs(m - symplectic))))
    return worst < 1e-8, f"max bracket error {worst:.2e} (< 1e-8)", {"max_error": worst}


@_timed(4, "Legendre identity", 0.1)
def criterion_04():
    rng = np.random.default_rng(SEED + 4)
    worst = 0.0
    for _ in range(100):
        body = classical.SpinningBody(mass_m0=rng.uniform(0.5, 2.0))
        q0dot = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0)
        a, b = rng.uniform(-1, 1, 2)
        res = classical.legendre_residual(
            q0dot, rng.normal(size=3), rng.normal(size=3), body,
            V=lambda q: a * float(q @ q) + b * math.sin(q[0]))
        worst = max(worst, abs(res))
    return worst < 1e-12, f"max |H_c| {worst:.2e} (< 1e-12)", {"max_residual": worst}


def _free_errors(grid_n, levels=10):
    spec = quantum.ring_eigensolve(quantum.RingHamiltonian(grid_n=grid_n), levels,
                                   eigenvectors=False, estimate_convergence=False)
    exact = quantum.free_spectrum_analytic(max_n=levels // 2 + 1).eigenvalues[:levels]
    return spec, _rel_errors(spec.eigenvalues, exact, floor=1.0 / 8)


@_timed(5, "free spectrum oracle", 30.0)
def criterion_05():
    spec, err = _free_errors(2048)
    _, err_half = _free_errors(1024)
    ratio = float(err_half.max() / err.max())
    ok = err.max() < 1e-4 and 3.0 <= ratio <= 5.0
    return ok, (f"max rel err {err.max():.2e} at N=2048 (< 1e-4); "
                f"error ratio N=1024/N=2048 {ratio:.3f} (in [3, 5])"), {
        "max_rel_error": float(err.max()), "convergence_ratio": ratio,
        "eigenvalues": spec.eigenvalues.tolist()}


@_timed(6, "free degeneracy", None)
def criterion_06():
    spec = quantum.ring_eigensolve(quantum.RingHamiltonian(grid_n=2048), 11,
                                   eigenvectors=False, estimate_convergence=False)
    e = spec.eigenvalues
    splits = [abs(e[2 * j - 1] - e[2 * j]) / e[2 * j] for j in range(1, 6)]
    worst = float(max(splits))
    return worst < 1e-8, f"max pair splitting {worst:.2e} (< 1e-8)", {"max_splitting": worst}


FLUX_VALUES = (0.0, 0.1, 0.25, 0.5)


@_timed(7, "flux spectrum", 120.0)
def criterion_07():
    levels, grid_n = 10, 2048
    cache = {}

    def solve(a):
        if a not in cache:
            cache[a] = quantum.ring_eigensolve(
                quantum.RingHamiltonian(grid_n=grid_n, flux_A=a), levels,
                eigenvectors=False, estimate_convergence=False).eigenvalues
        return cache[a]

    worst_rel, worst_shift, worst_quarter = 0.0, 0.0, 0.0
    report = []
    for a in FLUX_VALUES:
        closed = quantum.flux_spectrum_analytic(A=a, max_n=levels + 4)
        exact = closed.minimal_coupling.eigenvalues[:levels]
        worst_rel = max(worst_rel, float(_rel_errors(solve(a), exact, 1.0 / 8).max()))
        worst_shift = max(worst_shift, float(np.max(np.abs(solve(a) - solve(a + 0.5)))))
        quarter = closed.quarter.eigenvalues[:levels]
        gap = float(np.max(np.abs(quarter - solve(a))))
        worst_quarter = max(worst_quarter, gap)
        report.append({"A": a, "numerical": solve(a).tolist(), "minimal_coupling": exact.tolist(),
                       "quarter_formula": quarter.tolist(), "max_gap_quarter_vs_numerical": gap})
    ok = worst_rel < 1e-4 and worst_shift < 1e-6
    return ok, (f"max rel err vs (n/2-A)^2 {worst_rel:.2e} (< 1e-4); "
                f"A->A+1/2 shift {worst_shift:.2e} (< 1e-6); "
                f"(n/4-A)^2 formula off by up to {worst_quarter:.3g}"), {
        "max_rel_error": worst_rel, "max_shift_error": worst_shift, "discrepancy": report}


@_timed(8, "proton estimate", 1.0)
def criterion_08():
    denom = 8 * quantum.proton_effective_mass()
    ok = 5.49e-27 <= denom <= 5.71e-27
    return ok, f"8 m' = {denom:.4e} kg (in [5.49e-27, 5.71e-27])", {"denominator": denom}


COULOMB_FINE_GRID = 32000


@_timed(9, "Coulomb levels", 10.0)
def criterion_09():
    e = quantum.coulomb_radial_solve(0, r_max=200.0, grid_n=4000, n_levels=3)
    hydrogen = -0.5 / np.arange(1, 4) ** 2
    err0 = float(np.max(np.abs(e / hydrogen - 1)))
    ok = len(e) == 3 and err0 < 1e-3
    tables = {0: quantum.coulomb_comparison(0, r_max=200.0, grid_n=4000, n_levels=3)}
    worst_k = 0.0
    for k in (1, 2, 3):
        rows = quantum.coulomb_comparison(k, r_max=200.0, grid_n=COULOMB_FINE_GRID, n_levels=3)
        tables[k] = rows
        for row in rows:
            worst_k = max(worst_k, abs(row["solver"] / row["closed_form"] - 1))
            # the integer-n formula must visibly miss for k != 0
            ok = ok and abs(row["deviation"]) > 1e-3 * abs(row["solver"])
        ok = ok and len(rows) == 3
    ok = ok and worst_k < 1e-3
    devs = ", ".join(f"k={k}: {tables[k][0]['deviation']:+.4f}" for k in (1, 2, 3))
    return ok, (f"k=0 rel err {err0:.2e}; k=1..3 vs non-integer l {worst_k:.2e} (< 1e-3); "
                f"ground deviation from integer-n levels {devs}"), {
        "k0_rel_error": err0, "k_rel_error": worst_k,
        "tables": {str(k): rows for k, rows in tables.items()}}


@_timed(10, "restriction rule", 1.0)
def criterion_10():
    mismatches = 0
    for k in range(-10, 11):
        levels = quantum.coulomb_levels_paper(n_max=20, k=k)
        for lv in levels:
            brute = Fraction(lv.n * lv.n - lv.n) >= Fraction(k * k, 4)
            mismatches += lv.allowed != brute
    return mismatches == 0, f"{mismatches} mismatches over n<=20, |k|<=10", {
        "mismatches": mismatches}


@_timed(11, "classical conservation", 1.0)
def criterion_11():
    body = classical.SpinningBody(mass_m0=1.0, size_rho=1.0, spin_s=0.5, orbit_radius=1.0)
    steps, dtau = 10_000, 1e-3
    inertia = body.effective_mass * body.orbit_radius**2
    p_theta = inertia * 4 * np.pi / (steps * dtau)
    init = classical.meridian_state(body, 0.0, p_theta)
    traj = classical.evolve(init, body, dtau=dtau, steps=steps)
    n0 = traj.frames[0][2]
    flip = float(traj.frames[steps // 2][2] @ n0)
    restore = float(np.max(np.abs(traj.frames[-1] - traj.frames[0])))
    drift = traj.energy_drift
    circ = float(np.max(np.abs(traj.circle)))
    spin = float(np.max(np.abs(traj.spin_align)))
    ok = (drift < 1e-10 and circ < 1e-9 and spin < 1e-9
          and abs(flip + 1) < 1e-9 and restore < 1e-9)
    return ok, (f"energy drift {drift:.1e}, circle {circ:.1e}, spin {spin:.1e}; "
                f"n(2pi).n(0) = {flip:.12f}, |e(4pi)-e(0)| {restore:.1e}"), {
        "energy_drift": drift, "circle": circ, "spin_align": spin,
        "normal_overlap_2pi": flip, "frame_return_4pi": restore}


CRITERIA = (criterion_01, criterion_02, criterion_03, criterion_04, criterion_05, criterion_06,
            criterion_07, criterion_08, criterion_09, criterion_10, criterion_11)


def run_all(echo=None):
    results = []
    for criterion in CRITERIA:
        res = criterion()
        if echo is not None:
            echo(res.line())
        results.append(res)
    return results
