"""Constrained mechanics of a spinning body on the strip's centre line.

Phase space carries the reparametrized time ``t`` with its conjugate
``p0``, the position ``x`` with momentum ``p``, the antisymmetric spin
tensor ``Sigma`` and an orthonormal frame whose rows are the triad
vectors. The constraints are

* ``h0 = p0 + p.p/(2 m0) + Sigma:Sigma/(2 m0 rho^2) + V(x)``
* ``circle = x.x - r^2``
* ``spin_align_i = eps_ijk Sigma_jk - s p_i``
* the frame returns to itself after two turns (4 pi).

Dynamics are integrated in reduced form: the constraints are solved for
the meridian angle ``theta`` and its momentum ``p_theta``, which evolve
with a leapfrog step under ``p_theta^2/(2 m0' r^2) + V(theta)``.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .geometry import meridian_frame
from .serialize import csv_text, json_text, write_text

LEVI_CIVITA = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    LEVI_CIVITA[_i, _j, _k] = 1.0
    LEVI_CIVITA[_i, _k, _j] = -1.0

DRIFT_LIMIT = 1e-6
REORTHO_TOL = 1e-12


class FrameError(ValueError):
    """A frame failed the orthonormality check."""


class EvaluationError(ArithmeticError):
    """A phase-space function returned a non-finite value."""


class StepSizeError(RuntimeError):
    """Constraint drift during integration exceeded the allowed limit."""


@dataclass(frozen=True)
class SpinningBody:
    mass_m0: float = 1.0
    size_rho: float = 1.0
    spin_s: float = 0.0
    orbit_radius: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("mass_m0", "size_rho", "orbit_radius", "hbar"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not self.spin_s >= 0:
            raise ValueError(f"spin_s must be non-negative, got {self.spin_s}")

    @property
    def effective_mass(self):
        return self.mass_m0 / (1.0 + (self.spin_s / self.size_rho) ** 2)


@dataclass(frozen=True)
class PhaseState:
    t: float = 0.0
    p0: float = 0.0
    x: np.ndarray = field(default_factory=lambda: np.zeros(3))
    p: np.ndarray = field(default_factory=lambda: np.zeros(3))
    Sigma: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))
    frame: np.ndarray = field(default_factory=lambda: np.eye(3))
    tau: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float))
        object.__setattr__(self, "Sigma", np.asarray(self.Sigma, dtype=float))
        object.__setattr__(self, "frame", np.asarray(self.frame, dtype=float))
        if np.max(np.abs(self.Sigma + self.Sigma.T)) > 1e-12:
            raise ValueError("Sigma must be antisymmetric")


@dataclass
class LagrangeMultipliers:
    """Placeholders for the multipliers of the action; never solved for."""

    lam: float = 0.0
    xi: float = 0.0
    eta: np.ndarray = field(default_factory=lambda: np.zeros(3))
    kappa: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))


@dataclass(frozen=True)
class ConstraintResiduals:
    h0: float
    circle: float
    spin_align: np.ndarray
    frame_period: float

    def max_abs(self):
        return max(abs(self.h0), abs(self.circle),
                   float(np.max(np.abs(self.spin_align))), abs(self.frame_period))

    def as_dict(self):
        return {"h0": self.h0, "circle": self.circle,
                "spin_align": [float(c) for c in self.spin_align],
                "frame_period": self.frame_period}


def orthonormality_residual(frame):
    frame = np.asarray(frame, dtype=float)
    return float(np.max(np.abs(frame @ frame.T - np.eye(3))))


def check_frame(frame, tol=1e-9):
    res = orthonormality_residual(frame)
    if res > tol:
        raise FrameError(f"frame orthonormality residual {res:.3e} exceeds {tol:.0e}")
    return np.asarray(frame, dtype=float)


# --- canonical structure -----------------------------------------------------

_CANONICAL_PAIRS = ((("t", None), ("p0", None)),) + tuple(
    (("x", i), ("p", i)) for i in range(3))


def _finite(fn, state):
    val = fn(state)
    if not np.isfinite(val):
        raise EvaluationError(f"non-finite value {val!r} at stencil point")
    return val


def _gradients(fn, state, step):
    """Central differences of ``fn`` along every canonical q and p."""
    # one scratch copy perturbed in place; fn only reads from it
    work = object.__new__(PhaseState)
    work.__dict__.update(state.__dict__)
    slots = work.__dict__
    slots["x"] = state.x.copy()
    slots["p"] = state.p.copy()

    def partial(name, index):
        if index is None:
            base = slots[name]
            slots[name] = hi = base + step
            f_hi = _finite(fn, work)
            slots[name] = lo = base - step
            f_lo = _finite(fn, work)
            slots[name] = base
        else:
            arr = slots[name]
            base = arr[index]
            arr[index] = hi = base + step
            f_hi = _finite(fn, work)
            arr[index] = lo = base - step
            f_lo = _finite(fn, work)
            arr[index] = base
        return (f_hi - f_lo) / (hi - lo)

    dq = np.array([partial(*q) for q, _ in _CANONICAL_PAIRS])
    dp = np.array([partial(*p) for _, p in _CANONICAL_PAIRS])
    return dq, dp


def poisson_bracket(f, g, at, step=1e-5):
    """Central-difference Poisson bracket ``{f, g}`` at a phase point.

    ``f`` and ``g`` map a :class:`PhaseState` to a float. The canonical
    pairs are ``(t, p0)`` and ``(x_i, p_i)``; truncation error is
    ``O(step**2)``.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    fq, fp = _gradients(f, at, step)
    gq, gp = _gradients(g, at, step)
    return float(fq @ gp - fp @ gq)


def poisson_matrix(fs, gs, at, step=1e-5):
    """Matrix of brackets ``{fs[a], gs[b]}``, differentiating each function once."""
    if not step > 0:
        raise ValueError("step must be positive")
    fgrads = [_gradients(f, at, step) for f in fs]
    ggrads = [_gradients(g, at, step) for g in gs]
    return np.array([[fq @ gp - fp @ gq for gq, gp in ggrads] for fq, fp in fgrads])


def coordinate(name, index=None):
    """Phase-space function returning one canonical coordinate.

    ``coordinate("x", 0)`` is ``x^1``; ``coordinate("t")`` is the time.
    """
    if index is None:
        return lambda state: getattr(state, name)
    return lambda state: getattr(state, name)[index]


def legendre_residual(q0dot, qdot, q, body, V=None):
    """Canonical Hamiltonian of the reparametrized free-time Lagrangian.

    Momenta follow from ``L = m0 qdot^2 / (2 q0dot) - q0dot V(q)``; the
    returned ``q0dot p0 + qdot.p - L`` vanishes identically, so anything
    beyond round-off is a bug.
    """
    if q0dot == 0:
        raise ZeroDivisionError("q0dot must be non-zero")
    qdot = np.asarray(qdot, dtype=float)
    m0 = body.mass_m0
    pot = 0.0 if V is None else float(V(np.asarray(q, dtype=float)))
    v2 = float(qdot @ qdot)
    p = m0 * qdot / q0dot
    p0 = -0.5 * m0 * v2 / q0dot**2 - pot
    lagrangian = 0.5 * m0 * v2 / q0dot - q0dot * pot
    return q0dot * p0 + float(qdot @ p) - lagrangian


def spin_contraction(Sigma):
    """``Sigma^{ij} Sigma_{ij}``; broadcasts over leading axes."""
    Sigma = np.asarray(Sigma, dtype=float)
    return np.einsum("...ij,...ij->...", Sigma, Sigma)


def first_class_constraint(state, body, V=None):
    pot = 0.0 if V is None else float(V(state.x))
    m0, rho = body.mass_m0, body.size_rho
    return (state.p0 + float(state.p @ state.p) / (2 * m0)
            + float(spin_contraction(state.Sigma)) / (2 * m0 * rho**2) + pot)


def angular_velocity(frame, frame_dot, tol=1e-6):
    """Antisymmetrized ``sigma_ij = sum_a e^(a)_i d/dtau e^(a)_j``.

    Returns ``(sigma, asymmetry)`` where ``asymmetry`` is the largest
    entry of ``|raw + raw.T| / 2`` before symmetrization.
    """
    frame = check_frame(frame, tol)
    raw = frame.T @ np.asarray(frame_dot, dtype=float)
    asym = float(np.max(np.abs(raw + raw.T))) / 2
    return (raw - raw.T) / 2, asym


def spin_from_momentum(p, s):
    """Antisymmetric ``Sigma_jk = (s/2) eps_jkl p_l``; broadcasts over ``p``."""
    return 0.5 * s * np.einsum("jkl,...l->...jk", LEVI_CIVITA, np.asarray(p, dtype=float))


def spin_vector(Sigma):
    """``eps_ijk Sigma_jk``; the inverse of :func:`spin_from_momentum` up to ``s``."""
    return np.einsum("ijk,...jk->...i", LEVI_CIVITA, np.asarray(Sigma, dtype=float))


def constraint_residuals(state, body, V=None, frame_at_plus_4pi=None):
    if frame_at_plus_4pi is None:
        period = 0.0
    else:
        period = float(np.max(np.abs(state.frame - np.asarray(frame_at_plus_4pi))))
    return ConstraintResiduals(
        h0=first_class_constraint(state, body, V),
        circle=float(state.x @ state.x) - body.orbit_radius**2,
        spin_align=spin_vector(state.Sigma) - body.spin_s * state.p,
        frame_period=period,
    )


# --- meridian dynamics ------------------------------------------------------

def meridian_angle(x):
    """Angle ``theta`` of a point on the centre line, ``x = r (sin, cos, 0)``."""
    return math.atan2(x[0], x[1])


def on_angle(V):
    """Lift a potential ``V(theta)`` to a function of the position vector."""
    if V is None:
        return None
    return lambda x: V(meridian_angle(x))


def _meridian_kinematics(body, theta, p_theta):
    theta = np.asarray(theta, dtype=float)
    r = body.orbit_radius
    zero = np.zeros_like(theta)
    x = r * np.stack([np.sin(theta), np.cos(theta), zero], axis=-1)
    tangent = np.stack([np.cos(theta), -np.sin(theta), zero], axis=-1)
    p = (np.asarray(p_theta, dtype=float) / r)[..., None] * tangent
    return x, p, spin_from_momentum(p, body.spin_s)


def _solved_p0(body, p, Sigma, pot):
    # p0 chosen so that h0 vanishes on the constraint surface
    return -(np.einsum("...i,...i->...", p, p) / (2 * body.mass_m0)
             + spin_contraction(Sigma) / (2 * body.mass_m0 * body.size_rho**2) + pot)


def meridian_state(body, theta, p_theta, V=None, tau=0.0, t=0.0):
    """Phase point on the centre line satisfying every constraint.

    ``V`` is a potential of the meridian angle. The frame is the surface
    frame (tangent, transverse, normal) at ``theta``.
    """
    x, p, Sigma = _meridian_kinematics(body, theta, p_theta)
    pot = 0.0 if V is None else float(V(theta))
    return PhaseState(t=t, p0=float(_solved_p0(body, p, Sigma, pot)), x=x, p=p,
                      Sigma=Sigma, frame=meridian_frame(theta), tau=tau)


def _rot_x(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def _rot_z(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def transported_frame(frame0, dtheta):
    """Frame after advancing the meridian angle by ``dtheta``.

    The carrying rotation about the symmetry axis runs at the meridian
    rate; the twist about the tangent runs at half of it. Broadcasts over
    ``dtheta``.
    """
    dtheta = np.asarray(dtheta, dtype=float)
    a = dtheta / 2
    one, zero = np.ones_like(a), np.zeros_like(a)
    rx = np.stack([np.stack([one, zero, zero], -1),
                   np.stack([zero, np.cos(a), -np.sin(a)], -1),
                   np.stack([zero, np.sin(a), np.cos(a)], -1)], -2)
    rz = np.stack([np.stack([np.cos(dtheta), -np.sin(dtheta), zero], -1),
                   np.stack([np.sin(dtheta), np.cos(dtheta), zero], -1),
                   np.stack([zero, zero, one], -1)], -2)
    return rx @ np.asarray(frame0, dtype=float) @ rz


def polar_orthonormalize(frame):
    u, _, vt = np.linalg.svd(frame)
    return u @ vt


TRAJECTORY_COLUMNS = (
    ("tau", "theta", "p_theta")
    + tuple(f"e{a}{i}" for a in range(1, 4) for i in range(1, 4))
    + ("energy", "h0", "circle", "spin_align_1", "spin_align_2", "spin_align_3", "frame_period")
)


@dataclass
class Trajectory:
    body: SpinningBody
    tau: np.ndarray
    t: np.ndarray
    theta: np.ndarray
    p_theta: np.ndarray
    frames: np.ndarray
    energy: np.ndarray
    p0: np.ndarray
    h0: np.ndarray
    circle: np.ndarray
    spin_align: np.ndarray
    frame_period: np.ndarray

    def __len__(self):
        return len(self.tau)

    @property
    def energy_drift(self):
        return float(np.max(np.abs(self.energy - self.energy[0])))

    def state(self, k):
        x, p, Sigma = _meridian_kinematics(self.body, self.theta[k], self.p_theta[k])
        return PhaseState(t=float(self.t[k]), p0=float(self.p0[k]), x=x, p=p,
                          Sigma=Sigma, frame=self.frames[k], tau=float(self.tau[k]))

    def residuals(self, k):
        return ConstraintResiduals(h0=float(self.h0[k]), circle=float(self.circle[k]),
                                   spin_align=self.spin_align[k],
                                   frame_period=float(self.frame_period[k]))

    def residual_log(self):
        return [self.residuals(k) for k in range(len(self))]

    def rows(self):
        return np.column_stack([
            self.tau, self.theta, self.p_theta, self.frames.reshape(-1, 9),
            self.energy, self.h0, self.circle, self.spin_align, self.frame_period,
        ])

    def to_csv(self, path=None):
        text = csv_text(TRAJECTORY_COLUMNS, self.rows().tolist())
        return write_text(path, text) if path is not None else text

    def to_json(self, path=None):
        records = [dict(zip(TRAJECTORY_COLUMNS, row)) for row in self.rows().tolist()]
        text = json_text(records)
        return write_text(path, text) if path is not None else text

    def residuals_json(self, path=None):
        text = json_text([r.as_dict() for r in self.residual_log()])
        return write_text(path, text) if path is not None else text


def _derivative(V, dV, h=1e-6):
    if V is None:
        return lambda theta: 0.0
    if dV is not None:
        return dV
    return lambda theta: (V(theta + h) - V(theta - h)) / (2 * h)


def evolve(init, body, V=None, dtau=1e-3, steps=1000, dV=None):
    """Integrate meridian motion from ``init`` with a leapfrog step.

    ``V`` is a potential of the meridian angle and ``dV`` its derivative
    (central differences if omitted). The frame of ``init`` is carried
    along by exact rotations and re-projected onto SO(3) when its
    orthonormality drifts past 1e-12.

    Raises :class:`StepSizeError` when any constraint residual or the
    relative energy drift exceeds 1e-6.
    """
    if not dtau > 0 or steps < 1:
        raise ValueError("need dtau > 0 and steps >= 1")
    pre = constraint_residuals(init, body)
    if abs(pre.circle) > 1e-9 or np.max(np.abs(pre.spin_align)) > 1e-9:
        raise ValueError(f"initial state violates circle/spin constraints: {pre.as_dict()}")
    frame = check_frame(init.frame).copy()

    r = body.orbit_radius
    inertia = body.effective_mass * r * r
    force = _derivative(V, dV)
    pot = (lambda theta: 0.0) if V is None else V

    theta = meridian_angle(init.x)
    tangent = np.array([math.cos(theta), -math.sin(theta), 0.0])
    p_theta = r * float(init.p @ tangent)

    n = steps + 1
    thetas = np.empty(n)
    moms = np.empty(n)
    energy = np.empty(n)
    frames = np.empty((n, 3, 3))
    thetas[0], moms[0], frames[0] = theta, p_theta, frame
    energy[0] = p_theta**2 / (2 * inertia) + pot(theta)
    half = 0.5 * dtau
    for k in range(1, n):
        p_half = p_theta - half * force(theta)
        dtheta = dtau * p_half / inertia
        theta += dtheta
        p_theta = p_half - half * force(theta)
        frame = _rot_x(dtheta / 2) @ frame @ _rot_z(dtheta)
        if orthonormality_residual(frame) > REORTHO_TOL:
            frame = polar_orthonormalize(frame)
        thetas[k], moms[k], frames[k] = theta, p_theta, frame
        energy[k] = p_theta**2 / (2 * inertia) + pot(theta)

    x, p, Sigma = _meridian_kinematics(body, thetas, moms)
    pots = np.array([pot(th) for th in thetas]) if V is not None else np.zeros(n)
    p0 = _solved_p0(body, p, Sigma, pots)
    h0 = (p0 + np.einsum("ki,ki->k", p, p) / (2 * body.mass_m0)
          + spin_contraction(Sigma) / (2 * body.mass_m0 * body.size_rho**2) + pots)
    circle = np.einsum("ki,ki->k", x, x) - r * r
    spin_align = spin_vector(Sigma) - body.spin_s * p
    predicted = transported_frame(frames[0], thetas + 4 * np.pi - thetas[0])
    frame_period = np.max(np.abs(frames - predicted), axis=(1, 2))

    tau = init.tau + dtau * np.arange(n)
    traj = Trajectory(body=body, tau=tau, t=init.t + (tau - init.tau), theta=thetas,
                      p_theta=moms, frames=frames, energy=energy, p0=p0, h0=h0,
                      circle=circle, spin_align=spin_align, frame_period=frame_period)

    scale = max(float(np.max(np.abs(energy))), np.finfo(float).tiny)
    drift = max(float(np.max(np.abs(h0))), float(np.max(np.abs(circle))),
                float(np.max(np.abs(spin_align))), float(np.max(frame_period)),
                traj.energy_drift / scale)
    if drift > DRIFT_LIMIT:
        raise StepSizeError(f"constraint drift {drift:.3e} exceeds {DRIFT_LIMIT:.0e}; "
                            f"reduce dtau (now {dtau})")
    return traj
