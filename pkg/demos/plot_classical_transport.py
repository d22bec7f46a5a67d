"""
A spinning body carried around the meridian
===========================================

The reduced dynamics is a leapfrog on (theta, p_theta) while the body
frame is transported with the strip. The energy uses the spin-reduced
mass m' = m0 / (1 + s^2/rho^2).
"""

import numpy as np

from moebius import SpinningBody, evolve, meridian_state
from moebius.geometry import centerline_normal

body = SpinningBody(mass_m0=1.0, size_rho=1.0, spin_s=0.5, orbit_radius=1.0)
print("effective mass", body.effective_mass)

init = meridian_state(body, theta=0.0, p_theta=1.0)
period = 4 * np.pi * body.effective_mass  # time for theta to advance by 4 pi
steps = 10_000
traj = evolve(init, body, dtau=period / steps, steps=steps)

print(f"energy drift {traj.energy_drift:.2e}")
for k in (0, steps // 2, steps):
    st = traj.state(k)
    normal = st.frame[2]
    print(f"step {k:5d}  theta = {traj.theta[k] / np.pi:5.2f} pi  "
          f"n.n(0) = {normal @ centerline_normal(0.0):+.9f}")

###############################################################################
# A potential V = a cos(theta) turns the free rotor into a pendulum on the
# doubled circle.
V = lambda th: 0.2 * np.cos(th)  # noqa: E731
dV = lambda th: -0.2 * np.sin(th)  # noqa: E731
pend = evolve(meridian_state(body, 0.3, 0.0, V=V), body, V=V, dV=dV, dtau=2e-3, steps=5000)
print(f"pendulum: theta in [{pend.theta.min():.3f}, {pend.theta.max():.3f}], "
      f"drift {pend.energy_drift:.1e}")
print(f"largest constraint residual at the end: {pend.residuals(len(pend.theta) - 1).max_abs():.1e}")
