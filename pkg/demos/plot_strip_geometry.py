"""
Strip geometry and the normal that changes sign
===============================================

Walk once around the centre line and watch the unit normal come back
reversed; a second lap restores it.
"""

import numpy as np

from moebius import MoebiusShape, centerline_normal, embed, emit_mesh, tangents
from moebius.geometry import holonomy_report

shape = MoebiusShape(radius=1.0, half_width=1 / 3)

# the edge point at u = 0 lands on the opposite edge after one lap
print("x(0, +w)  =", embed(shape, 0.0, 1 / 3))
print("x(2pi, +w)=", embed(shape, 2 * np.pi, 1 / 3))

u = np.linspace(0, 4 * np.pi, 9)
for ui, n in zip(u, centerline_normal(u)):
    print(f"u = {ui / np.pi:4.1f} pi   n = {np.round(n, 12) + 0.0}")

rep = holonomy_report(shape, 1000)
print(f"flip residual {rep.flip_residual:.2e}, period residual {rep.period_residual:.2e}")

###############################################################################
# Local frame: e_u, e_v and their normalized cross product. Away from the
# centre line the frame is no longer orthogonal but the normal still is.
fr = tangents(shape, 1.0, 0.2)
print("e_u.n =", fr.e_u @ fr.normal, " e_v.n =", fr.e_v @ fr.normal, " dA =", fr.area_element)

###############################################################################
# A coarse mesh, ready for any plotting tool that reads CSV.
mesh = emit_mesh(shape, nu=24, nv=5)
print(mesh.points.shape, "vertices; first rows:")
print("\n".join(mesh.to_csv().splitlines()[:4]))
