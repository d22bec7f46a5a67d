"""Embedding, tangent frames and normal holonomy of the Moebius strip.

The strip is parametrized by an angle ``u`` along the centre line and a
transverse coordinate ``v``::

    x = R sin u + v sin(u/2) sin u
    y = R cos u + v sin(u/2) cos u
    z = v cos(u/2)

All functions broadcast over array-valued ``u`` and ``v``; vector results
carry the Cartesian components on the last axis. ``u`` is never wrapped:
the surface normal is only 4*pi periodic, and that double cover is the
whole point.
"""
from dataclasses import dataclass

import numpy as np

from .serialize import csv_text, json_text, write_text

DEGENERACY_THRESHOLD = 1e-14
DEFAULT_MESH_CAP = 4_000_000


class DomainError(ValueError):
    """A parameter lies outside the strip."""


class DegenerateFrameError(ArithmeticError):
    """The tangent vectors are (numerically) parallel."""


@dataclass(frozen=True)
class MoebiusShape:
    """Strip of centre-line radius ``radius`` and half width ``half_width``.

    ``half_width`` is a length in the same units as ``radius``.
    """

    radius: float = 1.0
    half_width: float = 1.0 / 3.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if not 0 < self.half_width < self.radius:
            raise ValueError(
                f"half_width must lie in (0, radius={self.radius}), got {self.half_width}")


@dataclass(frozen=True)
class TangentFrame:
    e_u: np.ndarray
    e_v: np.ndarray
    normal: np.ndarray
    area_element: np.ndarray


def _check_v(shape, v):
    v = np.asarray(v, dtype=float)
    if np.any(np.abs(v) > shape.half_width):
        bad = np.max(np.abs(v))
        raise DomainError(f"|v|={bad} exceeds half_width={shape.half_width}")
    return v


def embed(shape, u, v):
    u = np.asarray(u, dtype=float)
    v = _check_v(shape, v)
    su, cu = np.sin(u), np.cos(u)
    sh, ch = np.sin(u / 2), np.cos(u / 2)
    x = shape.radius * su + v * sh * su
    y = shape.radius * cu + v * sh * cu
    z = v * ch
    return np.stack(np.broadcast_arrays(x, y, z), axis=-1)


def tangents(shape, u, v):
    """Tangent vectors d/du and d/dv of the embedding, with the unit normal.

    The normal is ``e_u x e_v`` normalized, which at ``v = 0`` reproduces
    :func:`centerline_normal` including its sign.
    """
    u = np.asarray(u, dtype=float)
    v = _check_v(shape, v)
    R = shape.radius
    su, cu = np.sin(u), np.cos(u)
    sh, ch = np.sin(u / 2), np.cos(u / 2)
    e_u = np.stack(np.broadcast_arrays(
        R * cu + v * (0.5 * ch * su + sh * cu),
        -R * su + v * (0.5 * ch * cu - sh * su),
        -0.5 * v * sh,
    ), axis=-1)
    e_v = np.stack(np.broadcast_arrays(sh * su, sh * cu, ch), axis=-1)
    e_u, e_v = np.broadcast_arrays(e_u, e_v)
    cross = np.cross(e_u, e_v)
    area = np.linalg.norm(cross, axis=-1)
    if np.any(area < DEGENERACY_THRESHOLD * R * R):
        raise DegenerateFrameError("tangent vectors are parallel")
    return TangentFrame(e_u=e_u, e_v=e_v, normal=cross / area[..., None], area_element=area)


def centerline_normal(u):
    """Unit normal on the centre line; flips sign under ``u -> u + 2*pi``."""
    u = np.asarray(u, dtype=float)
    ch = np.cos(u / 2)
    return np.stack([-np.sin(u) * ch, -np.cos(u) * ch, np.sin(u / 2)], axis=-1)


def meridian_frame(u):
    """Orthonormal surface-adapted frame on the centre line.

    Rows are the unit tangent, the unit transverse direction ``e_v`` and
    the normal, so the frame is right handed. Shape ``(..., 3, 3)``.
    """
    u = np.asarray(u, dtype=float)
    su, cu = np.sin(u), np.cos(u)
    sh, ch = np.sin(u / 2), np.cos(u / 2)
    zero = np.zeros_like(u)
    tangent = np.stack([cu, -su, zero], axis=-1)
    transverse = np.stack([sh * su, sh * cu, ch], axis=-1)
    return np.stack([tangent, transverse, centerline_normal(u)], axis=-2)


@dataclass(frozen=True)
class HolonomyReport:
    samples: int
    flip_residual: float    # max |n(u + 2pi) + n(u)|
    period_residual: float  # max |n(u + 4pi) - n(u)|

    def ok(self, tol=1e-12):
        return self.flip_residual < tol and self.period_residual < tol


def holonomy_report(shape, samples=100):
    """Check the normal flip after one turn and its return after two.

    ``shape`` is accepted for symmetry with the other functions; the
    centre-line normal does not depend on the radius.
    """
    if samples < 2:
        raise ValueError("samples must be >= 2")
    u = np.linspace(0.0, 4 * np.pi, samples, endpoint=False)
    n = centerline_normal(u)
    flip = np.max(np.linalg.norm(centerline_normal(u + 2 * np.pi) + n, axis=-1))
    period = np.max(np.linalg.norm(centerline_normal(u + 4 * np.pi) - n, axis=-1))
    return HolonomyReport(samples=samples, flip_residual=float(flip), period_residual=float(period))


MESH_COLUMNS = ("u", "v", "x", "y", "z", "nx", "ny", "nz")


@dataclass(frozen=True)
class Mesh:
    """Vertices of a ``nu x nv`` parameter grid, u-major ordering."""

    nu: int
    nv: int
    u: np.ndarray
    v: np.ndarray
    points: np.ndarray
    normals: np.ndarray

    def vertex(self, i, j):
        return self.points[i * self.nv + j]

    def rows(self):
        return np.column_stack([self.u, self.v, self.points, self.normals])

    def to_csv(self, path=None):
        text = csv_text(MESH_COLUMNS, self.rows().tolist())
        return write_text(path, text) if path is not None else text

    def to_json(self, path=None):
        records = [dict(zip(MESH_COLUMNS, row)) for row in self.rows().tolist()]
        text = json_text(records)
        return write_text(path, text) if path is not None else text


def emit_mesh(shape, nu, nv, max_vertices=DEFAULT_MESH_CAP):
    if nu < 3 or nv < 2:
        raise ValueError(f"need nu >= 3 and nv >= 2, got nu={nu}, nv={nv}")
    if nu * nv > max_vertices:
        raise ValueError(f"mesh of {nu * nv} vertices exceeds cap {max_vertices}")
    us = np.linspace(0.0, 2 * np.pi, nu, endpoint=False)
    vs = np.linspace(-shape.half_width, shape.half_width, nv)
    uu, vv = np.meshgrid(us, vs, indexing="ij")
    uu, vv = uu.ravel(), vv.ravel()
    frame = tangents(shape, uu, vv)
    return Mesh(nu=nu, nv=nv, u=uu, v=vv, points=embed(shape, uu, vv), normals=frame.normal)
