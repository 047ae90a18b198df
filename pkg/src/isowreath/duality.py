"""Contact elements and the metric dualities delta (polarity in the parabolic
unit sphere 2z = x^2 + y^2) and nu (null polarity).

A contact element (x, y, z, p, q) is the point (x, y, z) with the incident
plane of Euclidean normal (p, q, -1).  The maps below act on
:class:`ContactElement` instances, on arrays whose last axis has length 5, and
on tuples of jets, so the same code yields exact derivatives of dual fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .curvature import param_KH_from_jets
from .expr import Jet2


class DualityError(ValueError):
    pass


@dataclass(frozen=True)
class ContactElement:
    x: float
    y: float
    z: float
    p: float
    q: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z, self.p, self.q], dtype=float)

    @property
    def point(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    def plane_height(self, X, Y):
        """Height of the element's plane above (X, Y)."""
        return self.z + self.p * (X - self.x) + self.q * (Y - self.y)


def delta5(x, y, z, p, q):
    return (p, q, p * x + q * y - z, x, y)


def nu5(x, y, z, p, q):
    return (q, -p, z - p * x - q * y, -y, x)


def J5(x, y, z, p, q):
    """Rotation by pi/2 about the z-axis acting on a contact element."""
    return (-y, x, z, -q, p)


def L5(x, y, z, p, q):
    """Rotation by -pi/2 composed with reflection in z = 0: (y, -x, -z, -q, p)."""
    return (y, -x, -z, -q, p)


def _apply(fn, E):
    if isinstance(E, ContactElement):
        return ContactElement(*(float(c) for c in fn(E.x, E.y, E.z, E.p, E.q)))
    if isinstance(E, tuple):
        return fn(*E)
    a = np.asarray(E, dtype=float)
    if a.shape[-1] != 5:
        raise DualityError("contact element arrays need a trailing axis of length 5")
    return np.stack(np.broadcast_arrays(*fn(*np.moveaxis(a, -1, 0))), axis=-1)


def delta_ce(E):
    """(u, v, w, p, q) -> (p, q, pu + qv - w, u, v)."""
    return _apply(delta5, E)


def nu_ce(E):
    """(u, v, w, p, q) -> (q, -p, w - pu - qv, -v, u)."""
    return _apply(nu5, E)


def J_ce(E):
    return _apply(J5, E)


def L_ce(E):
    return _apply(L5, E)


def nu_self_incidence(point) -> np.ndarray:
    """Height of ``point`` above its own nu-dual plane; identically zero (null polarity)."""
    P = np.asarray(point, dtype=float)
    a, b, c = np.moveaxis(point_dual_plane(P, "nu"), -1, 0)
    return a * P[..., 0] + b * P[..., 1] + c - P[..., 2]


def point_dual_plane(point, which: str = "delta") -> np.ndarray:
    """Dual plane of a point as (a, b, c) with plane z = a x + b y + c."""
    x, y, z = np.moveaxis(np.asarray(point, dtype=float), -1, 0)
    if which == "delta":
        return np.stack([x, y, -z], axis=-1)
    if which == "nu":
        return np.stack([-y, x, z], axis=-1)
    raise DualityError(f"unknown duality {which!r}")


def iso_angle(plane1, plane2) -> np.ndarray:
    """Isotropic angle of two non-isotropic planes z = a x + b y + c: |grad difference|."""
    d = np.asarray(plane1, dtype=float)[..., :2] - np.asarray(plane2, dtype=float)[..., :2]
    return np.hypot(d[..., 0], d[..., 1])


def dual_line(p1, p2, which: str = "delta") -> tuple[np.ndarray, np.ndarray]:
    """Two points spanning the dual of the line through p1, p2 (intersection of dual planes)."""
    a1, b1, c1 = point_dual_plane(p1, which)
    a2, b2, c2 = point_dual_plane(p2, which)
    n = np.array([a1 - a2, b1 - b2])
    nn = n @ n
    if nn < 1e-300:
        raise DualityError("isotropic line has no dual line in the affine part")
    base = -(c1 - c2) * n / nn
    d = np.array([-n[1], n[0]])
    pts = []
    for s in (0.0, 1.0):
        xy = base + s * d
        pts.append(np.array([xy[0], xy[1], a1 * xy[0] + b1 * xy[1] + c1]))
    return pts[0], pts[1]


# ---------------------------------------------------------------- fields


def coord_jets(u, v) -> tuple[Jet2, Jet2]:
    z = np.zeros(np.broadcast(np.asarray(u), np.asarray(v)).shape)
    return Jet2(u + z, 1.0 + z, z, z, z, z), Jet2(v + z, z, 1.0 + z, z, z, z)


@dataclass(frozen=True)
class ContactField:
    """Map (u, v) -> contact element, given by jets of its five components."""

    fn: Callable[..., tuple]
    name: str = ""

    def jets(self, u, v) -> tuple[Jet2, ...]:
        return self.fn(u, v)

    def point_jets(self, u, v) -> tuple[Jet2, Jet2, Jet2]:
        return self.fn(u, v)[:3]

    def values(self, u, v) -> np.ndarray:
        comps = [np.asarray(j.value, dtype=float) for j in self.fn(u, v)]
        return np.stack(np.broadcast_arrays(*comps), axis=-1)

    def mapped(self, fn5, name: str = "") -> "ContactField":
        return ContactField(lambda u, v: fn5(*self.fn(u, v)), name)


def contact_field_of_graph(f, name: str = "F") -> ContactField:
    """E(u, v) = (u, v, f, f_u, f_v)."""

    def fn(u, v):
        D = f.deriv_jets(u, v)
        U, V = coord_jets(u, v)
        return (U, V, D.value, D.du, D.dv)

    return ContactField(fn, name)


def delta_field(E: ContactField, name: str = "") -> ContactField:
    return E.mapped(delta5, name)


def nu_field(E: ContactField, name: str = "") -> ContactField:
    return E.mapped(nu5, name)


def dualize_graph(f, which: str = "delta") -> ContactField:
    """delta: (f_u, f_v, f_u u + f_v v - f, u, v); nu: (f_v, -f_u, f - f_u u - f_v v, -v, u)."""
    F = contact_field_of_graph(f)
    if which == "delta":
        return delta_field(F, "delta(F)")
    if which == "nu":
        return nu_field(F, "nu(F)")
    raise DualityError(f"unknown duality {which!r}")


def integrability_residual(E: ContactField, u, v):
    """p_v x_u + q_v y_u - p_u x_v - q_u y_v; zero iff the elements are tangent to their point surface."""
    x, y, _, p, q = E.jets(u, v)
    return p.dv * x.du + q.dv * y.du - p.du * x.dv - q.du * y.dv


def tangency_residual(E: ContactField, u, v):
    """max over directions of |z_i - p x_i - q y_i|: the stored plane contains the tangent vectors."""
    x, y, z, p, q = E.jets(u, v)
    ru = z.du - p.value * x.du - q.value * y.du
    rv = z.dv - p.value * x.dv - q.value * y.dv
    return np.maximum(np.abs(ru), np.abs(rv))


def surface_from_support(h, u, v) -> np.ndarray:
    """Point (h_u, h_v, h_u u + h_v v - h) enveloped by the planes z = u x + v y - h."""
    j = h.jet(u, v)
    hu, hv, hh = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (j.du, j.dv, j.value)))
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    return np.stack([hu, hv, hu * u + hv * v - hh], axis=-1)


def support_contact_field(h) -> ContactField:
    """Contact elements (h_u, h_v, h_u u + h_v v - h, u, v) of the surface with support h."""

    def fn(u, v):
        D = h.deriv_jets(u, v)
        U, V = coord_jets(u, v)
        return (D.du, D.dv, D.du * U + D.dv * V - D.value, U, V)

    return ContactField(fn, "support")


def envelope(n, d, u, v, tol: float = 1e-12) -> np.ndarray:
    """Envelope point N^{-1} D of the planes <x, n(u, v)> = d(u, v).

    ``n`` exposes ``point_jets`` (three jets of the normal components) and ``d``
    is a scalar field.  Raises when det N is within ``tol`` of zero.
    """
    nj = n.point_jets(u, v)
    dj = d.jet(u, v)
    shape = np.broadcast(np.asarray(u), np.asarray(v)).shape
    N = np.empty(shape + (3, 3))
    for c, j in enumerate(nj):
        N[..., 0, c] = j.value
        N[..., 1, c] = j.du
        N[..., 2, c] = j.dv
    D = np.empty(shape + (3,))
    D[..., 0], D[..., 1], D[..., 2] = dj.value, dj.du, dj.dv
    det = np.linalg.det(N)
    if np.any(np.abs(det) <= tol):
        raise DualityError(f"singular plane family: det N = {float(np.min(np.abs(det))):.3e}")
    return np.linalg.solve(N, D[..., None])[..., 0]


def curvature_from_support(h, u, v, tol: float = 1e-12):
    """K = 1/(h_uu h_vv - h_uv^2), H = (h_uu + h_vv) / (2 (h_uu h_vv - h_uv^2))."""
    j = h.jet(u, v)
    det = j.duu * j.dvv - j.duv * j.duv
    if np.any(np.abs(det) <= tol):
        raise DualityError(f"support Hessian is singular (parabolic point): det = {float(np.min(np.abs(det))):.3e}")
    return 1.0 / det, (j.duu + j.dvv) / (2.0 * det)


def uncorrected_support_H(h, u, v):
    """Mean curvature quotient without the factor 1/2; equals 2H."""
    j = h.jet(u, v)
    return (j.duu + j.dvv) / (j.duu * j.dvv - j.duv * j.duv)


def dual_curvature_rule(K, H, which: str = "delta", kappa=None) -> dict:
    """Curvatures of the dual surface: delta (1/kappa, 1/K, H/K); nu (-1/kappa, 1/K, -H/K)."""
    if np.any(np.asarray(K) == 0):
        raise DualityError("K = 0: a developable point has no regular dual point")
    sign = {"delta": 1.0, "nu": -1.0}.get(which)
    if sign is None:
        raise DualityError(f"unknown duality {which!r}")
    out = {"K": 1.0 / K, "H": sign * H / K}
    if kappa is not None:
        k = sign / np.asarray(kappa, dtype=float)
        out["kappa"] = np.sort(k, axis=-1)
    return out


def dual_field_curvature(E: ContactField, u, v, tol: float = 1e-12):
    """(K, H) of the point surface of a contact field via the parametric formulas."""
    return param_KH_from_jets(*E.point_jets(u, v), tol=tol)


# ---------------------------------------------------------------- area identity


def quad_areas(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Signed shoelace areas of the grid cells of a planar net with node arrays X, Y."""
    x = (X[:-1, :-1], X[1:, :-1], X[1:, 1:], X[:-1, 1:])
    y = (Y[:-1, :-1], Y[1:, :-1], Y[1:, 1:], Y[:-1, 1:])
    s = 0.0
    for k in range(4):
        s = s + x[k] * y[(k + 1) % 4] - x[(k + 1) % 4] * y[k]
    return 0.5 * s


def total_abs_curvature(f, grid) -> float:
    """Trapezoidal quadrature of |K| over the grid rectangle."""
    U, V = grid.mesh()
    j = f.jet(U, V)
    K = np.abs(j.duu * j.dvv - j.duv * j.duv)
    w = np.ones_like(K)
    w[0, :] *= 0.5
    w[-1, :] *= 0.5
    w[:, 0] *= 0.5
    w[:, -1] *= 0.5
    return float(np.sum(w * K) * grid.hu * grid.hv)


def dual_topview_area(f, grid, which: str = "delta") -> float:
    """Top-view area of delta(F) (or nu(F)) over the grid, summed cell by cell."""
    U, V = grid.mesh()
    pts = dualize_graph(f, which).values(U, V)
    return float(np.sum(np.abs(quad_areas(pts[..., 0], pts[..., 1]))))
