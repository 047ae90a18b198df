"""Isotropic curvatures of graphs, general parametrizations and surface pairs.

All functions accept scalar or array (u, v); array inputs give whole-grid
evaluations of the same shape.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expr import Jet2, _val


class CurvatureError(ValueError):
    pass


@dataclass(frozen=True)
class CurvatureSample:
    K: object
    H: object
    kappa1: object
    kappa2: object
    dir1: np.ndarray
    dir2: np.ndarray
    umbilic: object


def graph_KH(j: Jet2):
    """K and H of the graph (u, v, f) from the jet of f."""
    K = j.duu * j.dvv - j.duv * j.duv
    H = 0.5 * (j.duu + j.dvv)
    return K, H


def principal(fuu, fuv, fvv, tol: float = 1e-9):
    """Eigen-data of the symmetric 2x2 Hessian, kappa1 <= kappa2.

    At umbilics the canonical axes are returned and the flag is set.  Directions
    are signed to have a nonnegative u component (positive v component if that
    vanishes).
    """
    a, b, c = (np.asarray(x, dtype=float) for x in (fuu, fuv, fvv))
    a, b, c = np.broadcast_arrays(a, b, c)
    mean = 0.5 * (a + c)
    rad = np.hypot(0.5 * (a - c), b)
    k1, k2 = mean - rad, mean + rad
    umb = rad <= 0.5 * tol * np.maximum(1.0, np.abs(mean))
    # eigenvector of k1: two algebraically equivalent forms, take the better scaled one
    va = np.stack([b, k1 - a], axis=-1)
    vb = np.stack([k1 - c, b], axis=-1)
    na, nb = np.linalg.norm(va, axis=-1), np.linalg.norm(vb, axis=-1)
    vec = np.where((na >= nb)[..., None], va, vb)
    nrm = np.maximum(np.maximum(na, nb), 1e-300)[..., None]
    d1 = vec / nrm
    d1 = np.where(umb[..., None], np.array([1.0, 0.0]), d1)
    d1 = _canonical_sign(d1)
    d2 = _canonical_sign(np.stack([-d1[..., 1], d1[..., 0]], axis=-1))
    return k1, k2, d1, d2, umb


def _canonical_sign(d: np.ndarray) -> np.ndarray:
    flip = (d[..., 0] < -1e-15) | ((np.abs(d[..., 0]) <= 1e-15) & (d[..., 1] < 0))
    return np.where(flip[..., None], -d, d)


def curvature_graph(f, u, v, tol: float = 1e-9) -> CurvatureSample:
    """K = f_uu f_vv - f_uv^2, H = (f_uu + f_vv)/2 and principal data of the graph of f."""
    j = f.jet(u, v)
    K, H = graph_KH(j)
    k1, k2, d1, d2, umb = principal(j.duu, j.duv, j.dvv, tol)
    if np.ndim(K) == 0:
        return CurvatureSample(float(K), float(H), float(k1), float(k2), d1, d2, bool(umb))
    return CurvatureSample(K, H, k1, k2, d1, d2, umb)


def param_KH_from_jets(x: Jet2, y: Jet2, z: Jet2, tol: float = 1e-12):
    """Isotropic K and H of a parametrized surface from jets of its coordinates.

    With N = g_u x g_v, the second fundamental quantities are det(g_u, g_v, g_ij)
    = <g_ij, N> and the top-view metric is E, F, G with EG - F^2 = N_z^2.  The
    quotients below are invariant under reparametrization; for a graph they
    reduce to the Hessian formulas.
    """
    nx = y.du * z.dv - z.du * y.dv
    ny = z.du * x.dv - x.du * z.dv
    nz = x.du * y.dv - y.du * x.dv
    nz0 = np.abs(np.asarray(_val(nz), dtype=float))
    if np.any(nz0 <= tol):
        raise CurvatureError(f"degenerate top view: min |det| = {float(np.min(nz0)):.3e}")
    l_uu = x.duu * nx + y.duu * ny + z.duu * nz
    l_uv = x.duv * nx + y.duv * ny + z.duv * nz
    l_vv = x.dvv * nx + y.dvv * ny + z.dvv * nz
    E = x.du * x.du + y.du * y.du
    F = x.du * x.dv + y.du * y.dv
    G = x.dv * x.dv + y.dv * y.dv
    W = nz * nz
    K = (l_uu * l_vv - l_uv * l_uv) / (W * W)
    H = (E * l_vv - 2.0 * F * l_uv + G * l_uu) / (2.0 * W * nz)
    return K, H


def curvature_param(g, u, v, tol: float = 1e-12):
    """(K, H) of a surface exposing ``point_jets(u, v)``."""
    return param_KH_from_jets(*g.point_jets(u, v), tol=tol)


def unit_area_param_KH_from_jets(x: Jet2, y: Jet2, z: Jet2):
    """The quotient formulas with first-power top-view Gram denominators.

    Only agrees with :func:`param_KH_from_jets` where the top-view area element
    is one (graphs); kept to document the normalization difference.
    """
    nx = y.du * z.dv - z.du * y.dv
    ny = z.du * x.dv - x.du * z.dv
    nz = x.du * y.dv - y.du * x.dv
    l_uu = x.duu * nx + y.duu * ny + z.duu * nz
    l_uv = x.duv * nx + y.duv * ny + z.duv * nz
    l_vv = x.dvv * nx + y.dvv * ny + z.dvv * nz
    E = x.du * x.du + y.du * y.du
    F = x.du * x.dv + y.du * y.dv
    G = x.dv * x.dv + y.dv * y.dv
    W = E * G - F * F
    return (l_uu * l_vv - l_uv * l_uv) / W, (E * l_vv - 2.0 * F * l_uv + G * l_uu) / (2.0 * W)


def mixed_from_jets(jf: Jet2, jn: Jet2):
    # grouped so that swapping the arguments gives the identical float
    return 0.5 * ((jf.duu * jn.dvv + jf.dvv * jn.duu) - 2.0 * jf.duv * jn.duv)


def mixed_curvature(f, n, u, v):
    """Mixed Gaussian curvature K(F, G) = (f_uu g_vv - 2 f_uv g_uv + f_vv g_uu)/2."""
    return mixed_from_jets(f.jet(u, v), n.jet(u, v))


def gauss_image(f, u, v) -> np.ndarray:
    """Point (f_u, f_v, (f_u^2 + f_v^2)/2) on the parabolic unit sphere."""
    j = f.jet(u, v)
    fu, fv = np.broadcast_arrays(np.asarray(j.du, dtype=float), np.asarray(j.dv, dtype=float))
    return np.stack([fu, fv, 0.5 * (fu * fu + fv * fv)], axis=-1)


def curvature_grid(f, grid, margin: int = 0) -> dict[str, np.ndarray]:
    """K, H, kappa1, kappa2 of the graph of f on the grid nodes (shape nu-2m x nv-2m)."""
    U, V = grid.mesh(margin)
    s = curvature_graph(f, U, V)
    return {"u": U, "v": V, "K": s.K, "H": s.H, "kappa1": s.kappa1, "kappa2": s.kappa2}
