"""Sum surfaces (point-based) and Minkowski sums (plane-based) with their curvature laws."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curvature import graph_KH, mixed_from_jets
from .duality import dual_field_curvature, dualize_graph, support_contact_field
from .fields import LinearField, SupportField, combine


class MinkowskiError(ValueError):
    pass


@dataclass(frozen=True)
class SumSpec:
    mode: str  # "point" or "plane"
    base: object
    addend: object
    t: float

    def __post_init__(self):
        if self.mode not in ("point", "plane"):
            raise MinkowskiError(f"unknown sum mode {self.mode!r}")

    def result(self):
        if self.mode == "point":
            return sum_point(self.base, self.addend, self.t)
        return sum_plane(self.base, self.addend, self.t)


def sum_point(f, g, t: float) -> LinearField:
    """Height field f + t g (point-based sum surface)."""
    return combine((1.0, f), (t, g))


def sum_plane(h1, h2, t: float) -> SupportField:
    """Support function h1 + t h2 (plane-based Minkowski sum)."""
    a = h1.field if isinstance(h1, SupportField) else h1
    b = h2.field if isinstance(h2, SupportField) else h2
    return SupportField(combine((1.0, a), (t, b)))


def support_KH_star(jh):
    """Curvatures of the dual graph (u, v, h): K* = det Hess h, H* = (h_uu + h_vv)/2."""
    return graph_KH(jh)


def support_mixed_star(j1, j2):
    """Coefficient of t in K*(h1 + t h2): h1_uu h2_vv - 2 h1_uv h2_uv + h1_vv h2_uu."""
    return 2.0 * mixed_from_jets(j1, j2)


def sum_curvature_check(f, g, t: float, u, v, mode: str = "point") -> dict[str, float]:
    """Max residuals of the quadratic curvature laws of F^t over the sample points."""
    if mode == "point":
        jf, jg = f.jet(u, v), g.jet(u, v)
        jt = sum_point(f, g, t).jet(u, v)
        Kf, Hf = graph_KH(jf)
        Kg, Hg = graph_KH(jg)
        Kt, Ht = graph_KH(jt)
        mix = mixed_from_jets(jf, jg)
        return {
            "K_sum": float(np.max(np.abs(Kt - (Kf + 2.0 * t * mix + t * t * Kg)))),
            "H_sum": float(np.max(np.abs(Ht - (Hf + t * Hg)))),
        }
    if mode != "plane":
        raise MinkowskiError(f"unknown sum mode {mode!r}")
    h = sum_plane(f, g, t)
    j1, j2, jt = f.jet(u, v), g.jet(u, v), h.jet(u, v)
    K1, H1 = support_KH_star(j1)
    K2, H2 = support_KH_star(j2)
    Kt, Ht = support_KH_star(jt)
    if np.any(np.abs(Kt) < 1e-12):
        raise MinkowskiError("flat point in the plane-based sum")
    K_pt, H_pt = dual_field_curvature(support_contact_field(h), u, v)
    return {
        "Kstar_sum": float(np.max(np.abs(Kt - (K1 + t * support_mixed_star(j1, j2) + t * t * K2)))),
        "Hstar_sum": float(np.max(np.abs(Ht - (H1 + t * H2)))),
        "K_recip": float(np.max(np.abs(K_pt - 1.0 / Kt))),
        "H_ratio": float(np.max(np.abs(H_pt - Ht / Kt))),
    }


def shear(f, a: float, b: float, c: float) -> LinearField:
    """Isotropic shear: add the affine function a u + b v + c to the height."""
    from .fields import AnalyticField

    lin = AnalyticField.from_string("a*u + b*v + c", {"a": a, "b": b, "c": c})
    return combine((1.0, f), (1.0, lin))


def windowed_mixed_area(f, g, grid, which: str = "delta") -> np.ndarray:
    """Per-cell mixed areas of the top views of the duals of F and G on the grid."""
    from .discrete import mixed_area

    U, V = grid.mesh()
    P = dualize_graph(f, which).values(U, V)[..., :2]
    Q = dualize_graph(g, which).values(U, V)[..., :2]
    return mixed_area(_cells(P), _cells(Q))


def _cells(X: np.ndarray) -> np.ndarray:
    return np.stack([X[:-1, :-1], X[1:, :-1], X[1:, 1:], X[:-1, 1:]], axis=-2)


def window_sum(cells: np.ndarray, i0: int, i1: int, j0: int, j1: int) -> float:
    """Sum of per-cell values over the cell window [i0, i1) x [j0, j1)."""
    return float(np.sum(cells[i0:i1, j0:j1]))
