"""Infinitesimal isometries of graphs, their displacement diagrams and the Darboux wreaths.

A flexible pair (f, n) is a graph F = (u, v, f) with velocity diagram
V = (-v, u, n); the pair is flexible when

    f_uu n_vv - 2 f_uv n_uv + f_vv n_uu = 0.

The rotation diagram C needs a potential c with c_u = f_u n_uv - f_v n_uu,
c_v = f_u n_vv - f_v n_uv, which exists exactly for flexible pairs.  The
other diagrams follow from the dualities delta and nu.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curvature import CurvatureError, graph_KH, mixed_from_jets, param_KH_from_jets
from .duality import (
    ContactField,
    J5,
    L5,
    coord_jets,
    delta5,
    integrability_residual,
    nu5,
    tangency_residual,
)
from .expr import Jet2
from .fields import AnalyticField, BoundaryError, Grid2, SampledField, combine, integrate_gradient


class WreathError(ValueError):
    pass


class IntegrabilityError(WreathError):
    pass


class AreaPreservationError(WreathError):
    pass


def _margin(*fields) -> int:
    return 4 if any(isinstance(f, SampledField) for f in fields) else 0


def _subgrid(grid: Grid2, m: int) -> Grid2:
    if m == 0:
        return grid
    return Grid2(grid.u0 + m * grid.hu, grid.v0 + m * grid.hv, grid.hu, grid.hv, grid.nu - 2 * m, grid.nv - 2 * m)


def _amax(x) -> float:
    return float(np.max(np.abs(np.asarray(x, dtype=float))))


# ---------------------------------------------------------------- flexibility


def flex_residual(f, n, u, v):
    """K(F, V) = f_uu n_vv - 2 f_uv n_uv + f_vv n_uu (twice the mixed curvature)."""
    return 2.0 * mixed_from_jets(f.jet(u, v), n.jet(u, v))


@dataclass(frozen=True)
class FlexPair:
    f: object
    n: object

    def residual(self, u, v):
        return flex_residual(self.f, self.n, u, v)

    def check(self, u, v, tol: float) -> float:
        r = _amax(self.residual(u, v))
        if r > tol:
            raise IntegrabilityError(f"(f, n) is not flexible: max |K(F, V)| = {r:.3e}")
        return r


@dataclass(frozen=True)
class LWVelocity:
    n: object
    lw_residual: float  # max |a H(F) + b K(F)|
    v_relation: float  # max |-a H(V) + K(V)|
    degenerate: bool


def lw_velocity(f, a: float, b: float, points, tol: float = 1e-9) -> LWVelocity:
    """Velocity height n = (a/2)(u^2 + v^2) + b f for a linear Weingarten graph (aH + bK = 0).

    Also evaluates the relation -a H(V) + K(V) = 0 on V = (-v, u, n) through
    the parametric curvature formulas and flags n = 0 as a trivial field.
    """
    U, V = points.mesh() if isinstance(points, Grid2) else points
    K, H = graph_KH(f.jet(U, V))
    r = _amax(a * H + b * K)
    if r > tol:
        raise WreathError(f"f is not linear Weingarten for (a, b) = ({a}, {b}): max |aH + bK| = {r:.3e}")
    quad = AnalyticField.from_string("(u^2 + v^2)/2")
    n = combine((a, quad), (b, f))
    KV, HV = param_KH_from_jets(*velocity_point_jets(n, U, V))
    jn = n.jet(U, V)
    scale = max(_amax(jn.duu), _amax(jn.duv), _amax(jn.dvv), _amax(jn.du), _amax(jn.dv))
    return LWVelocity(n, r, _amax(-a * HV + KV), scale <= tol)


def velocity_point_jets(n, u, v):
    U, V = coord_jets(u, v)
    return (-V, U, n.jet(u, v))


# ---------------------------------------------------------------- the potential c


@dataclass(frozen=True, eq=False)
class CField:
    """Potential of the rotation diagram on grid nodes, derivatives from (f, n)."""

    grid: Grid2
    values: np.ndarray
    f: object
    n: object
    closure: float

    def _c(self, u, v):
        i, j = self.grid.index_of(u, v)
        return self.values[i, j] + 0.0

    def jet(self, u, v) -> Jet2:
        Fd, Nd = self.f.deriv_jets(u, v), self.n.deriv_jets(u, v)
        fu, fv = Fd.du, Fd.dv
        nuu, nuv, nvv = Nd.duu, Nd.duv, Nd.dvv
        cu = fu * nuv - fv * nuu  # jets: derivatives of c_u, c_v come along
        cv = fu * nvv - fv * nuv
        return Jet2(self._c(u, v), cu.value, cv.value, cu.du, cu.dv, cv.dv)

    def value(self, u, v):
        return self._c(u, v)


def c_gradient(f, n, u, v) -> tuple[Jet2, Jet2]:
    Fd, Nd = f.deriv_jets(u, v), n.deriv_jets(u, v)
    return Fd.du * Nd.duv - Fd.dv * Nd.duu, Fd.du * Nd.dvv - Fd.dv * Nd.duv


def integrate_c(f, n, grid: Grid2, tol: float = 1e-8) -> CField:
    """Potential c with c(u0, v0) = 0 at the first node of the (sub)grid.

    Sampled inputs use the subgrid four cells inside the border, where the
    third derivatives of n are available.  The flexibility residual must be
    below ``tol`` and the path-closure residual below 10 tol.
    """
    sub = _subgrid(grid, _margin(f, n))
    U, V = sub.mesh()
    FlexPair(f, n).check(U, V, tol)
    cu, cv = c_gradient(f, n, U, V)
    vals, closure = integrate_gradient(cu.value, cv.value, cu.du, cv.dv, sub.hu, sub.hv)
    if closure > 10.0 * tol:
        raise IntegrabilityError(f"closure residual {closure:.3e} exceeds 10 tol")
    return CField(sub, vals, f, n, closure)


# ---------------------------------------------------------------- wreath


def _L(E):
    return L5(*E)


def _J(E):
    return J5(*E)


@dataclass(frozen=True, eq=False)
class WreathSet:
    f: object
    n: object
    c: CField
    F: ContactField
    V: ContactField
    C: ContactField
    Cbar: ContactField
    B: ContactField
    Bbar: ContactField

    @property
    def grid(self) -> Grid2:
        return self.c.grid

    def fields(self) -> dict[str, ContactField]:
        return {"F": self.F, "V": self.V, "C": self.C, "Cbar": self.Cbar, "B": self.B, "Bbar": self.Bbar}


def build_wreath(f, n, grid: Grid2, tol: float = 1e-8) -> WreathSet:
    """The six contact fields of the wreath; Cbar, B, Bbar are delta images of V, F, C."""
    c = integrate_c(f, n, grid, tol)

    def Fj(u, v):
        D = f.deriv_jets(u, v)
        U, V = coord_jets(u, v)
        return (U, V, D.value, D.du, D.dv)

    def Vj(u, v):
        N = n.deriv_jets(u, v)
        U, V = coord_jets(u, v)
        return (-V, U, N.value, -N.dv, N.du)

    def Cj(u, v):
        D, N = f.deriv_jets(u, v), n.deriv_jets(u, v)
        return (-N.du, -N.dv, c.jet(u, v), D.dv, -D.du)

    F = ContactField(Fj, "F")
    V = ContactField(Vj, "V")
    C = ContactField(Cj, "C")
    return WreathSet(
        f, n, c, F, V, C,
        V.mapped(delta5, "Cbar"),
        F.mapped(delta5, "B"),
        C.mapped(delta5, "Bbar"),
    )


def closed_form_quintuples(W: WreathSet, u, v) -> dict[str, np.ndarray]:
    """The six quintuples written out in terms of f, n, c (independent of the delta map)."""
    Fd, Nd = W.f.jet(u, v), W.n.jet(u, v)
    c = W.c.jet(u, v).value
    U, V = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    f, fu, fv = Fd.value, Fd.du, Fd.dv
    n, nu_, nv_ = Nd.value, Nd.du, Nd.dv

    def st(*xs):
        return np.stack(np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in xs)), axis=-1)

    return {
        "F": st(U, V, f, fu, fv),
        "V": st(-V, U, n, -nv_, nu_),
        "C": st(-nu_, -nv_, c, fv, -fu),
        "Cbar": st(-nv_, nu_, -n + nu_ * U + nv_ * V, -V, U),
        "B": st(fu, fv, fu * U + fv * V - f, U, V),
        "Bbar": st(fv, -fu, -nu_ * fv + nv_ * fu - c, -nu_, -nv_),
    }


def _vals(E) -> np.ndarray:
    return np.stack(np.broadcast_arrays(*(np.asarray(j.value if isinstance(j, Jet2) else j, dtype=float) for j in E)), axis=-1)


def _topview_orth(X, Y) -> float:
    """Max of |<X~u, Y~u>|, |<X~v, Y~v>|, |<X~u, Y~v> + <X~v, Y~u>|."""
    xu = (X[0].du, X[1].du)
    xv = (X[0].dv, X[1].dv)
    yu = (Y[0].du, Y[1].du)
    yv = (Y[0].dv, Y[1].dv)

    def dot(a, b):
        return a[0] * b[0] + a[1] * b[1]

    return max(_amax(dot(xu, yu)), _amax(dot(xv, yv)), _amax(dot(xu, yv) + dot(xv, yu)))


def t_dual(X, Y) -> tuple[Jet2, ...]:
    """Point jets of X + t Y with t a first-order dual number carried in the u slot of each part."""
    return tuple(
        Jet2(*(Jet2(a, b, 0.0, 0.0, 0.0, 0.0) for a, b in zip(x.parts(), y.parts())))
        for x, y in zip(X[:3], Y[:3])
    )


def flex_derivative(X: ContactField, Y: ContactField, u, v, h: float | None = None):
    """d/dt K(X + t Y) at t = 0: exact via dual numbers, or central differences with step h."""
    Xj, Yj = X.point_jets(u, v), Y.point_jets(u, v)
    if h is None:
        K, _ = param_KH_from_jets(*t_dual(Xj, Yj))
        return K.du
    Kp, _ = param_KH_from_jets(*(a + b * h for a, b in zip(Xj, Yj)))
    Km, _ = param_KH_from_jets(*(a - b * h for a, b in zip(Xj, Yj)))
    return (Kp - Km) / (2.0 * h)


@dataclass
class WreathReport:
    residuals: dict[str, float]
    degenerate: bool
    notes: list[str] = field(default_factory=list)

    def max_residual(self) -> float:
        return max(self.residuals.values()) if self.residuals else 0.0

    def to_dict(self) -> dict:
        return {"residuals": dict(self.residuals), "degenerate": self.degenerate, "notes": list(self.notes)}


WREATH_I = {
    "orth": (("F", "V"), ("C", "Cbar"), ("B", "Bbar")),
    "delta": (("V", "Cbar"), ("F", "B"), ("C", "Bbar")),
    "parallel_J": (("F", "C"), ("Cbar", "B"), ("Bbar", "V")),
    "flex": (("F", "V"), ("C", "Cbar"), ("B", "Bbar")),
}
WREATH_II = {
    "nu": (("V", "Cbar"), ("B", "F"), ("C", "Bbar")),  # (L X, Y)
    "parallel_L": (("F", "C"), ("Cbar", "B"), ("Bbar", "V")),  # (X, L Y)
    "topview_L": (("V", "F"), ("C", "Cbar"), ("B", "Bbar")),  # (L X, Y)
}


def wreath_report(W: WreathSet, u=None, v=None) -> WreathReport:
    """Max residual of every relation of both wreaths over the sample points.

    Defaults to all nodes of the wreath grid.  Relations use the stored
    contact elements; the curvature relation uses exact t-derivatives.
    """
    if u is None:
        u, v = W.grid.mesh()
    E = {k: F.jets(u, v) for k, F in W.fields().items()}
    val = {k: _vals(e) for k, e in E.items()}
    res: dict[str, float] = {}
    for a, b in WREATH_I["orth"]:
        res[f"I.orth({a},{b})"] = _topview_orth(E[a], E[b])
    for a, b in WREATH_I["delta"]:
        res[f"I.delta({a},{b})"] = _amax(_vals(delta5(*E[a])) - val[b])
    for a, b in WREATH_I["parallel_J"]:
        res[f"I.parallel({a},J{b})"] = _amax(_vals(_J(E[b]))[..., 3:] - val[a][..., 3:])
    fields = W.fields()
    notes = []
    for a, b in WREATH_I["flex"]:
        try:
            res[f"I.flex({a},{b})"] = _amax(flex_derivative(fields[a], fields[b], u, v))
        except CurvatureError:
            notes.append(f"I.flex({a},{b}) undefined: {a} has a degenerate top view")
    for a, b in WREATH_II["nu"]:
        res[f"II.nu(L{a},{b})"] = _amax(_vals(nu5(*_L(E[a]))) - val[b])
    for a, b in WREATH_II["parallel_L"]:
        res[f"II.parallel({a},L{b})"] = _amax(_vals(_L(E[b]))[..., 3:] - val[a][..., 3:])
    for a, b in WREATH_II["topview_L"]:
        res[f"II.topview(L{a},{b})"] = _amax(_vals(_L(E[a]))[..., :2] - val[b][..., :2])
    for k, F in fields.items():
        res[f"tangency({k})"] = _amax(tangency_residual(F, u, v))
        res[f"integrability({k})"] = _amax(integrability_residual(F, u, v))
    jn = W.n.jet(u, v)
    degenerate = max(_amax(p) for p in jn.parts()[1:]) <= 1e-12
    if degenerate:
        notes.insert(0, "velocity field is trivial (n has no gradient)")
    return WreathReport(res, degenerate, notes)


def rotation_extension(f, n) -> tuple[ContactField, ContactField]:
    """Pointwise rotation diagram C and its delta partner for any pair (f, n).

    The potential c need not exist, so only its derivatives enter: c_u, c_v
    from the flexible-pair formulas and c_uv taken as (c_u)_v.  The value of
    c is set to 0; it does not affect curvature.  On flexible pairs this
    agrees with the wreath fields up to the constant in c.
    """

    def Cj(u, v):
        D, N = f.deriv_jets(u, v), n.deriv_jets(u, v)
        cu, cv = c_gradient(f, n, u, v)
        c = Jet2(cu.value * 0.0, cu.value, cv.value, cu.du, cu.dv, cv.dv)
        return (-N.du, -N.dv, c, D.dv, -D.du)

    def Vj(u, v):
        N = n.deriv_jets(u, v)
        U, V = coord_jets(u, v)
        return (-V, U, N.value, -N.dv, N.du)

    return ContactField(Cj, "C"), ContactField(Vj, "V").mapped(delta5, "Cbar")


def rotation_flex_identity(f, n, u, v, h: float = 1e-4) -> dict[str, np.ndarray]:
    """Terms of d/dt K(C + t Cbar) = n_uv K(F, V) / (n_uu n_vv - n_uv^2)^2.

    ``exact`` uses dual numbers in t, ``fd`` central differences with step h,
    ``rhs`` the right-hand side above and ``undivided_rhs`` the undivided form
    n_uv K(F, V).  All vanish on flexible pairs.
    """
    C, Cbar = rotation_extension(f, n)
    jf, jn = f.jet(u, v), n.jet(u, v)
    KFV = 2.0 * mixed_from_jets(jf, jn)
    D = jn.duu * jn.dvv - jn.duv * jn.duv
    return {
        "exact": flex_derivative(C, Cbar, u, v),
        "fd": flex_derivative(C, Cbar, u, v, h),
        "undivided_rhs": jn.duv * KFV,
        "rhs": jn.duv * KFV / (D * D),
    }


def conjugacy_residual(P: ContactField, u, v):
    """det(X_u, X_v, X_uv): zero where (u, v) is a conjugate parametrization."""
    x, y, z = P.point_jets(u, v)
    a = (x.du, y.du, z.du)
    b = (x.dv, y.dv, z.dv)
    c = (x.duv, y.duv, z.duv)
    return (
        a[0] * (b[1] * c[2] - b[2] * c[1])
        - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
    )


# ---------------------------------------------------------------- relative minimal pairs


@dataclass(frozen=True)
class RelativeWeingarten:
    W: np.ndarray
    kappa: np.ndarray  # (..., 2), complex where K(V) > 0
    KV: np.ndarray
    trace: np.ndarray
    lc_residual: float


def relative_weingarten(f, n, u, v, c: CField | None = None) -> RelativeWeingarten:
    """W = [[-n_uv, n_uu], [-n_vv, n_uv]] and kappa_rel = +-sqrt(n_uv^2 - n_uu n_vv).

    With the potential ``c`` the derivative identities LC_u = -n_uv F_u + n_uu F_v,
    LC_v = -n_vv F_u + n_uv F_v are evaluated (LC = (-n_v, n_u, -c)).
    """
    jn = n.jet(u, v)
    a, b, d = (np.asarray(x, dtype=float) for x in (jn.duu, jn.duv, jn.dvv))
    a, b, d = np.broadcast_arrays(a, b, d)
    W = np.stack([np.stack([-b, a], -1), np.stack([-d, b], -1)], -2)
    rad = (b * b - a * d).astype(complex)
    k = np.sqrt(rad)
    kappa = np.stack([k, -k], axis=-1)
    if np.all(np.abs(kappa.imag) == 0.0):
        kappa = kappa.real
    lc = float("nan")
    if c is not None:
        jf = f.jet(u, v)
        cj = c.jet(u, v)
        # LC_u = (-n_uv, n_uu, -c_u), LC_v = (-n_vv, n_uv, -c_v)
        ru = -cj.du - (-b * jf.du + a * jf.dv)
        rv = -cj.dv - (-d * jf.du + b * jf.dv)
        lc = max(_amax(ru), _amax(rv))
    return RelativeWeingarten(W, kappa, a * d - b * b, W[..., 0, 0] + W[..., 1, 1], lc)


# ---------------------------------------------------------------- split and merge


def split_pair(f, n, points=None, tol: float = 1e-8):
    """(f + n, f - n): isometric graphs when (f, n) is flexible."""
    if points is not None:
        U, V = points.mesh() if isinstance(points, Grid2) else points
        FlexPair(f, n).check(U, V, tol)
    return combine((1.0, f), (1.0, n)), combine((1.0, f), (-1.0, n))


def merge_pair(f1, f2, points=None, tol: float = 1e-8):
    """Middle surface (f1 + f2)/2 and velocity height f1 - f2 of an isometric pair."""
    if points is not None:
        U, V = points.mesh() if isinstance(points, Grid2) else points
        K1, _ = graph_KH(f1.jet(U, V))
        K2, _ = graph_KH(f2.jet(U, V))
        r = _amax(K1 - K2)
        if r > tol:
            raise WreathError(f"surfaces are not isometric: max |K1 - K2| = {r:.3e}")
    return combine((0.5, f1), (0.5, f2)), combine((1.0, f1), (-1.0, f2))


# ---------------------------------------------------------------- paratactic map


def paratactic_forward(E) -> tuple[np.ndarray, np.ndarray]:
    """Left and right image points (x + q, y - p) and (x - q, y + p) of contact elements (..., 5)."""
    if hasattr(E, "as_array"):
        E = E.as_array()
    x, y, _, p, q = np.moveaxis(np.asarray(E, dtype=float), -1, 0)
    return np.stack([x + q, y - p], axis=-1), np.stack([x - q, y + p], axis=-1)


@dataclass(frozen=True)
class PlanarMap:
    """Map (u, v) -> (X, Y) in the plane given by jets of its two components."""

    fn: object

    def jets(self, u, v) -> tuple[Jet2, Jet2]:
        return self.fn(u, v)


def planar_map_of(F: ContactField, which: str) -> PlanarMap:
    """Left (``"l"``) or right (``"r"``) paratactic image of a contact field, with jets."""
    if which not in ("l", "r"):
        raise WreathError("which must be 'l' or 'r'")
    s = 1.0 if which == "l" else -1.0

    def fn(u, v):
        x, y, _, p, q = F.jets(u, v)
        return (x + q * s, y - p * s)

    return PlanarMap(fn)


def jacobian_det(M: PlanarMap, u, v):
    X, Y = M.jets(u, v)
    return X.du * Y.dv - X.dv * Y.du


@dataclass(frozen=True)
class ParatacticResult:
    grid: Grid2
    E: np.ndarray  # (nu, nv, 5)
    closure: float
    area_residual: float


def paratactic_inverse(El: PlanarMap, Er: PlanarMap, grid: Grid2, z0: float = 0.0, tol: float = 1e-8) -> ParatacticResult:
    """Contact elements with left/right images El, Er; z integrated from z_u = p x_u + q y_u, z_v = p x_v + q y_v.

    The map El -> Er must preserve area (equal Jacobian determinants), which
    is the integrability condition of the system.
    """
    U, V = grid.mesh()
    L1, L2 = El.jets(U, V)
    R1, R2 = Er.jets(U, V)
    area = _amax((L1.du * L2.dv - L1.dv * L2.du) - (R1.du * R2.dv - R1.dv * R2.du))
    if area > tol:
        raise AreaPreservationError(f"the planar map is not area preserving: max |det dEl - det dEr| = {area:.3e}")
    x, y = (L1 + R1) * 0.5, (L2 + R2) * 0.5
    q, p = (L1 - R1) * 0.5, (R2 - L2) * 0.5
    zu = p * Jet2(x.du, x.duu, x.duv) + q * Jet2(y.du, y.duu, y.duv)
    zv = p * Jet2(x.dv, x.duv, x.dvv) + q * Jet2(y.dv, y.duv, y.dvv)
    z, closure = integrate_gradient(zu.value, zv.value, zu.du, zv.dv, grid.hu, grid.hv)
    E = np.stack(np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (x.value, y.value, z + z0, p.value, q.value))), axis=-1)
    return ParatacticResult(grid, E, closure, area)


def para_wreath_maps(f, n) -> tuple[PlanarMap, PlanarMap]:
    """Top views of nu(F-) and nu(F+) for F+- = f +- n: (f_v -+ n_v, -f_u +- n_u)."""

    def left(u, v):
        D, N = f.deriv_jets(u, v), n.deriv_jets(u, v)
        return (D.dv - N.dv, -D.du + N.du)

    def right(u, v):
        D, N = f.deriv_jets(u, v), n.deriv_jets(u, v)
        return (D.dv + N.dv, -D.du - N.du)

    return PlanarMap(left), PlanarMap(right)


# ---------------------------------------------------------------- Euclidean to isotropic diagrams


def _det_e3(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """det(a, b, e3) in frame coordinates."""
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


@dataclass(frozen=True)
class IsoDiagrams:
    F: np.ndarray
    V: np.ndarray
    C: np.ndarray
    Cbar: np.ndarray
    n: np.ndarray
    euclid_residual: float


def e2i_diagrams(Fe, Ve, Ce, Cbe, frame=None, tol: float = 1e-9) -> IsoDiagrams:
    """Isotropic diagrams from a Euclidean infinitesimal isometry V^e = Cbar^e + C^e x F^e.

    All outputs are in the coordinates of the orthonormal frame (columns e1,
    e2, e3; e3 is the isotropic direction):
    F = F^e, C = J^{-1} C^e, V = (-<F, e2>, <F, e1>, n) with
    n = <Cbar^e, e3> + det(C^e, F^e, e3), and
    Cbar = (<C, e2>, -<C, e1>, -n - det(F^e, C^e, e3)).
    """
    Fe, Ve, Ce, Cbe = (np.asarray(a, dtype=float) for a in (Fe, Ve, Ce, Cbe))
    T = np.eye(3) if frame is None else np.asarray(frame, dtype=float)
    if np.max(np.abs(T.T @ T - np.eye(3))) > 1e-10:
        raise WreathError("frame must be orthonormal")
    res = _amax(Ve - Cbe - np.cross(Ce, Fe))
    if res > tol:
        raise WreathError(f"Euclidean relation V = Cbar + C x F violated: {res:.3e}")
    F, Ce_f, Cb_f = Fe @ T, Ce @ T, Cbe @ T
    n = Cb_f[..., 2] + _det_e3(Ce_f, F)
    C = np.stack([Ce_f[..., 1], -Ce_f[..., 0], Ce_f[..., 2]], axis=-1)
    V = np.stack([-F[..., 1], F[..., 0], n], axis=-1)
    Cbar = np.stack([C[..., 1], -C[..., 0], -n - _det_e3(F, Ce_f)], axis=-1)
    return IsoDiagrams(F, V, C, Cbar, n, res)
