"""Isometry test and the classical isometric families.

Isometries of isotropic space preserve the top view and the Gaussian
curvature, so every family here is checked by comparing K over a common top
view: associated families of minimal graphs, Bour's helical and rotational
families, parabolic rotational surfaces and Minding families of ruled
surfaces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .curvature import curvature_param, graph_KH
from .expr import Add, Expr, Jet2, Mul, Num, Pow, Var, eval_jet2, fcos, fsin, fsqrt, parse
from .fields import AnalyticField, Grid2, JetSurface, SampledField, combine, integrate_gradient


class IsometryError(ValueError):
    pass


class HarmonicError(IsometryError):
    pass


class NegativeRadicandError(IsometryError):
    def __init__(self, v: float, value: float):
        super().__init__(f"negative radicand {value:.3e} at v = {v:.6g}: no real isometric surface")
        self.v = v
        self.value = value


class NonSmoothError(IsometryError):
    pass


def _eval_points(f, g, points):
    if points is None:
        ga, gb = getattr(f, "grid", None), getattr(g, "grid", None)
        grid = ga or gb
        if grid is None:
            raise IsometryError("analytic fields need explicit sample points or a grid")
        if ga is not None and gb is not None and ga != gb:
            raise IsometryError("fields live on different grids (domain mismatch)")
        return grid.mesh(2)
    if isinstance(points, Grid2):
        for h in (f, g):
            if getattr(h, "grid", None) not in (None, points):
                raise IsometryError("sample grid differs from the field grid (domain mismatch)")
        m = 2 if any(isinstance(h, SampledField) for h in (f, g)) else 0
        return points.mesh(m)
    return points


def is_isometric(f, g, points=None, tol: float = 1e-8) -> tuple[bool, np.ndarray]:
    """True iff |K(F) - K(G)| <= tol at every sample; the residual field is returned.

    ``points`` is a Grid2 or a (U, V) pair; sampled fields default to their own
    grid (away from the difference-stencil border).
    """
    U, V = _eval_points(f, g, points)
    Kf, _ = graph_KH(f.jet(U, V))
    Kg, _ = graph_KH(g.jet(U, V))
    res = np.abs(np.asarray(Kf) - np.asarray(Kg))
    return bool(np.all(res <= tol)), res


# ---------------------------------------------------------------- associated family


def laplacian_residual(x, U, V) -> float:
    j = x.jet(U, V)
    return float(np.max(np.abs(np.asarray(j.duu) + np.asarray(j.dvv))))


def cauchy_riemann_residual(x, y, U, V) -> float:
    jx, jy = x.jet(U, V), y.jet(U, V)
    return float(max(np.max(np.abs(np.asarray(jy.du) + jx.dv)), np.max(np.abs(np.asarray(jy.dv) - jx.du))))


@dataclass(frozen=True, eq=False)
class ConjugateField:
    """Harmonic conjugate y of x: values integrated on grid nodes, derivatives from x.

    y_u = -x_v, y_v = x_u, so every derivative of y is a derivative of x.
    """

    grid: Grid2
    values: np.ndarray
    x: object
    closure: float

    def _y(self, u, v):
        i, j = self.grid.index_of(u, v)
        return self.values[i, j] + 0.0

    def jet(self, u, v) -> Jet2:
        X = self.x.jet(u, v)
        return Jet2(self._y(u, v), -X.dv, X.du, -X.duv, -X.dvv, X.duv)

    def deriv_jets(self, u, v) -> Jet2:
        X = self.x.deriv_jets(u, v)
        y0 = Jet2(self._y(u, v), -X.dv.value, X.du.value, -X.duv.value, -X.dvv.value, X.duv.value)
        return Jet2(y0, -X.dv, X.du, -X.duv, -X.dvv, X.duv)

    def value(self, u, v):
        return self._y(u, v)


def harmonic_conjugate(x, grid: Grid2, tol: float = 1e-8) -> ConjugateField:
    """Conjugate harmonic y with y(u0, v0) = 0 by path integration over the grid nodes.

    Sampled inputs are integrated on the subgrid two cells away from the border.
    """
    m = 2 if isinstance(x, SampledField) else 0
    sub = Grid2(grid.u0 + m * grid.hu, grid.v0 + m * grid.hv, grid.hu, grid.hv, grid.nu - 2 * m, grid.nv - 2 * m)
    U, V = sub.mesh()
    j = x.jet(U, V)
    lap = np.max(np.abs(np.asarray(j.duu) + np.asarray(j.dvv)))
    if lap > tol:
        raise HarmonicError(f"input is not harmonic: max |Laplacian| = {lap:.3e}")
    vals, closure = integrate_gradient(-j.dv, j.du, -j.duv, j.duv, sub.hu, sub.hv)
    if closure > max(tol, 10 * tol):
        raise HarmonicError(f"path integration closure residual {closure:.3e} above tolerance")
    return ConjugateField(sub, vals, x, closure)


def assoc_family(x, y, t: float, points=None, tol: float = 1e-8):
    """Member f^t = x cos t + y sin t of the associated family."""
    if points is not None:
        U, V = points.mesh() if isinstance(points, Grid2) else points
        r = cauchy_riemann_residual(x, y, U, V)
        if r > tol:
            raise HarmonicError(f"x, y are not conjugate harmonic: Cauchy-Riemann residual {r:.3e}")
    return combine((math.cos(t), x), (math.sin(t), y))


# ---------------------------------------------------------------- profiles


@dataclass(frozen=True)
class Profile:
    """A function of v given by an expression (u must not occur)."""

    expr: Expr
    params: dict = field(default_factory=dict)

    @classmethod
    def from_string(cls, text: str, params=None) -> "Profile":
        return cls(parse(text), dict(params or {}))

    def jet(self, v) -> Jet2:
        return eval_jet2(self.expr, 0.0, v, self.params)

    def d(self, v, order: int = 0):
        j = self.jet(v)
        return (j.value, j.dv, j.dvv)[order]

    def as_field(self) -> AnalyticField:
        return AnalyticField(self.expr, self.params)


def rotational_K(fprime, fsecond, h: float, v):
    """K = (f' f'' v^3 - h^2) / v^4 of the helical surface (v cos u, v sin u, f(v) + h u)."""
    v = np.asarray(v, dtype=float)
    if np.any(v == 0.0):
        raise IsometryError("v = 0 is the axis of the helical motion")
    out = (np.asarray(fprime) * np.asarray(fsecond) * v**3 - h * h) / v**4
    return float(out) if np.ndim(out) == 0 else out


def helical_surface(profile: Profile, h: float = 0.0) -> JetSurface:
    """(v cos u, v sin u, f(v) + h u) as a jet surface."""

    def fn(u, v):
        U, V = Jet2.var_u(u), Jet2.var_v(v)
        fj = profile.jet(v)
        z = Jet2(np.asarray(fj.value) + h * np.asarray(u), h, fj.dv, 0.0, 0.0, fj.dvv)
        return V * fcos(U), V * fsin(U), z

    return JetSurface(fn)


# ---------------------------------------------------------------- quadrature


@dataclass
class QuadResult:
    value: float
    error: float
    downgraded: bool


def adaptive_simpson(g: Callable[[float], float], a: float, b: float, tol: float = 1e-9, min_width: float = 1e-7) -> QuadResult:
    """Adaptive Simpson with Richardson correction, absolute tolerance ``tol``.

    An interval is accepted when |S2 - S1| <= 15 tol; the returned value adds
    (S2 - S1)/15.  Intervals narrower than ``min_width`` are accepted as they
    are and flag the result as downgraded.
    """
    if a == b:
        return QuadResult(0.0, 0.0, False)
    state = {"err": 0.0, "down": False}

    def simpson(fa, fm, fb, w):
        return w / 6.0 * (fa + 4.0 * fm + fb)

    fa, fb, fm = g(a), g(b), g(0.5 * (a + b))
    total = 0.0
    stack = [(a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), tol)]
    while stack:
        lo, hi, flo, fmid, fhi, whole, eps = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = g(lm), g(rm)
        left = simpson(flo, flm, fmid, mid - lo)
        right = simpson(fmid, frm, fhi, hi - mid)
        diff = left + right - whole
        if abs(diff) <= 15.0 * eps or (hi - lo) <= min_width:
            if abs(diff) > 15.0 * eps:
                state["down"] = True
            total += left + right + diff / 15.0
            state["err"] += abs(diff) / 15.0
            continue
        stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * eps))
        stack.append((lo, mid, flo, flm, fmid, left, 0.5 * eps))
    return QuadResult(total, state["err"], state["down"])


# ---------------------------------------------------------------- Bour family


def _sign_one(v):
    return np.ones_like(np.asarray(v, dtype=float))


@dataclass
class BourFamily:
    """Helical surface (v cos u, v sin u, fbar(v) + hbar u) isometric to a rotational one.

    fbar' = eps(v) sqrt(r), r = f'^2 - hbar^2 / v^2 + c; fbar(v0) = 0.
    """

    profile: Profile
    hbar: float
    c: float
    eps: Callable
    v0: float
    v1: float
    nodes: np.ndarray
    fbar: np.ndarray
    closure: float
    downgraded: bool
    switches: list[tuple[float, float]]

    def radicand(self, v):
        fp = np.asarray(self.profile.d(v, 1), dtype=float)
        return fp * fp - self.hbar**2 / np.asarray(v, dtype=float) ** 2 + self.c

    def radicand_d(self, v):
        j = self.profile.jet(v)
        v = np.asarray(v, dtype=float)
        return 2.0 * np.asarray(j.dv) * np.asarray(j.dvv) + 2.0 * self.hbar**2 / v**3

    def value(self, v) -> np.ndarray:
        """fbar at arbitrary v in the range: nearest node plus a short quadrature."""
        v = np.asarray(v, dtype=float)
        out = np.empty(v.shape)
        for idx, vv in np.ndenumerate(v):
            k = int(np.clip(np.searchsorted(self.nodes, vv), 1, len(self.nodes) - 1))
            k = k if abs(self.nodes[k] - vv) < abs(self.nodes[k - 1] - vv) else k - 1
            out[idx] = self.fbar[k] + adaptive_simpson(self._integrand, self.nodes[k], float(vv)).value
        return out

    def _integrand(self, v: float) -> float:
        r = float(self.radicand(v))
        if r < 0.0:
            if r < -1e-13:
                raise NegativeRadicandError(v, r)
            r = 0.0
        return float(self.eps(v)) * math.sqrt(r)

    def derivs(self, v) -> tuple[np.ndarray, np.ndarray]:
        """(fbar', fbar'') = (eps sqrt r, eps r' / (2 sqrt r))."""
        r = np.asarray(self.radicand(v), dtype=float)
        if np.any(r <= 0.0):
            raise NegativeRadicandError(float(np.asarray(v).flat[int(np.argmin(r))]), float(np.min(r)))
        s = np.sqrt(r)
        e = np.asarray(self.eps(v), dtype=float)
        return e * s, e * self.radicand_d(v) / (2.0 * s)

    def surface(self) -> JetSurface:
        def fn(u, v):
            U, V = Jet2.var_u(u), Jet2.var_v(v)
            d1, d2 = self.derivs(v)
            z = Jet2(self.value(v) + self.hbar * np.asarray(u), self.hbar + 0.0 * d1, d1, 0.0, 0.0, d2)
            return V * fcos(U), V * fsin(U), z

        return JetSurface(fn)

    def K(self, u, v):
        """K of the helical surface from the profile: (fbar' fbar'' v^3 - hbar^2) / v^4."""
        d1, d2 = self.derivs(v)
        return rotational_K(d1, d2, self.hbar, np.broadcast_to(np.asarray(v, dtype=float), np.shape(d1)))


def bour_family(
    profile: Profile,
    hbar: float,
    c: float,
    v_range: tuple[float, float],
    eps: Callable | None = None,
    n_nodes: int = 201,
    tol: float = 1e-9,
    smooth_tol: float = 5e-2,
) -> BourFamily:
    """Profile of the helical surface isometric to the rotational surface of ``profile``.

    The radicand is scanned on a fine sampling of the range first; a negative
    value raises :class:`NegativeRadicandError`.  Where eps changes sign the
    jump of fbar' (twice the root of the radicand there) must stay below
    ``smooth_tol`` times max |fbar'|, otherwise :class:`NonSmoothError`.
    """
    v0, v1 = (float(x) for x in v_range)
    if v0 <= 0.0 <= v1 or v0 >= v1:
        raise IsometryError("v range must be increasing and exclude the axis v = 0")
    eps = eps or _sign_one
    fam = BourFamily(profile, hbar, c, eps, v0, v1, np.linspace(v0, v1, n_nodes), np.zeros(n_nodes), 0.0, False, [])
    scan = np.linspace(v0, v1, 20 * n_nodes + 1)
    r = fam.radicand(scan)
    if np.min(r) < -1e-13:
        k = int(np.argmin(r))
        first = int(np.argmax(r < -1e-13))
        raise NegativeRadicandError(float(scan[first]), float(r[k]))
    # sign switches of eps: bisect to the switching point
    e = np.asarray(eps(scan), dtype=float)
    scale = max(float(np.max(np.sqrt(np.maximum(r, 0.0)))), 1e-300)
    for k in np.nonzero(e[1:] != e[:-1])[0]:
        lo, hi = scan[k], scan[k + 1]
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if float(eps(mid)) == e[k]:
                lo = mid
            else:
                hi = mid
        jump = 2.0 * math.sqrt(max(float(fam.radicand(hi)), 0.0))
        fam.switches.append((hi, jump))
        if jump > smooth_tol * scale:
            raise NonSmoothError(f"eps switches at v = {hi:.6g} where fbar' jumps by {jump:.3e}")
    cut = sorted({v0, v1, *(s for s, _ in fam.switches)})
    total = 0.0
    down = False
    vals = [0.0]
    nodes = fam.nodes
    for a, b in zip(nodes[:-1], nodes[1:]):
        acc = 0.0
        pts = [a, *[s for s in cut if a < s < b], b]
        for p, q in zip(pts[:-1], pts[1:]):
            qr = adaptive_simpson(fam._integrand, p, q, tol / (n_nodes - 1))
            acc += qr.value
            down |= qr.downgraded
        total += acc
        vals.append(total)
    once = 0.0
    for p, q in zip(cut[:-1], cut[1:]):
        qr = adaptive_simpson(fam._integrand, p, q, tol)
        once += qr.value
        down |= qr.downgraded
    fam.fbar = np.array(vals)
    fam.closure = abs(once - total)
    fam.downgraded = down
    return fam


def bour_eps_example(v):
    """Sign choice of the worked example: sgn(cos v) below 2 pi, +1 beyond."""
    v = np.asarray(v, dtype=float)
    s = np.where(np.cos(v) >= 0.0, 1.0, -1.0)
    return np.where(v < 2.0 * np.pi, s, 1.0)


def bour_tangency_constant(profile: Profile, hbar: float, bracket: tuple[float, float]) -> tuple[float, float]:
    """(c, v*) making min of f'^2 - hbar^2/v^2 over the bracket zero: the radicand then touches 0."""
    v = np.linspace(*bracket, 20001)
    fp = np.asarray(profile.d(v, 1))
    g = fp * fp - hbar**2 / v**2
    k = int(np.argmin(g))
    lo, hi = v[max(k - 1, 0)], v[min(k + 1, len(v) - 1)]
    gr = 0.5 * (math.sqrt(5.0) - 1.0)
    for _ in range(200):
        a, b = hi - gr * (hi - lo), lo + gr * (hi - lo)
        ga = float(profile.d(a, 1)) ** 2 - hbar**2 / a**2
        gb = float(profile.d(b, 1)) ** 2 - hbar**2 / b**2
        if ga < gb:
            hi = b
        else:
            lo = a
    vs = 0.5 * (lo + hi)
    return -(float(profile.d(vs, 1)) ** 2 - hbar**2 / vs**2), vs


# ---------------------------------------------------------------- parabolic rotations


def parabolic_surface(a: float, b: float, profile: Profile) -> AnalyticField:
    """Height a u^2 + b u v + f(v)."""
    e = Add(Add(Mul(Num(a), Pow(Var("u"), Num(2.0))), Mul(Num(b), Mul(Var("u"), Var("v")))), profile.expr)
    return AnalyticField(e, profile.params)


@dataclass(frozen=True)
class ParabolicResult:
    profile: Profile
    abar: float
    bbar: float
    constant_K: float | None = None
    note: str = ""

    def surface(self) -> AnalyticField:
        return parabolic_surface(self.abar, self.bbar, self.profile)


def parabolic_family(
    profile: Profile, a: float, b: float, abar: float, bbar: float, c1: float = 0.0, c2: float = 0.0, sample=None, tol: float = 1e-9
) -> ParabolicResult:
    """Isometric partner of a u^2 + b u v + f(v): fbar = (a/abar) f + (bbar^2 - b^2)/(4 abar) v^2 + c1 v + c2.

    K = 2 a f'' - b^2 is matched.  With abar = 0 the partner has constant
    K = -bbar^2 for every profile, so K of the input must be that constant.
    """
    lin = Add(Mul(Num(c1), Var("v")), Num(c2))
    if abar == 0.0:
        if bbar == 0.0:
            raise IsometryError("abar = bbar = 0 gives a developable partner")
        v = np.linspace(-1.0, 1.0, 41) if sample is None else np.asarray(sample, dtype=float)
        K = 2.0 * a * np.asarray(profile.d(v, 2)) - b * b
        if np.max(np.abs(K + bbar * bbar)) > tol:
            raise IsometryError(f"abar = 0 requires constant K = -bbar^2 = {-bbar * bbar}; input K varies or differs")
        return ParabolicResult(
            Profile(Add(profile.expr, lin), profile.params), 0.0, bbar, -bbar * bbar, "constant K independent of the profile"
        )
    e = Add(
        Add(Mul(Num(a / abar), profile.expr), Mul(Num((bbar * bbar - b * b) / (4.0 * abar)), Pow(Var("v"), Num(2.0)))),
        lin,
    )
    return ParabolicResult(Profile(e, profile.params), abar, bbar)


def parabolic_K(a: float, b: float, profile: Profile, v):
    return 2.0 * a * np.asarray(profile.d(v, 2)) - b * b


# ---------------------------------------------------------------- ruled surfaces


@dataclass(frozen=True)
class StrictionData:
    point: np.ndarray
    tstar: float
    rho: float
    sigma: float | None
    kappa: float | None
    kind: str


def _curve_jets(exprs, params, u):
    return [eval_jet2(e, u, 0.0, params) for e in exprs]


@dataclass(frozen=True)
class RuledSurfaceSpec:
    """R(u, t) = c(u) + t e(u); e is rescaled so its top view has unit length.

    ``kind`` is "I", "II", "III" or None (detected).  A given kind is verified
    at the sample parameters ``check``.
    """

    c: tuple
    e: tuple
    params: dict = field(default_factory=dict)
    kind: str | None = None
    check: tuple = ()
    tol: float = 1e-9

    @classmethod
    def from_strings(cls, c, e, params=None, kind=None, check=(), tol: float = 1e-9) -> "RuledSurfaceSpec":
        return cls(tuple(parse(s) for s in c), tuple(parse(s) for s in e), dict(params or {}), kind, tuple(check), tol)

    def __post_init__(self):
        if len(self.c) != 3 or len(self.e) != 3:
            raise IsometryError("directrix and direction need three components")
        if self.kind is not None:
            if self.kind not in ("I", "II", "III"):
                raise IsometryError(f"unknown ruled-surface type {self.kind!r}")
            for u in self.check:
                got = self.detect(u)
                if got != self.kind:
                    raise IsometryError(f"type tag {self.kind} inconsistent: type {got} detected at u = {u}")

    def frames(self, u):
        """Jets (in the u slot) of c and of the normalized e."""
        cj = _curve_jets(self.c, self.params, u)
        ej = _curve_jets(self.e, self.params, u)
        n2 = ej[0] * ej[0] + ej[1] * ej[1]
        if np.any(np.abs(np.asarray(n2.value)) < 1e-28):
            raise IsometryError("ruling direction is isotropic")
        n = fsqrt(n2)
        ej = [x / n for x in ej]
        return cj, ej

    def _quantities(self, u):
        cj, ej = self.frames(u)
        c1 = [x.du for x in cj]
        e0 = [x.value for x in ej]
        e1 = [x.du for x in ej]
        kappa_e = e0[0] * e1[1] - e0[1] * e1[0]  # det(e~, e~')
        return cj, ej, c1, e0, e1, kappa_e

    def detect(self, u) -> str:
        cj, ej, c1, e0, e1, ke = self._quantities(u)
        if abs(ke) <= self.tol:
            return "III"
        lam = self._lambda(cj, ej, ke)
        return "II" if abs(lam) <= self.tol else "I"

    @staticmethod
    def _lambda(cj, ej, ke):
        # t* = det(c~', e~) / det(e~, e~'); lambda = <c~', e~> + t*'
        num = cj[0].du * ej[1].value - cj[1].du * ej[0].value
        dnum = cj[0].duu * ej[1].value + cj[0].du * ej[1].du - cj[1].duu * ej[0].value - cj[1].du * ej[0].du
        dke = ej[0].value * ej[1].duu - ej[1].value * ej[0].duu  # derivative of det(e~, e~')
        tsd = (dnum * ke - num * dke) / (ke * ke)
        return cj[0].du * ej[0].value + cj[1].du * ej[1].value + tsd

    def point(self, u, t) -> np.ndarray:
        cj, ej = self.frames(u)
        return np.array([float(a.value) + t * float(b.value) for a, b in zip(cj, ej)])

    def surface(self) -> JetSurface:
        """R(u, t) with u in the u slot and t in the v slot."""

        def fn(u, t):
            cj = _curve_jets(self.c, self.params, u)
            ej = _curve_jets(self.e, self.params, u)
            n = fsqrt(ej[0] * ej[0] + ej[1] * ej[1])
            T = Jet2.var_v(t)
            return tuple(a + T * (b / n) for a, b in zip(cj, ej))

        return JetSurface(fn)


def striction(R: RuledSurfaceSpec, u: float) -> StrictionData:
    """Striction point, sigma, kappa and the pitch rho at parameter u.

    Types I/II: t* = det(c~', e~)/det(e~, e~') and
    rho = (c_z' + t* e_z' - <c~', e~> e_z) / det(e~, e~'); sigma and kappa are
    reported where the striction curve has a regular top view (type I).
    Type III: rho = e_z' / det(c~', e~).
    """
    cj, ej, c1, e0, e1, ke = R._quantities(u)
    kind = R.detect(u)
    if R.kind is not None and kind != R.kind:
        raise IsometryError(f"type tag {R.kind} inconsistent: type {kind} detected at u = {u}")
    if kind == "III":
        d = c1[0] * e0[1] - c1[1] * e0[0]
        if abs(d) <= 1e-14:
            raise IsometryError("directrix runs along the rulings in top view")
        rho = e1[2] / d
        return StrictionData(np.full(3, np.nan), float("nan"), float(rho), None, None, kind)
    tstar = (c1[0] * e0[1] - c1[1] * e0[0]) / ke
    ce = c1[0] * e0[0] + c1[1] * e0[1]
    num = c1[2] + tstar * e1[2] - ce * e0[2]
    rho = num / ke
    sigma = kappa = None
    if kind == "I":
        lam = R._lambda(cj, ej, ke)
        sigma = float(num / lam)
        kappa = float(ke / lam)
    point = np.array([float(a.value) + tstar * float(b) for a, b in zip(cj, e0)])
    return StrictionData(point, float(tstar), float(rho), sigma, kappa, kind)


def ruled_K(R: RuledSurfaceSpec, u: float, t: float) -> float:
    """K = -rho^2 / w^4 with w = |t - t*| (types I, II); K = -rho^2 for type III."""
    s = striction(R, u)
    if s.kind == "III":
        return -s.rho**2
    w = abs(t - s.tstar)
    if w < 1e-14:
        raise IsometryError("K is singular at the striction point")
    return -(s.rho**2) / w**4


def ruled_K_param(R: RuledSurfaceSpec, u, t):
    """Independent evaluation: K of R(u, t) through the parametric curvature formula."""
    K, _ = curvature_param(R.surface(), u, t)
    return K


# ---------------------------------------------------------------- Minding families


def ruling_direction(j: Jet2) -> np.ndarray:
    """Unit null direction of the Hessian of a torsal (K = 0) graph."""
    a, b, c = (np.asarray(x, dtype=float) for x in (j.duu, j.duv, j.dvv))
    # null vector of [[a, b], [b, c]]: the better conditioned of (b, -a) and (c, -b)
    v1 = np.stack(np.broadcast_arrays(b, -a), axis=-1)
    v2 = np.stack(np.broadcast_arrays(c, -b), axis=-1)
    n1, n2 = np.linalg.norm(v1, axis=-1), np.linalg.norm(v2, axis=-1)
    d = np.where((n1 >= n2)[..., None], v1, v2)
    n = np.maximum(np.maximum(n1, n2), 1e-300)[..., None]
    return d / n


@dataclass
class MindingReport:
    torsal: float
    ruling_mismatch: float
    trivial: bool
    planar_scale: float


def minding_check(F, R, U, V, tol: float = 1e-8) -> MindingReport:
    jf, jr = F.jet(U, V), R.jet(U, V)
    Kr, _ = graph_KH(jr)
    hess = np.stack(np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (jr.duu, jr.duv, jr.dvv))), axis=-1)
    scale = float(np.max(np.abs(hess)))
    trivial = scale <= tol
    mismatch = 0.0
    if not trivial:
        d = ruling_direction(jr)
        q = jf.duu * d[..., 0] ** 2 + 2.0 * jf.duv * d[..., 0] * d[..., 1] + jf.dvv * d[..., 1] ** 2
        mismatch = float(np.max(np.abs(q)))
    return MindingReport(float(np.max(np.abs(Kr))), mismatch, trivial, scale)


def minding_family(F, R, s: float, points=None, tol: float = 1e-8):
    """F + s R for a torsal R whose rulings have the top views of the rulings of F.

    With ``points`` (Grid2 or (U, V)) the preconditions are checked: K(R) = 0
    and the ruling direction of R is asymptotic on F.  A planar R gives a
    trivial isometry (a congruence).
    """
    if points is not None:
        U, V = points.mesh() if isinstance(points, Grid2) else points
        rep = minding_check(F, R, U, V, tol)
        if rep.torsal > tol:
            raise IsometryError(f"addend is not torsal: max |K(R)| = {rep.torsal:.3e}")
        if rep.ruling_mismatch > tol:
            raise IsometryError(f"rulings of the addend do not match rulings of F ({rep.ruling_mismatch:.3e})")
    return combine((1.0, F), (s, R))

