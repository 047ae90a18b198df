"""Surfaces as height fields, parametrizations and support functions.

Every scalar field exposes ``jet(u, v)`` (a :class:`Jet2`) and
``deriv_jets(u, v)``, a nested jet whose component ``X`` is the Jet2 of the
partial ``f_X``.  Analytic fields are exact; sampled fields use central
differences on a uniform grid and only answer at nodes away from the border.
Arrays of u, v are accepted everywhere and evaluated in one sweep.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Mapping, Protocol

import numpy as np

from .expr import Expr, Jet2, eval_jet2, eval_jet2_nested, evaluate, parse

ANALYTIC_TOL = 1e-9


class FieldError(ValueError):
    pass


class BoundaryError(FieldError):
    pass


@dataclass(frozen=True)
class Grid2:
    """Uniform rectangular grid; node (i, j) sits at (u0 + i*hu, v0 + j*hv)."""

    u0: float
    v0: float
    hu: float
    hv: float
    nu: int
    nv: int

    def __post_init__(self):
        if not (self.hu > 0 and self.hv > 0):
            raise FieldError("grid spacings must be positive")
        if self.nu < 5 or self.nv < 5:
            raise FieldError("grid needs at least 5 samples per direction")
        if not all(math.isfinite(x) for x in (self.u0, self.v0, self.hu, self.hv)):
            raise FieldError("grid parameters must be finite")

    @classmethod
    def square(cls, lo: float = -1.0, hi: float = 1.0, n: int = 129) -> "Grid2":
        h = (hi - lo) / (n - 1)
        return cls(lo, lo, h, h, n, n)

    @classmethod
    def parse(cls, text: str) -> "Grid2":
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 6:
            raise FieldError("grid spec must be u0,v0,hu,hv,nu,nv")
        u0, v0, hu, hv = (float(p) for p in parts[:4])
        return cls(u0, v0, hu, hv, int(parts[4]), int(parts[5]))

    def spec(self) -> str:
        return f"{self.u0!r},{self.v0!r},{self.hu!r},{self.hv!r},{self.nu},{self.nv}"

    @property
    def h(self) -> float:
        return max(self.hu, self.hv)

    @property
    def u(self) -> np.ndarray:
        return self.u0 + self.hu * np.arange(self.nu)

    @property
    def v(self) -> np.ndarray:
        return self.v0 + self.hv * np.arange(self.nv)

    def mesh(self, margin: int = 0) -> tuple[np.ndarray, np.ndarray]:
        """Node coordinates of shape (nu - 2m, nv - 2m), indexed [i, j]."""
        m = margin
        if 2 * m >= min(self.nu, self.nv):
            raise BoundaryError("margin leaves no interior nodes")
        return np.meshgrid(self.u[m : self.nu - m], self.v[m : self.nv - m], indexing="ij")

    def index_of(self, u, v, margin: int = 0) -> tuple[np.ndarray, np.ndarray]:
        """Grid indices of nodes (u, v); errors off-node or within ``margin`` of the border."""
        fi = (np.asarray(u, dtype=float) - self.u0) / self.hu
        fj = (np.asarray(v, dtype=float) - self.v0) / self.hv
        i = np.rint(fi).astype(int)
        j = np.rint(fj).astype(int)
        if np.any(np.abs(fi - i) > 1e-6) or np.any(np.abs(fj - j) > 1e-6):
            raise FieldError("sampled fields are only queried at grid nodes")
        if np.any(i < 0) or np.any(i >= self.nu) or np.any(j < 0) or np.any(j >= self.nv):
            raise FieldError("query outside the grid")
        if np.any(i < margin) or np.any(i >= self.nu - margin) or np.any(j < margin) or np.any(j >= self.nv - margin):
            raise BoundaryError(f"query within {margin} cells of the grid boundary")
        return i, j


def sampled_tol(grid: Grid2) -> float:
    """Default comparison tolerance for quantities derived from samples on ``grid``."""
    return max(1e-6, 10.0 * grid.h**2)


class ScalarField(Protocol):
    def jet(self, u, v) -> Jet2: ...

    def deriv_jets(self, u, v) -> Jet2: ...


@dataclass(frozen=True)
class AnalyticField:
    """Scalar field given by an expression and parameter bindings."""

    expr: Expr
    params: Mapping[str, float] = field(default_factory=dict)
    source: str = ""

    @classmethod
    def from_string(cls, text: str, params: Mapping[str, float] | None = None) -> "AnalyticField":
        return cls(parse(text), dict(params or {}), text)

    def value(self, u, v):
        r = evaluate(self.expr, u, v, self.params)
        return np.broadcast_to(np.asarray(r, dtype=float), np.broadcast(np.asarray(u), np.asarray(v)).shape) + 0.0

    def jet(self, u, v) -> Jet2:
        return eval_jet2(self.expr, u, v, self.params)

    def deriv_jets(self, u, v) -> Jet2:
        return eval_jet2_nested(self.expr, u, v, self.params)

    def sample(self, grid: Grid2) -> "SampledField":
        U, V = grid.mesh()
        return SampledField(grid, self.value(U, V))


def _d1(a: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Five-point first derivative; the two outer layers on each side are NaN."""
    out = np.full_like(a, np.nan)
    s = [slice(None)] * 2
    def sh(k):
        t = list(s)
        t[axis] = slice(2 + k, a.shape[axis] - 2 + k)
        return a[tuple(t)]
    t = list(s)
    t[axis] = slice(2, a.shape[axis] - 2)
    out[tuple(t)] = (sh(-2) - 8.0 * sh(-1) + 8.0 * sh(1) - sh(2)) / (12.0 * h)
    return out


def _d2(a: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Five-point pure second derivative."""
    out = np.full_like(a, np.nan)
    def sh(k):
        t = [slice(None)] * 2
        t[axis] = slice(2 + k, a.shape[axis] - 2 + k)
        return a[tuple(t)]
    t = [slice(None)] * 2
    t[axis] = slice(2, a.shape[axis] - 2)
    out[tuple(t)] = (-sh(-2) + 16.0 * sh(-1) - 30.0 * sh(0) + 16.0 * sh(1) - sh(2)) / (12.0 * h * h)
    return out


def _duv(a: np.ndarray, hu: float, hv: float) -> np.ndarray:
    """Four-corner mixed derivative (valid one layer in; NaN-padded to the 2-layer margin)."""
    out = np.full_like(a, np.nan)
    out[1:-1, 1:-1] = (a[2:, 2:] - a[2:, :-2] - a[:-2, 2:] + a[:-2, :-2]) / (4.0 * hu * hv)
    out[:2, :] = out[-2:, :] = np.nan
    out[:, :2] = out[:, -2:] = np.nan
    return out


def grid_partials(a: np.ndarray, grid: Grid2) -> tuple[np.ndarray, ...]:
    """(f, f_u, f_v, f_uu, f_uv, f_vv) arrays on the grid, NaN within 2 cells of the border."""
    return (
        a,
        _d1(a, 0, grid.hu),
        _d1(a, 1, grid.hv),
        _d2(a, 0, grid.hu),
        _duv(a, grid.hu, grid.hv),
        _d2(a, 1, grid.hv),
    )


@dataclass(frozen=True, eq=False)
class SampledField:
    """Scalar samples on a grid, ``values[i, j]`` at node (i, j)."""

    grid: Grid2
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.nu, self.grid.nv):
            raise FieldError(f"expected samples of shape {(self.grid.nu, self.grid.nv)}, got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise FieldError("sampled values must be finite")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "_cache", {})

    def _partials(self) -> tuple[np.ndarray, ...]:
        if "p" not in self._cache:
            self._cache["p"] = grid_partials(self.values, self.grid)
        return self._cache["p"]

    def _partials2(self) -> list[tuple[np.ndarray, ...]]:
        if "p2" not in self._cache:
            self._cache["p2"] = [grid_partials(np.nan_to_num(p), self.grid) for p in self._partials()]
        return self._cache["p2"]

    def jet(self, u, v) -> Jet2:
        i, j = self.grid.index_of(u, v, margin=2)
        return _pick(Jet2(*self._partials()), i, j)

    def deriv_jets(self, u, v) -> Jet2:
        """Nested jet from differences of differences; needs 4 cells of margin."""
        i, j = self.grid.index_of(u, v, margin=4)
        return Jet2(*(_pick(Jet2(*p), i, j) for p in self._partials2()))

    def value(self, u, v):
        i, j = self.grid.index_of(u, v)
        return self.values[i, j] + 0.0


def _pick(j: Jet2, i, k) -> Jet2:
    if np.ndim(i) == 0:
        return Jet2(*(float(p[i, k]) for p in j.parts()))
    return Jet2(*(p[i, k] for p in j.parts()))


# Height fields and support functions share the scalar-field machinery; the
# aliases document intent at call sites.
AnalyticHeight = AnalyticField
SampledHeight = SampledField


def height(spec, params: Mapping[str, float] | None = None):
    """Coerce an expression string or a field into a scalar field."""
    if isinstance(spec, str):
        return AnalyticField.from_string(spec, params)
    return spec


@dataclass(frozen=True)
class SupportField:
    """Isotropic support function: tangent planes z = u x + v y - h(u, v)."""

    field: object

    @classmethod
    def from_string(cls, text: str, params: Mapping[str, float] | None = None) -> "SupportField":
        return cls(AnalyticField.from_string(text, params))

    def jet(self, u, v) -> Jet2:
        return self.field.jet(u, v)

    def deriv_jets(self, u, v) -> Jet2:
        return self.field.deriv_jets(u, v)


@dataclass(frozen=True)
class ParamSurface:
    """General parametrization g(u, v) = (g1, g2, g3) from three scalar fields."""

    x: object
    y: object
    z: object

    @classmethod
    def from_strings(cls, x: str, y: str, z: str, params: Mapping[str, float] | None = None) -> "ParamSurface":
        return cls(*(AnalyticField.from_string(s, params) for s in (x, y, z)))

    @classmethod
    def graph(cls, f) -> "ParamSurface":
        return cls(AnalyticField.from_string("u"), AnalyticField.from_string("v"), f)

    def point_jets(self, u, v) -> tuple[Jet2, Jet2, Jet2]:
        return self.x.jet(u, v), self.y.jet(u, v), self.z.jet(u, v)

    def points(self, u, v) -> np.ndarray:
        return np.stack(np.broadcast_arrays(*(np.asarray(j.value) for j in self.point_jets(u, v))), axis=-1)


@dataclass(frozen=True)
class JetSurface:
    """Point surface defined directly by a callable returning three jets."""

    fn: object

    def point_jets(self, u, v) -> tuple[Jet2, Jet2, Jet2]:
        return self.fn(u, v)


def jet_at(f, u, v) -> Jet2:
    """Second-order jet of a height or support field at (u, v)."""
    return f.jet(u, v)


def top_view(p) -> np.ndarray:
    """Orthogonal projection (x, y, z) -> (x, y)."""
    return np.asarray(p, dtype=float)[..., :2]


def iso_distance(p, q) -> np.ndarray | float:
    """Isotropic distance: Euclidean distance of the top views."""
    d = top_view(p) - top_view(q)
    r = np.hypot(d[..., 0], d[..., 1])
    return float(r) if np.ndim(r) == 0 else r


# ---------------------------------------------------------------- CSV


_HEADER = ["u0", "v0", "hu", "hv", "nu", "nv"]


def format_csv(f: SampledField) -> str:
    """Header row with the grid values ``u0,v0,hu,hv,nu,nv``, then nv rows of nu values."""
    g = f.grid
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([repr(g.u0), repr(g.v0), repr(g.hu), repr(g.hv), g.nu, g.nv])
    for j in range(g.nv):
        w.writerow([repr(float(x)) for x in f.values[:, j]])
    return buf.getvalue()


def write_csv(f: SampledField, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(format_csv(f))


def read_csv(path) -> SampledField:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if rows and [c.strip() for c in rows[0]] == _HEADER:
        rows = rows[1:]  # optional row of column names
    if not rows:
        raise FieldError("CSV must start with a u0,v0,hu,hv,nu,nv header row")
    grid = Grid2.parse(",".join(rows[0]))
    data = rows[1:]
    if len(data) != grid.nv or any(len(r) != grid.nu for r in data):
        raise FieldError("CSV body must hold nv rows of nu values")
    vals = np.array([[float(x) for x in r] for r in data]).T
    return SampledField(grid, vals)


@dataclass(frozen=True)
class LinearField:
    """Linear combination sum(c_k * field_k) of scalar fields."""

    terms: tuple

    def _combine(self, method: str, u, v):
        out = None
        for c, f in self.terms:
            j = getattr(f, method)(u, v)
            out = j * c if out is None else out + j * c
        return out

    def jet(self, u, v) -> Jet2:
        return self._combine("jet", u, v)

    def deriv_jets(self, u, v) -> Jet2:
        return self._combine("deriv_jets", u, v)

    def value(self, u, v):
        return self.jet(u, v).value


def combine(*pairs) -> LinearField:
    """``combine((1, f), (t, g))`` is the field f + t g."""
    return LinearField(tuple((float(c), f) for c, f in pairs))


# ---------------------------------------------------------------- path integration


def _cumtrap(g: np.ndarray, dg: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Cumulative trapezoid with the Euler-Maclaurin end correction -h^2/12 (g'(x) - g'(x0))."""
    g = np.moveaxis(g, axis, 0)
    dg = np.moveaxis(dg, axis, 0)
    out = np.zeros_like(g)
    out[1:] = np.cumsum(0.5 * h * (g[1:] + g[:-1]), axis=0)
    out -= h * h / 12.0 * (dg - dg[:1])
    return np.moveaxis(out, 0, axis)


def integrate_gradient(P, Q, Pu, Qv, hu: float, hv: float) -> tuple[np.ndarray, float]:
    """Integrate c with c_u = P, c_v = Q over node arrays (nu, nv), c[0, 0] = 0.

    Primary path: along the first column (i = 0) in v, then along each row in
    u.  The closure residual is the max difference to the alternate path
    (first row in u, then columns in v).  ``Pu`` and ``Qv`` are the
    derivatives along the paths, used for the O(h^4) end correction.
    """
    P, Q, Pu, Qv = (np.asarray(a, dtype=float) for a in (P, Q, Pu, Qv))
    if not all(np.all(np.isfinite(a)) for a in (P, Q, Pu, Qv)):
        raise BoundaryError("gradient data contains NaN (too close to the sampled-grid boundary)")
    col = _cumtrap(Q[0, :], Qv[0, :], hv, 0)
    c1 = col[None, :] + _cumtrap(P, Pu, hu, 0)
    row = _cumtrap(P[:, 0], Pu[:, 0], hu, 0)
    c2 = row[:, None] + _cumtrap(Q, Qv, hv, 1)
    return c1, float(np.max(np.abs(c1 - c2)))
