"""Discrete nets on Z^2 combinatorics.

A net is an (nu, nv, 3) vertex array; face (i, j) has the corners
X[i, j], X[i+1, j], X[i+1, j+1], X[i, j+1] in this order.  The metric dual of
a net with planar (non-vertical) faces has one vertex per face, so every nu
application shrinks the index range by one in each direction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DiscreteError(ValueError):
    pass


class DegenerateFaceError(DiscreteError):
    def __init__(self, msg: str, face=None):
        super().__init__(msg)
        self.face = face


class KoenigsError(DiscreteError):
    """Propagation of a Koenigs dual ran into an inconsistent face."""

    def __init__(self, face: tuple[int, int], residual: float):
        super().__init__(f"no Koenigs dual: face {face} inconsistent, residual {residual:.3e}")
        self.face = face
        self.residual = residual


@dataclass(frozen=True)
class QuadNet:
    X: np.ndarray

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        if X.ndim != 3 or X.shape[2] not in (2, 3) or X.shape[0] < 2 or X.shape[1] < 2:
            raise DiscreteError(f"a net needs shape (nu>=2, nv>=2, 3), got {X.shape}")
        if X.shape[2] == 2:
            X = np.concatenate([X, np.zeros(X.shape[:2] + (1,))], axis=2)
        X.setflags(write=False)
        object.__setattr__(self, "X", X)

    @property
    def shape(self) -> tuple[int, int]:
        return self.X.shape[:2]

    def faces(self) -> np.ndarray:
        """Corner array of shape (nu-1, nv-1, 4, 3)."""
        return face_corners(self.X)

    def edges_i(self) -> np.ndarray:
        return self.X[1:, :] - self.X[:-1, :]

    def edges_j(self) -> np.ndarray:
        return self.X[:, 1:] - self.X[:, :-1]

    def star(self, i: int, j: int) -> np.ndarray:
        """Neighbours of vertex (i, j) in the order +i, +j, -i, -j (interior vertices only)."""
        nu, nv = self.shape
        if not (0 < i < nu - 1 and 0 < j < nv - 1):
            raise DiscreteError(f"vertex ({i}, {j}) has no full star")
        X = self.X
        return np.stack([X[i + 1, j], X[i, j + 1], X[i - 1, j], X[i, j - 1]])

    def top_view(self) -> np.ndarray:
        return self.X[..., :2]

    def interior(self, k: int = 1) -> "QuadNet":
        return QuadNet(self.X[k:-k, k:-k])

    def to_json(self) -> dict:
        nu, nv = self.shape
        return {"nu": nu, "nv": nv, "vertices": self.X.reshape(-1).tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "QuadNet":
        nu, nv = int(data["nu"]), int(data["nv"])
        flat = np.asarray(data["vertices"], dtype=float)
        if flat.size != nu * nv * 3:
            raise DiscreteError(f"expected {nu * nv * 3} coordinates, got {flat.size}")
        return cls(flat.reshape(nu, nv, 3))


def face_corners(X: np.ndarray) -> np.ndarray:
    return np.stack([X[:-1, :-1], X[1:, :-1], X[1:, 1:], X[:-1, 1:]], axis=-2)


def _as_net(N) -> np.ndarray:
    return N.X if isinstance(N, QuadNet) else np.asarray(N, dtype=float)


# ---------------------------------------------------------------- planarity


def planarity_residual(quads: np.ndarray) -> np.ndarray:
    """|det(e1, e2, e3)| / size^3 for corner arrays (..., 4, 3), size = longest edge from corner 1."""
    e = quads[..., 1:, :] - quads[..., :1, :]
    size = np.max(np.linalg.norm(e, axis=-1), axis=-1)
    det = np.linalg.det(e)
    return np.abs(det) / np.maximum(size, 1e-300) ** 3


def is_qnet(N, tol: float = 1e-10) -> tuple[bool, np.ndarray]:
    res = planarity_residual(face_corners(_as_net(N)))
    return bool(np.all(res <= tol)), res


def face_planes(quads: np.ndarray, tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares planes z = a x + b y + c of faces (..., 4, 3).

    Returns the (..., 3) coefficients and the max vertical distance of the
    corners from the fitted plane.  Faces with a degenerate top view (vertical
    planes) raise.
    """
    x, y, z = quads[..., 0], quads[..., 1], quads[..., 2]
    xc, yc, zc = (np.mean(w, axis=-1, keepdims=True) for w in (x, y, z))
    dx, dy, dz = x - xc, y - yc, z - zc
    sxx, sxy, syy = (np.sum(p * q, axis=-1) for p, q in ((dx, dx), (dx, dy), (dy, dy)))
    sxz, syz = np.sum(dx * dz, axis=-1), np.sum(dy * dz, axis=-1)
    det = sxx * syy - sxy * sxy
    scale = np.maximum(sxx + syy, 1e-300)
    bad = det <= tol * scale * scale
    if np.any(bad):
        idx = tuple(int(k) for k in np.argwhere(bad)[0])
        raise DegenerateFaceError(f"face {idx} has a degenerate top view (vertical plane)", idx)
    a = (sxz * syy - syz * sxy) / det
    b = (syz * sxx - sxz * sxy) / det
    c = zc[..., 0] - a * xc[..., 0] - b * yc[..., 0]
    fit = np.abs(z - (a[..., None] * x + b[..., None] * y + c[..., None]))
    return np.stack([a, b, c], axis=-1), np.max(fit, axis=-1)


def net_dual_nu(N) -> QuadNet:
    """Metric dual nu(N): the vertex of face (i, j) is nu(plane) = (b, -a, c)."""
    planes, _ = face_planes(face_corners(_as_net(N)))
    a, b, c = np.moveaxis(planes, -1, 0)
    return QuadNet(np.stack([b, -a, c], axis=-1))


def net_L(N) -> QuadNet:
    """Apply L: (x, y, z) -> (y, -x, -z) to every vertex."""
    X = _as_net(N)
    return QuadNet(np.stack([X[..., 1], -X[..., 0], -X[..., 2]], axis=-1))


# ---------------------------------------------------------------- mixed area


def _det2(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    return p[..., 0] * q[..., 1] - p[..., 1] * q[..., 0]


def mixed_area(P, Q) -> np.ndarray | float:
    """Mixed area 1/4 sum det(p_i, q_{i+1}) + det(q_i, p_{i+1}) of quads (..., 4, 2)."""
    P = np.asarray(P, dtype=float)[..., :2]
    Q = np.asarray(Q, dtype=float)[..., :2]
    if P.shape[-2] != 4 or Q.shape[-2] != 4:
        raise DiscreteError("mixed_area expects quadrilaterals with 4 vertices")
    P1 = np.roll(P, -1, axis=-2)
    Q1 = np.roll(Q, -1, axis=-2)
    out = 0.25 * np.sum(_det2(P, Q1) + _det2(Q, P1), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def quad_area(P) -> np.ndarray | float:
    return mixed_area(P, P)


# ---------------------------------------------------------------- Koenigs duality


def parallel_residual(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Sine of the angle between x and y (zero vectors count as parallel)."""
    nx, ny = np.linalg.norm(x, axis=-1), np.linalg.norm(y, axis=-1)
    if x.shape[-1] == 2:
        cr = np.abs(_det2(x, y))
    else:
        cr = np.linalg.norm(np.cross(x, y), axis=-1)
    den = nx * ny
    return np.where(den > 1e-300, cr / np.where(den > 1e-300, den, 1.0), 0.0)


def koenigs_face_residual(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Per-face max over the four edge and two swapped-diagonal parallelism residuals."""
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    eP = np.roll(P, -1, axis=-2) - P
    eQ = np.roll(Q, -1, axis=-2) - Q
    r_edges = np.max(parallel_residual(eP, eQ), axis=-1)
    d1 = parallel_residual(P[..., 2, :] - P[..., 0, :], Q[..., 3, :] - Q[..., 1, :])
    d2 = parallel_residual(P[..., 3, :] - P[..., 1, :], Q[..., 2, :] - Q[..., 0, :])
    return np.maximum(r_edges, np.maximum(d1, d2))


def koenigs_check(A, B, tol: float = 1e-9) -> tuple[bool, np.ndarray]:
    """Koenigs duality test for two nets (or two face arrays (..., 4, d))."""
    if isinstance(A, QuadNet) or np.ndim(A) == 3:
        a, b = _as_net(A), _as_net(B)
        if a.shape != b.shape:
            raise DiscreteError("nets must share combinatorics")
        P, Q = face_corners(a), face_corners(b)
    else:
        P, Q = np.asarray(A, dtype=float), np.asarray(B, dtype=float)
    res = koenigs_face_residual(P, Q)
    return bool(np.all(res <= tol)), res


def _lstsq2(c1: np.ndarray, c2: np.ndarray, rhs: np.ndarray, what: str) -> tuple[float, float]:
    M = np.stack([c1, c2], axis=-1)
    G = M.T @ M
    dg = np.linalg.det(G)
    if abs(dg) <= 1e-14 * max(np.trace(G), 1e-300) ** 2:
        raise DegenerateFaceError(f"degenerate face: {what}")
    return tuple(np.linalg.solve(G, M.T @ rhs))


def koenigs_face(a: np.ndarray, q1: np.ndarray, q2: np.ndarray) -> tuple[np.ndarray, float]:
    """Koenigs dual of the planar quad a (4, d) with first edge q1 q2 given.

    q4 lies on q1 + mu (a4 - a1) with q2 q4 parallel to a1 a3; q3 lies on
    q2 + nu (a3 - a2) with q1 q3 parallel to a2 a4.  Returns the quad and the
    residual of the remaining condition q4 q3 parallel to a4 a3.
    """
    a1, a2, a3, a4 = a
    mu, _ = _lstsq2(a4 - a1, -(a3 - a1), q2 - q1, "edge a1a4 parallel to diagonal a1a3")
    q4 = q1 + mu * (a4 - a1)
    nu, _ = _lstsq2(a3 - a2, -(a4 - a2), q1 - q2, "edge a2a3 parallel to diagonal a2a4")
    q3 = q2 + nu * (a3 - a2)
    q = np.stack([q1, q2, q3, q4])
    res = float(parallel_residual(q3 - q4, a3 - a4))
    return q, res


def koenigs_dual_quad(P: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """Koenigs dual of a single quad with q1 = p1 and q2 - q1 = scale (p2 - p1)."""
    P = np.asarray(P, dtype=float)
    q, _ = koenigs_face(P, P[0], P[0] + scale * (P[1] - P[0]))
    return q


def koenigs_dualize(A, seed=None, scale: float = 1.0, tol: float = 1e-9) -> QuadNet:
    """Propagate a Koenigs dual face by face (row-major over faces).

    The dual is fixed by ``seed`` (vertex (0, 0)) and by ``scale`` on the first
    edge.  Re-entrant vertices are compared against their earlier values; the
    first mismatch above ``tol`` (relative to the local edge length) raises
    :class:`KoenigsError` naming the face.
    """
    X = _as_net(A)
    ok, res = is_qnet(X, 1e-8)
    if not ok:
        raise DiscreteError(f"not a Q-net: max planarity residual {float(np.max(res)):.3e}")
    nu, nv = X.shape[:2]
    Q = np.full_like(X, np.nan)
    Q[0, 0] = X[0, 0] if seed is None else np.asarray(seed, dtype=float)
    Q[1, 0] = Q[0, 0] + scale * (X[1, 0] - X[0, 0])
    for i in range(nu - 1):
        for j in range(nv - 1):
            a = np.stack([X[i, j], X[i + 1, j], X[i + 1, j + 1], X[i, j + 1]])
            if not np.any(np.isnan(Q[i + 1, j])):
                q, r = koenigs_face(a, Q[i, j], Q[i + 1, j])
            else:
                qt, r = koenigs_face(a[[0, 3, 2, 1]], Q[i, j], Q[i, j + 1])
                q = qt[[0, 3, 2, 1]]
            h = max(np.max(np.linalg.norm(np.diff(q, axis=0), axis=1)), 1e-300)
            worst = r
            for (di, dj), qk in zip(((1, 0), (1, 1), (0, 1)), q[1:]):
                old = Q[i + di, j + dj]
                if not np.any(np.isnan(old)):
                    worst = max(worst, float(np.linalg.norm(old - qk)) / h)
                else:
                    Q[i + di, j + dj] = qk
            if worst > tol:
                raise KoenigsError((i, j), worst)
    return QuadNet(Q)


def homothety_residual(A, B) -> tuple[float, float, np.ndarray]:
    """Best fit B ~ s A + t; returns (relative max residual, s, t)."""
    a, b = _as_net(A), _as_net(B)
    a, b = a.reshape(-1, a.shape[-1]), b.reshape(-1, b.shape[-1])
    ac, bc = a - a.mean(axis=0), b - b.mean(axis=0)
    s = float(np.sum(ac * bc) / max(np.sum(ac * ac), 1e-300))
    t = b.mean(axis=0) - s * a.mean(axis=0)
    r = np.max(np.linalg.norm(b - (s * a + t), axis=1))
    return float(r / max(np.max(np.linalg.norm(bc, axis=1)), 1e-300)), s, t


# ---------------------------------------------------------------- infinitesimal flexibility


@dataclass
class FlexFitReport:
    topview: float
    mixed: np.ndarray
    motion: np.ndarray
    v_planarity: np.ndarray
    D: np.ndarray
    c: np.ndarray
    ok: bool
    notes: list[str] = field(default_factory=list)

    def summary(self) -> dict[str, float]:
        return {
            "topview": self.topview,
            "mixed_area": float(np.max(np.abs(self.mixed))) if self.mixed.size else 0.0,
            "face_motion": float(np.max(self.motion)) if self.motion.size else 0.0,
            "v_planarity": float(np.max(self.v_planarity)) if self.v_planarity.size else 0.0,
        }


def fit_face_motions(F, V) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Least-squares isotropic face motions V_k = D + T F_k with T of the (c1, c2, c3) pattern.

    Unknowns per face are (D1, D2, D3, c1, c2, c3); the twelve equations are
    V_x = D1 + c3 y, V_y = D2 - c3 x, V_z = D3 + c1 x + c2 y at the corners.
    Returns D (..., 3), c (..., 3) and the max corner residual per face.
    """
    Fq, Vq = face_corners(_as_net(F)), face_corners(_as_net(V))
    x, y = Fq[..., 0], Fq[..., 1]
    one, zero = np.ones_like(x), np.zeros_like(x)
    rows_x = np.stack([one, zero, zero, zero, zero, y], axis=-1)
    rows_y = np.stack([zero, one, zero, zero, zero, -x], axis=-1)
    rows_z = np.stack([zero, zero, one, x, y, zero], axis=-1)
    M = np.concatenate([rows_x, rows_y, rows_z], axis=-2)
    rhs = np.concatenate([Vq[..., 0], Vq[..., 1], Vq[..., 2]], axis=-1)
    sol = np.einsum("...ij,...j->...i", np.linalg.pinv(M), rhs)
    resid = np.abs(np.einsum("...ij,...j->...i", M, sol) - rhs)
    return sol[..., :3], sol[..., 3:], np.max(resid, axis=-1)


def T_matrix(c: np.ndarray) -> np.ndarray:
    """Velocity matrix [[0, c3, 0], [-c3, 0, 0], [c1, c2, 0]]."""
    c1, c2, c3 = np.moveaxis(np.asarray(c, dtype=float), -1, 0)
    z = np.zeros_like(c1)
    return np.stack(
        [np.stack([z, c3, z], -1), np.stack([-c3, z, z], -1), np.stack([c1, c2, z], -1)], axis=-2
    )


def discrete_flex_fit(F, V, tol: float = 1e-9) -> FlexFitReport:
    """Check the three conditions of discrete infinitesimal flexibility of F with diagram V."""
    Fx, Vx = _as_net(F), _as_net(V)
    if Fx.shape != Vx.shape:
        raise DiscreteError("F and V must share combinatorics")
    notes = []
    LV = net_L(Vx).X
    size = max(float(np.ptp(Fx[..., :2])), 1e-300)
    topview = float(np.max(np.abs(LV[..., :2] - Fx[..., :2]))) / size
    D, c, motion = fit_face_motions(Fx, Vx)
    motion = motion / size
    _, vplan = is_qnet(Vx)
    mixed = np.zeros((0,))
    if min(Fx.shape[:2]) >= 3:
        try:
            LB = net_dual_nu(Fx).X
            Cb = net_dual_nu(LV).X
            b, cq = face_corners(LB), face_corners(Cb)
            ab = np.abs(quad_area(b))
            ac = np.abs(quad_area(cq))
            mixed = np.asarray(mixed_area(b, cq)) / np.maximum(np.sqrt(ab * ac), 1e-300)
        except DegenerateFaceError as exc:
            notes.append(f"dual nets unavailable: {exc}")
            mixed = np.array([np.inf])
    else:
        notes.append("net too small for dual faces")
    ok = (
        topview <= tol
        and bool(np.all(motion <= tol))
        and bool(np.all(np.abs(mixed) <= tol))
    )
    return FlexFitReport(topview, mixed, motion, vplan, D, c, ok, notes)


def velocity_from_heights(F, n) -> QuadNet:
    """Velocity diagram V = (-y, x, n) over the vertices of F."""
    X = _as_net(F)
    return QuadNet(np.stack([-X[..., 1], X[..., 0], np.asarray(n, dtype=float)], axis=-1))


# ---------------------------------------------------------------- Voss nets


def tangent_line_topview(theta1, theta2) -> np.ndarray:
    """Grid of intersections of tangents to the unit circle at angles theta1[i], theta2[j].

    Polylines with fixed i lie on the tangent at theta1[i] and vice versa.
    """
    t1 = np.asarray(theta1, dtype=float)[:, None]
    t2 = np.asarray(theta2, dtype=float)[None, :]
    half = np.cos(0.5 * (t1 - t2))
    if np.any(np.abs(half) < 1e-12):
        raise DiscreteError("parallel tangent lines")
    m = 0.5 * (t1 + t2)
    return np.stack([np.cos(m) / half, np.sin(m) / half], axis=-1)


def lines_topview(lines1, lines2) -> np.ndarray:
    """Intersections P[i, j] of lines1[i] and lines2[j], each line (a, b, c) meaning a x + b y = c."""
    L1 = np.asarray(lines1, dtype=float)[:, None, :]
    L2 = np.asarray(lines2, dtype=float)[None, :, :]
    det = L1[..., 0] * L2[..., 1] - L1[..., 1] * L2[..., 0]
    if np.any(np.abs(det) < 1e-14):
        raise DiscreteError("parallel lines in different families")
    x = (L1[..., 2] * L2[..., 1] - L1[..., 1] * L2[..., 2]) / det
    y = (L1[..., 0] * L2[..., 2] - L1[..., 2] * L2[..., 0]) / det
    return np.stack([x, y], axis=-1)


def collinearity_residual(P: np.ndarray) -> tuple[float, float]:
    """Max normalized deviation from straightness of the i- and j-polylines of a top view."""

    def along(Q):
        d = Q[1:] - Q[:-1]
        first = d[:1]
        return float(np.max(parallel_residual(np.broadcast_to(first, d.shape), d)))

    ri = max(along(P[:, j]) for j in range(P.shape[1]))
    rj = max(along(P[i, :]) for i in range(P.shape[0]))
    return ri, rj


def voss_construct(P, z_row, z_col, tol: float = 1e-9) -> QuadNet:
    """Fill heights over a top view with straight parameter polylines by face planarity.

    ``z_row[i]`` are heights at (i, 0), ``z_col[j]`` at (0, j).  Each face
    plane is fixed by three known corners; the fourth height follows.
    """
    P = np.asarray(P, dtype=float)
    nu, nv = P.shape[:2]
    z_row = np.asarray(z_row, dtype=float)
    z_col = np.asarray(z_col, dtype=float)
    if z_row.shape != (nu,) or z_col.shape != (nv,):
        raise DiscreteError(f"Cauchy data must have lengths {nu} and {nv}")
    if abs(z_row[0] - z_col[0]) > tol * max(1.0, abs(z_row[0])):
        raise DiscreteError("inconsistent Cauchy data at vertex (0, 0)")
    ri, rj = collinearity_residual(P)
    if max(ri, rj) > tol:
        raise DiscreteError(f"top-view parameter polylines are not straight (residual {max(ri, rj):.3e})")
    Z = np.full((nu, nv), np.nan)
    Z[:, 0] = z_row
    Z[0, :] = z_col
    scale = max(float(np.ptp(P)), 1e-300)
    for i in range(nu - 1):
        for j in range(nv - 1):
            p1, p2, p4, p3 = P[i, j], P[i + 1, j], P[i, j + 1], P[i + 1, j + 1]
            for tri in ((p1, p2, p4), (p2, p3, p4), (p1, p3, p4), (p1, p2, p3)):
                if abs(_det2(tri[1] - tri[0], tri[2] - tri[0])) <= 1e-12 * scale * scale:
                    raise DegenerateFaceError(f"face ({i}, {j}) has collinear top-view corners", (i, j))
            A = np.array([[p1[0], p1[1], 1.0], [p2[0], p2[1], 1.0], [p4[0], p4[1], 1.0]])
            abc = np.linalg.solve(A, np.array([Z[i, j], Z[i + 1, j], Z[i, j + 1]]))
            Z[i + 1, j + 1] = abc[0] * p3[0] + abc[1] * p3[1] + abc[2]
    return QuadNet(np.concatenate([P, Z[..., None]], axis=-1))


def translational_residual(N) -> float:
    """How far the net is from X[i, j] = A[i] + B[j] (relative, max over vertices)."""
    X = _as_net(N)
    fit = X[:, :1] + X[:1, :] - X[:1, :1]
    return float(np.max(np.linalg.norm(X - fit, axis=-1))) / max(float(np.ptp(X)), 1e-300)


def combescure_scale(N, t: float) -> QuadNet:
    """Scale i-edges by t and j-edges by 1/t of a translational net, keeping vertex (0, 0)."""
    if t <= 0:
        raise DiscreteError("Combescure factor must be positive")
    X = _as_net(N)
    o = X[:1, :1]
    return QuadNet(o + t * (X[:, :1] - o) + (X[:1, :] - o) / t)


def _translational_parts(F, tol: float):
    LB = net_dual_nu(F).X
    r = translational_residual(LB)
    if r > tol:
        raise DiscreteError(f"dual net is not translational (residual {r:.3e}); input is not a Voss net")
    o = LB[0, 0]
    A, B = LB[:, 0] - o, LB[0, :] - o
    # face gradients from the exact edge directions: independent of t
    n = np.cross(np.diff(A, axis=0)[:, None, :], np.diff(B, axis=0)[None, :, :])
    if np.any(np.abs(n[..., 2]) <= 1e-14 * np.linalg.norm(n, axis=-1)):
        raise DegenerateFaceError("vertical face in the dual translational net")
    a, b = -n[..., 0] / n[..., 2], -n[..., 1] / n[..., 2]
    return o, A, B, a, b


def _face_mean(X: np.ndarray) -> np.ndarray:
    return 0.25 * (X[:-1, :-1] + X[1:, :-1] + X[1:, 1:] + X[:-1, 1:])


def voss_flex(F, t: float, tol: float = 1e-8) -> QuadNet:
    """Isometric member F(t) of the Voss family, defined on the interior vertices of F.

    nu(F) is a translational net A[i] + B[j]; scaling the two edge families by
    t and 1/t keeps every face-plane direction, so dualizing back keeps the top
    view and only changes heights.
    """
    if t <= 0:
        raise DiscreteError("Combescure factor must be positive")
    o, A, B, a, b = _translational_parts(F, tol)
    LBt = o + t * A[:, None, :] + B[None, :, :] / t
    m = _face_mean(LBt)
    c = m[..., 2] - a * m[..., 0] - b * m[..., 1]
    return QuadNet(np.stack([b, -a, c], axis=-1))


def voss_velocity(F, tol: float = 1e-8) -> QuadNet:
    """Velocity diagram (-y, x, dz/dt at t = 1) of the Voss flex on the interior vertices of F."""
    o, A, B, a, b = _translational_parts(F, tol)
    m = _face_mean(A[:, None, :] - B[None, :, :])
    ndot = m[..., 2] - a * m[..., 0] - b * m[..., 1]
    X = voss_flex(F, 1.0, tol).X
    return velocity_from_heights(X, ndot)


def dihedral_jumps(N) -> tuple[np.ndarray, np.ndarray]:
    """Slope jumps (gradient differences) of adjacent face planes.

    ``ji[i, j]`` belongs to the edge X[i, j+1] X[i+1, j+1] between faces (i, j)
    and (i, j+1); it is constant along i for a Voss net.  ``jj`` is the
    transposed counterpart, constant along j.
    """
    planes, _ = face_planes(face_corners(_as_net(N)))
    g = planes[..., :2]
    return g[:, 1:] - g[:, :-1], g[1:, :] - g[:-1, :]


def polyline_spread(jumps: np.ndarray, axis: int) -> float:
    """Max spread of the iso angle |jump| along ``axis`` (per polyline)."""
    m = np.linalg.norm(jumps, axis=-1)
    return float(np.max(np.ptp(m, axis=axis))) if m.size else 0.0


# ---------------------------------------------------------------- discrete Minding model


@dataclass(frozen=True)
class Rulings:
    """Sequence of lines p_k + s e_k with unit top view of e_k."""

    points: np.ndarray
    dirs: np.ndarray

    def __post_init__(self):
        p = np.array(self.points, dtype=float)
        e = np.array(self.dirs, dtype=float)
        if p.shape != e.shape or p.ndim != 2 or p.shape[1] != 3:
            raise DiscreteError("rulings need matching (m, 3) point and direction arrays")
        n = np.hypot(e[:, 0], e[:, 1])
        if np.any(n < 1e-12):
            raise DiscreteError("isotropic ruling direction")
        e = e / n[:, None]
        p.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "dirs", e)

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class MindingInvariants:
    s: np.ndarray  # top-view intersection of rulings k, k+1
    d: np.ndarray  # vertical distance of the rulings above s
    phi: np.ndarray  # signed top-view angle from e_k to e_{k+1}
    rho: np.ndarray
    tstar: np.ndarray  # parameter of s on ruling k


def _meet(p, e, q, f) -> np.ndarray:
    """Parameters (a, b) with p~ + a e~ = q~ + b f~."""
    det = _det2(e, f)
    if np.any(np.abs(det) < 1e-14):
        raise DiscreteError("parallel consecutive top-view rulings (type III step)")
    r = q[..., :2] - p[..., :2]
    return _det2(r, f) / det, _det2(r, e) / det


def minding_invariants(R: Rulings) -> MindingInvariants:
    p, e = R.points, R.dirs
    a, b = _meet(p[:-1], e[:-1, :2], p[1:], e[1:, :2])
    s = p[:-1, :2] + a[:, None] * e[:-1, :2]
    z0 = p[:-1, 2] + a * e[:-1, 2]
    z1 = p[1:, 2] + b * e[1:, 2]
    phi = np.arctan2(_det2(e[:-1, :2], e[1:, :2]), np.sum(e[:-1, :2] * e[1:, :2], axis=1))
    d = z1 - z0
    return MindingInvariants(s, d, phi, d / phi, a)


def minding_K(R: Rulings, k: int, t: float) -> float:
    """K = -rho_k^2 / w^4 at the point p_k + t e_k, w its distance to the striction point."""
    inv = minding_invariants(R)
    w = abs(t - inv.tstar[k])
    if w < 1e-14:
        raise DiscreteError("point coincides with the striction point")
    return float(-inv.rho[k] ** 2 / w**4)


def shear_rulings(R: Rulings, alpha: float, beta: float, gamma: float, mask=None) -> Rulings:
    """Add z += alpha x + beta y + gamma to the selected rulings."""
    p, e = R.points.copy(), R.dirs.copy()
    sel = np.ones(len(R), dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    p[sel, 2] += alpha * p[sel, 0] + beta * p[sel, 1] + gamma
    e[sel, 2] += alpha * e[sel, 0] + beta * e[sel, 1]
    return Rulings(p, e)


def discrete_minding_shear(R: Rulings, coeffs) -> Rulings:
    """Hinge shears: step k adds coeffs[k] * (signed top-view distance to ruling k) to rulings j > k.

    The added linear function vanishes over the top view of ruling k, so the
    vertical distance to ruling k+1 above their intersection is unchanged.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (len(R) - 1,):
        raise DiscreteError(f"need {len(R) - 1} shear coefficients")
    out = R
    idx = np.arange(len(R))
    for k, lam in enumerate(coeffs):
        if lam == 0.0:
            continue
        pk, ek = R.points[k], R.dirs[k]
        nrm = np.array([-ek[1], ek[0]])
        alpha, beta = lam * nrm
        gamma = -lam * (nrm @ pk[:2])
        out = shear_rulings(out, alpha, beta, gamma, idx > k)
    return out


def difference_rulings(R1: Rulings, R2: Rulings) -> Rulings:
    """Rulings of the difference surface over the common top view."""
    if not np.allclose(R1.points[:, :2], R2.points[:, :2]) or not np.allclose(R1.dirs[:, :2], R2.dirs[:, :2]):
        raise DiscreteError("rulings must share top views")
    p = R1.points.copy()
    e = R1.dirs.copy()
    p[:, 2] -= R2.points[:, 2]
    e[:, 2] -= R2.dirs[:, 2]
    return Rulings(p, e)


def coplanarity_residual(R: Rulings) -> np.ndarray:
    """|det(p_{k+1} - p_k, e_k, e_{k+1})| for consecutive rulings (zero: coplanar)."""
    dp = R.points[1:] - R.points[:-1]
    return np.abs(np.einsum("ij,ij->i", dp, np.cross(R.dirs[:-1], R.dirs[1:])))
