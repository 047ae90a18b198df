"""Command-line front end: scene files, OBJ/CSV/JSON export and the ``verify`` suite.

Exit codes: 0 success, 1 validation failure (bad geometry, residual above
tolerance, non-finite output), 2 usage error (bad flags, unreadable scene,
unparsable expression or grid).  Messages go to standard error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import curvature, discrete, duality, isometry, minkowski, wreath
from .expr import ExprSyntaxError, evaluate, parse
from .fields import AnalyticField, FieldError, Grid2, SampledField, format_csv, read_csv

DEFAULT_GRID = "-1,-1,0.015625,0.015625,129,129"


class UsageError(Exception):
    pass


class ValidationError(Exception):
    pass


# ---------------------------------------------------------------- export


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def obj_text(points: np.ndarray) -> tuple[str, list[list[int]]]:
    """OBJ text for a (nu, nv, 3) vertex grid: each quad as two triangles; also the quads (1-based)."""
    P = np.asarray(points, dtype=float)
    if P.ndim != 3 or P.shape[2] != 3:
        raise ValidationError(f"mesh must have shape (nu, nv, 3), got {P.shape}")
    if not np.all(np.isfinite(P)):
        raise ValidationError("mesh has non-finite vertex coordinates")
    nu, nv = P.shape[:2]
    lines = [f"v {_fmt(x)} {_fmt(y)} {_fmt(z)}" for x, y, z in P.reshape(-1, 3)]
    quads = []
    for i in range(nu - 1):
        for j in range(nv - 1):
            a, b, c, d = (k + 1 for k in (i * nv + j, (i + 1) * nv + j, (i + 1) * nv + j + 1, i * nv + j + 1))
            quads.append([a, b, c, d])
            lines.append(f"f {a} {b} {c}")
            lines.append(f"f {a} {c} {d}")
    return "\n".join(lines) + "\n", quads


def export_obj(points: np.ndarray, path) -> Path:
    """Write the OBJ and a sidecar ``<path>.quads.json`` holding the quad faces."""
    text, quads = obj_text(points)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    side = path.with_name(path.name + ".quads.json")
    side.write_text(json.dumps({"nu": int(points.shape[0]), "nv": int(points.shape[1]), "quads": quads}) + "\n")
    return path


def export_csv(f: SampledField, path) -> None:
    if not np.all(np.isfinite(f.values)):
        raise ValidationError("field has non-finite samples")
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(format_csv(f))


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


def report_text(report: dict) -> str:
    return json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n"


def report_json(report: dict, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(report_text(report))


# ---------------------------------------------------------------- scenes


@dataclass
class Scene:
    """Options loaded from a JSON scene; keys are option names with dashes as underscores."""

    options: dict = field(default_factory=dict)
    path: str | None = None

    EXPR_KEYS = ("f", "n", "g", "x", "y", "profile", "r", "z")

    @classmethod
    def load(cls, path) -> "Scene":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"cannot read scene {path}: {e}") from e
        if not isinstance(data, dict):
            raise UsageError("scene must be a JSON object")
        opts = {k.replace("-", "_"): v for k, v in data.items()}
        for k in cls.EXPR_KEYS:
            if isinstance(opts.get(k), str):
                _parse_expr(opts[k])
        if "grid" in opts:
            _grid(opts["grid"])
        return cls(opts, str(path))

    def apply(self, args: argparse.Namespace) -> None:
        """Fill options not given on the command line."""
        for k, v in self.options.items():
            if getattr(args, k, None) is None:
                setattr(args, k, v)


def _parse_expr(text: str):
    try:
        return parse(text)
    except ExprSyntaxError as e:
        raise UsageError(f"cannot parse expression {text!r}: {e}") from e


def _grid(spec) -> Grid2:
    try:
        if isinstance(spec, (list, tuple)):
            spec = ",".join(str(x) for x in spec)
        return Grid2.parse(spec or DEFAULT_GRID)
    except (FieldError, ValueError) as e:
        raise UsageError(f"bad grid {spec!r}: {e}") from e


def _params(items) -> dict[str, float]:
    if isinstance(items, dict):
        return {str(k): float(v) for k, v in items.items()}
    out = {}
    for it in items or []:
        name, _, val = str(it).partition("=")
        try:
            out[name.strip()] = float(val)
        except ValueError as e:
            raise UsageError(f"bad parameter binding {it!r} (want name=value)") from e
    return out


def _field(text: str | None, params, what: str) -> AnalyticField:
    if text is None:
        raise UsageError(f"missing --{what}")
    _parse_expr(text)
    return AnalyticField.from_string(text, params)


def _floats(x, what: str) -> list[float]:
    if x is None:
        return []
    if isinstance(x, (int, float)):
        return [float(x)]
    if isinstance(x, str):
        x = x.split(",")
    try:
        return [float(t) for t in x]
    except (TypeError, ValueError) as e:
        raise UsageError(f"bad number list for {what}: {x!r}") from e


def _out_dir(args, default: str) -> Path:
    d = Path(args.out or default)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _graph_points(f, U, V) -> np.ndarray:
    return np.stack([U, V, np.asarray(f.jet(U, V).value, dtype=float) + 0.0 * U], axis=-1)


def _check(report: dict, tol: float) -> int:
    worst = max((float(v) for v in report["residuals"].values()), default=0.0)
    report["max_residual"] = worst
    report["tol"] = tol
    report["ok"] = bool(worst <= tol)
    if not report["ok"]:
        bad = [k for k, v in report["residuals"].items() if float(v) > tol]
        print(f"residuals above tolerance {tol:g}: {', '.join(bad)}", file=sys.stderr)
        return 1
    return 0


def _finish(report: dict, args, out: Path | None, name: str = "report.json") -> int:
    code = _check(report, args.tol)
    if out is not None:
        report_json(report, out / name)
    else:
        sys.stdout.write(report_text(report))
    return code


def _meta(args) -> dict:
    return {"command": args.command, "seed": args.seed, "scene": getattr(args, "scene", None)}


# ---------------------------------------------------------------- commands


def cmd_curvature(args) -> int:
    quantity = args.quantity or "K"
    if args.csv:
        f = read_csv(args.csv)
        grid, margin = f.grid, 2
    else:
        f = _field(args.f, _params(args.param), "f")
        grid, margin = _grid(args.grid), 0
    data = curvature.curvature_grid(f, grid, margin)
    sub = Grid2(grid.u0 + margin * grid.hu, grid.v0 + margin * grid.hv, grid.hu, grid.hv, grid.nu - 2 * margin, grid.nv - 2 * margin)
    names = ["K", "H", "kappa1", "kappa2"] if quantity == "all" else [quantity]
    if quantity == "all" and not args.out:
        raise UsageError("--quantity all needs an --out directory")
    for name in names:
        vals = np.asarray(data[name], dtype=float)
        if not np.all(np.isfinite(vals)):
            raise ValidationError(f"{name} has non-finite values")
        out = SampledField(sub, vals)
        if quantity == "all":
            export_csv(out, Path(args.out) / f"{name}.csv")
        elif args.out:
            export_csv(out, args.out)
        else:
            sys.stdout.write(format_csv(out))
    return 0


def cmd_dual(args) -> int:
    f = _field(args.f, _params(args.param), "f")
    grid = _grid(args.grid)
    U, V = grid.mesh()
    which = args.which or "delta"
    D = duality.dualize_graph(f, which)
    K, H = curvature.graph_KH(f.jet(U, V))
    Kd, Hd = duality.dual_field_curvature(D, U, V)
    rule = duality.dual_curvature_rule(K, H, which)
    res = {
        "K_rule": float(np.max(np.abs(Kd - rule["K"]) / np.maximum(1.0, np.abs(rule["K"])))),
        "H_rule": float(np.max(np.abs(Hd - rule["H"]) / np.maximum(1.0, np.abs(rule["H"])))),
        "tangency": float(np.max(np.abs(duality.tangency_residual(D, U, V)))),
    }
    out = _out_dir(args, "dual_out")
    export_obj(D.values(U, V)[..., :3], out / f"{which}.obj")
    return _finish({"meta": _meta(args), "residuals": res}, args, out)


def cmd_minkowski(args) -> int:
    pr = _params(args.param)
    f, g = _field(args.f, pr, "f"), _field(args.g, pr, "g")
    grid = _grid(args.grid)
    U, V = grid.mesh()
    mode = args.mode or "point"
    t = float(args.t if args.t is not None else 1.0)
    res = minkowski.sum_curvature_check(f, g, t, U, V, mode)
    out = _out_dir(args, "minkowski_out")
    if mode == "point":
        pts = _graph_points(minkowski.sum_point(f, g, t), U, V)
    else:
        pts = duality.surface_from_support(minkowski.sum_plane(f, g, t), U, V)
    export_obj(pts, out / f"sum_{mode}.obj")
    return _finish({"meta": _meta(args), "residuals": res}, args, out)


def _family_assoc(args, out: Path) -> dict:
    pr = _params(args.param)
    grid = _grid(args.grid)
    U, V = grid.mesh()
    x = _field(args.x, pr, "x")
    y = _field(args.y, pr, "y") if args.y else isometry.harmonic_conjugate(x, grid, args.tol)
    ts = _floats(args.t, "t") or [0.0, 0.5, 1.0]
    K0, _ = curvature.graph_KH(isometry.assoc_family(x, y, 0.0).jet(U, V))
    res = {"cauchy_riemann": isometry.cauchy_riemann_residual(x, y, U, V)}
    for t in ts:
        ft = isometry.assoc_family(x, y, t, (U, V), args.tol)
        Kt, _ = curvature.graph_KH(ft.jet(U, V))
        res[f"dK(t={t:g})"] = float(np.max(np.abs(Kt - K0)))
        export_obj(_graph_points(ft, U, V), out / f"assoc_t{t:g}.obj")
    return res


def _family_bour(args, out: Path) -> dict:
    pr = _params(args.param)
    prof = isometry.Profile.from_string(args.profile or "-sin(v)", pr)
    hbar = float(args.hbar if args.hbar is not None else 1.0)
    vr = _floats(args.v_range, "v-range") or [2.1, 3.0]
    if len(vr) != 2:
        raise UsageError("--v-range needs two numbers lo,hi")
    if args.c is None:
        c, _ = isometry.bour_tangency_constant(prof, hbar, (vr[0], vr[1]))
    else:
        c = float(args.c)
    eps = isometry.bour_eps_example if (args.eps or "example") == "example" else None
    fam = isometry.bour_family(prof, hbar, c, (vr[0], vr[1]), eps, tol=min(args.tol, 1e-9))
    nu_ = int(args.n_u or 65)
    u = np.linspace(0.0, 2.0 * np.pi, nu_)
    v = fam.nodes
    U, V = np.meshgrid(u, v, indexing="ij")
    Kh = fam.K(U, V)
    rot = isometry.helical_surface(prof, 0.0)
    Kr, _ = curvature.curvature_param(rot, U, V)
    S = fam.surface()
    pts = np.stack([np.asarray(j.value, dtype=float) + 0.0 * U for j in S.point_jets(U, V)], axis=-1)
    R = np.stack([np.asarray(j.value, dtype=float) + 0.0 * U for j in rot.point_jets(U, V)], axis=-1)
    export_obj(pts, out / "bour_helical.obj")
    export_obj(R, out / "bour_rotational.obj")
    return {"dK": float(np.max(np.abs(Kh - Kr))), "closure": fam.closure}


def _family_parabolic(args, out: Path) -> dict:
    pr = _params(args.param)
    prof = isometry.Profile.from_string(args.profile or "v^3/6", pr)
    a, b = float(args.a if args.a is not None else 1.0), float(args.b if args.b is not None else 0.0)
    abar = float(args.abar if args.abar is not None else 2.0)
    bbar = float(args.bbar if args.bbar is not None else 1.0)
    grid = _grid(args.grid)
    U, V = grid.mesh()
    res = isometry.parabolic_family(prof, a, b, abar, bbar, tol=args.tol)
    F = isometry.parabolic_surface(a, b, prof)
    G = res.surface()
    K1, _ = curvature.graph_KH(F.jet(U, V))
    K2, _ = curvature.graph_KH(G.jet(U, V))
    export_obj(_graph_points(F, U, V), out / "parabolic_input.obj")
    export_obj(_graph_points(G, U, V), out / "parabolic_partner.obj")
    return {"dK": float(np.max(np.abs(K1 - K2)))}


def _family_minding(args, out: Path) -> dict:
    pr = _params(args.param)
    F, R = _field(args.f, pr, "f"), _field(args.r, pr, "r")
    grid = _grid(args.grid)
    U, V = grid.mesh()
    rep = isometry.minding_check(F, R, U, V, args.tol)
    K0, _ = curvature.graph_KH(F.jet(U, V))
    res = {"torsal": rep.torsal, "ruling_mismatch": rep.ruling_mismatch}
    for s in _floats(args.s, "s") or [-1.0, 0.5, 2.0]:
        G = isometry.minding_family(F, R, s, (U, V), args.tol)
        Ks, _ = curvature.graph_KH(G.jet(U, V))
        res[f"dK(s={s:g})"] = float(np.max(np.abs(Ks - K0)))
        export_obj(_graph_points(G, U, V), out / f"minding_s{s:g}.obj")
    return res


def _family_split(args, out: Path) -> dict:
    pr = _params(args.param)
    f, n = _field(args.f, pr, "f"), _field(args.n, pr, "n")
    grid = _grid(args.grid)
    U, V = grid.mesh()
    fp, fm = wreath.split_pair(f, n, (U, V), args.tol)
    Kp, _ = curvature.graph_KH(fp.jet(U, V))
    Km, _ = curvature.graph_KH(fm.jet(U, V))
    export_obj(_graph_points(fp, U, V), out / "split_plus.obj")
    export_obj(_graph_points(fm, U, V), out / "split_minus.obj")
    return {"dK": float(np.max(np.abs(Kp - Km)))}


FAMILIES = {
    "assoc": _family_assoc,
    "bour": _family_bour,
    "parabolic": _family_parabolic,
    "minding": _family_minding,
    "split": _family_split,
}


def cmd_family(args) -> int:
    out = _out_dir(args, f"{args.kind}_out")
    res = FAMILIES[args.kind](args, out)
    return _finish({"meta": _meta(args) | {"kind": args.kind}, "residuals": res}, args, out)


def cmd_wreath(args) -> int:
    pr = _params(args.param)
    f, n = _field(args.f, pr, "f"), _field(args.n, pr, "n")
    grid = _grid(args.grid)
    W = wreath.build_wreath(f, n, grid, args.tol)
    rep = wreath.wreath_report(W)
    out = _out_dir(args, "wreath_out")
    U, V = W.grid.mesh()
    for name, F in W.fields().items():
        export_obj(F.values(U, V)[..., :3], out / f"{name}.obj")
    report = {"meta": _meta(args), "residuals": rep.residuals, "degenerate": rep.degenerate, "notes": rep.notes}
    report["c_closure"] = W.c.closure
    return _finish(report, args, out)


def _planar(spec: str, params) -> wreath.PlanarMap:
    parts = [p.strip() for p in str(spec).split(";")]
    if len(parts) != 2:
        raise UsageError("planar maps are given as 'X;Y' expression pairs")
    X, Y = (_field(p, params, "map") for p in parts)
    return wreath.PlanarMap(lambda u, v: (X.jet(u, v), Y.jet(u, v)))


def cmd_paratactic(args) -> int:
    pr = _params(args.param)
    grid = _grid(args.grid)
    res: dict[str, float] = {}
    if args.left or args.right:
        if not (args.left and args.right):
            raise UsageError("--left and --right go together")
        El, Er = _planar(args.left, pr), _planar(args.right, pr)
        target = None
    else:
        f, n = _field(args.f, pr, "f"), _field(args.n, pr, "n")
        El, Er = wreath.para_wreath_maps(f, n)
        W = wreath.build_wreath(f, n, grid, args.tol)
        target = W.Bbar
    try:
        P = wreath.paratactic_inverse(El, Er, grid, tol=args.tol)
    except wreath.AreaPreservationError as e:
        raise ValidationError(str(e)) from e
    res["closure"] = P.closure
    res["area"] = P.area_residual
    l, r = wreath.paratactic_forward(P.E)
    U, V = grid.mesh()
    L = np.stack([np.asarray(j.value, dtype=float) + 0.0 * U for j in El.jets(U, V)], axis=-1)
    R = np.stack([np.asarray(j.value, dtype=float) + 0.0 * U for j in Er.jets(U, V)], axis=-1)
    res["forward_left"] = float(np.max(np.abs(l - L)))
    res["forward_right"] = float(np.max(np.abs(r - R)))
    if target is not None:
        T = target.values(U, V)
        res["xypq_vs_Bbar"] = float(np.max(np.abs(P.E[..., [0, 1, 3, 4]] - T[..., [0, 1, 3, 4]])))
        res["z_vs_Bbar_spread"] = float(np.ptp(P.E[..., 2] - T[..., 2]))
    out = _out_dir(args, "paratactic_out")
    export_obj(P.E[..., :3], out / "paratactic.obj")
    return _finish({"meta": _meta(args), "residuals": res}, args, out)


# ---- discrete


def _voss_from_scene(opts: dict) -> discrete.QuadNet:
    try:
        t1 = np.linspace(*_floats(opts["theta1"], "theta1"), int(opts.get("nu", 22)))
        t2 = np.linspace(*_floats(opts["theta2"], "theta2"), int(opts.get("nv", 22)))
    except (KeyError, TypeError) as e:
        raise UsageError(f"voss scene needs theta1, theta2 ranges: {e}") from e
    z = parse(str(opts.get("z", "0.3*u^2 - 0.2*v")))
    P = discrete.tangent_line_topview(t1, t2)
    z_row = np.asarray(evaluate(z, t1, t2[0] + 0.0 * t1), dtype=float)
    z_col = np.asarray(evaluate(z, t1[0] + 0.0 * t2, t2), dtype=float)
    return discrete.voss_construct(P, z_row, z_col)


def _load_net(args) -> discrete.QuadNet:
    if args.scene is None:
        raise UsageError(f"discrete {args.kind} needs a scene file")
    opts = Scene.load(args.scene).options
    if "net" in opts:
        data = opts["net"]
    elif "vertices" in opts:
        data = opts
    elif "voss" in opts:
        return _voss_from_scene(opts["voss"])
    else:
        raise UsageError("scene has no 'net', 'vertices' or 'voss' entry")
    try:
        flat = np.asarray(data["vertices"], dtype=float)
    except (KeyError, TypeError, ValueError) as e:
        raise UsageError(f"bad net in scene: {e}") from e
    if not np.all(np.isfinite(flat)):
        raise ValidationError("net has non-finite vertex coordinates")
    return discrete.QuadNet.from_json(data)


def cmd_discrete(args) -> int:
    N = _load_net(args)
    out = _out_dir(args, f"discrete_{args.kind}_out")
    res: dict[str, float] = {}
    extra: dict = {}
    if args.kind == "check":
        ok, r = discrete.is_qnet(N, args.tol)
        res["planarity"] = float(np.max(r)) if r.size else 0.0
        ri, rj = discrete.collinearity_residual(N.top_view())
        extra["straight_topview"] = max(ri, rj)
        extra["translational"] = discrete.translational_residual(N)
    elif args.kind == "voss":
        res["planarity"] = float(np.max(discrete.planarity_residual(N.faces())))
        ji, jj = discrete.dihedral_jumps(N)
        res["dihedral_spread"] = max(discrete.polyline_spread(ji, 0), discrete.polyline_spread(jj, 1))
        export_obj(N.X, out / "voss.obj")
        report_json(N.to_json(), out / "voss_net.json")
    elif args.kind == "flex":
        ts = _floats(args.t, "t")
        if not ts:
            raise UsageError("discrete flex needs --t")
        base = discrete.voss_flex(N, 1.0, args.tol)
        for t in ts:
            Ft = discrete.voss_flex(N, t, args.tol)
            res[f"planarity(t={t:g})"] = float(np.max(discrete.planarity_residual(Ft.faces())))
            res[f"topview(t={t:g})"] = float(np.max(np.abs(Ft.top_view() - base.top_view())))
            export_obj(Ft.X, out / f"flex_t{t:g}.obj")
            report_json(Ft.to_json(), out / f"flex_t{t:g}.json")
    elif args.kind == "koenigs":
        try:
            D = discrete.koenigs_dualize(N, scale=float(args.scale or 1.0), tol=args.tol)
        except discrete.KoenigsError as e:
            raise ValidationError(str(e)) from e
        DD = discrete.koenigs_dualize(D, tol=args.tol)
        rel, s, _ = discrete.homothety_residual(N.top_view(), DD.top_view())
        res["round_trip"] = rel
        extra["homothety_factor"] = s
        export_obj(D.X, out / "koenigs_dual.obj")
        report_json(D.to_json(), out / "koenigs_dual.json")
    report = {"meta": _meta(args) | {"kind": args.kind}, "residuals": res} | extra
    return _finish(report, args, out)


# ---------------------------------------------------------------- verify


def verify_checks(seed: int = 0) -> list[tuple[str, float, float]]:
    """(name, max residual, tolerance) for a fast sweep over the library invariants."""
    rng = np.random.default_rng(seed)
    out = []
    grid = Grid2.square(-1.0, 1.0, 33)
    U, V = grid.mesh()

    f = AnalyticField.from_string("(2*u^2 + 3*v^2)/2")
    s = curvature.curvature_graph(f, U, V)
    out.append(("paraboloid K, H", float(max(np.max(np.abs(s.K - 6)), np.max(np.abs(s.H - 2.5)))), 1e-12))

    E = rng.normal(size=(1000, 5))
    d2 = np.stack(duality.delta5(*duality.delta5(*E.T)), -1)
    n2 = np.stack(duality.nu5(*duality.nu5(*E.T)), -1)
    out.append(("delta, nu involutive", float(max(np.max(np.abs(d2 - E)), np.max(np.abs(n2 - E)))), 1e-12))

    g = AnalyticField.from_string("exp(u/2)*cos(v)/4 + u^2 + v^2/2")
    D = duality.dualize_graph(g)
    K, H = curvature.graph_KH(g.jet(U, V))
    Kd, Hd = duality.dual_field_curvature(D, U, V)
    out.append(("K(delta F) K(F) = 1", float(np.max(np.abs(Kd * K - 1.0))), 1e-8))
    out.append(("H(delta F) = H/K", float(np.max(np.abs(Hd - H / K) / np.maximum(1, np.abs(H / K)))), 1e-8))

    fs = AnalyticField.from_string("(u^2 - v^2 + cos(1+u)*cosh(1+v) + cosh(v)*sin(u))/10")
    hs = AnalyticField.from_string("(u^2 + v^2)/6")
    fp, fm = wreath.split_pair(fs, hs)
    out.append(("isometric split", float(np.max(np.abs(curvature.graph_KH(fp.jet(U, V))[0] - curvature.graph_KH(fm.jet(U, V))[0]))), 1e-10))

    x = AnalyticField.from_string("sin(u)*cosh(v)/2 + 10")
    y = AnalyticField.from_string("cos(u)*sinh(v)/2")
    K0 = curvature.graph_KH(x.jet(U, V))[0]
    dK = max(float(np.max(np.abs(curvature.graph_KH(isometry.assoc_family(x, y, t).jet(U, V))[0] - K0))) for t in (0.3, 1.1, 2.7))
    out.append(("associated family", dK, 1e-8))

    W = wreath.build_wreath(AnalyticField.from_string("(u^2+v^2)/2"), AnalyticField.from_string("u*v"), grid)
    out.append(("Darboux wreath", wreath.wreath_report(W).max_residual(), 1e-9))
    out.append(("wreath potential c", float(np.max(np.abs(W.c.values - (U**2 - V**2) / 2))), 1e-12))

    fw, nw = AnalyticField.from_string("exp(u)*cos(v)"), AnalyticField.from_string("(u^2+v^2)/2")
    El, Er = wreath.para_wreath_maps(fw, nw)
    P = wreath.paratactic_inverse(El, Er, grid)
    l, _ = wreath.paratactic_forward(P.E)
    L = np.stack([np.asarray(j.value) for j in El.jets(U, V)], -1)
    out.append(("paratactic round trip", float(np.max(np.abs(l - L))), 1e-12))

    N = _voss_from_scene({"theta1": [0.1, 1.3], "theta2": [1.8, 2.6], "nu": 22, "nv": 22})
    F2 = discrete.voss_flex(N, 2.0)
    F1 = discrete.voss_flex(N, 1.0)
    out.append(("Voss flex planarity", float(np.max(discrete.planarity_residual(F2.faces()))), 1e-10))
    out.append(("Voss flex top view", float(np.max(np.abs(F2.top_view() - F1.top_view()))), 1e-10))

    T = discrete.QuadNet(np.add.outer(np.cumsum(rng.uniform(0.5, 1.5, 8)), np.zeros(8))[..., None] * [1, 0, 0]
                         + np.add.outer(np.zeros(8), np.cumsum(rng.uniform(0.5, 1.5, 8)))[..., None] * [0.3, 1, 0])
    DD = discrete.koenigs_dualize(discrete.koenigs_dualize(T))
    out.append(("Koenigs round trip", discrete.homothety_residual(T.top_view(), DD.top_view())[0], 1e-10))

    Fm = AnalyticField.from_string("u*sin(v/u) + (v/u)^2")
    Rm = AnalyticField.from_string("u*cos(v/u)")
    Gm = Grid2(1.0, -1.0, 1 / 32, 1 / 16, 33, 33)
    Um, Vm = Gm.mesh()
    Km = curvature.graph_KH(Fm.jet(Um, Vm))[0]
    out.append(("smooth Minding", max(float(np.max(np.abs(curvature.graph_KH(isometry.minding_family(Fm, Rm, s_).jet(Um, Vm))[0] - Km))) for s_ in (-1.0, 0.5, 2.0)), 1e-8))
    return out


def cmd_verify(args) -> int:
    rows = verify_checks(args.seed if args.seed is not None else 0)
    width = max(len(n) for n, _, _ in rows)
    failed = 0
    for name, r, tol in rows:
        ok = r <= tol
        failed += not ok
        print(f"{name:<{width}}  {'PASS' if ok else 'FAIL'}  max residual {r:.3e}  (tol {tol:.0e})")
    if args.out:
        report_json({"checks": [{"name": n, "residual": r, "tol": t, "ok": r <= t} for n, r, t in rows]}, Path(args.out))
    if failed:
        print(f"{failed} check(s) failed", file=sys.stderr)
    return 1 if failed else 0


# ---------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid", default=None, help="u0,v0,hu,hv,nu,nv (default 129x129 on [-1,1]^2)")
    p.add_argument("--tol", type=float, default=None, help="residual tolerance")
    p.add_argument("--out", default=None, help="output file or directory")
    p.add_argument("--seed", type=int, default=None, help="random seed")
    p.add_argument("--param", action="append", default=None, metavar="NAME=VALUE", help="expression parameter")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="isowreath", description="Isotropic surface geometry toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("curvature", help="K, H or principal curvatures of a graph as CSV")
    _common(c)
    c.add_argument("--f")
    c.add_argument("--csv", default=None, help="sampled height field CSV instead of --f")
    c.add_argument("--quantity", choices=["K", "H", "kappa1", "kappa2", "all"], default=None,
                   help="field to write; 'all' writes K.csv, H.csv, kappa1.csv, kappa2.csv into --out")

    d = sub.add_parser("dual", help="metric dual of a graph as OBJ plus curvature check")
    _common(d)
    d.add_argument("--f")
    d.add_argument("--map", "--which", dest="which", choices=["delta", "nu"], default=None)

    m = sub.add_parser("minkowski", help="point- or plane-based sum surface")
    _common(m)
    m.add_argument("--f")
    m.add_argument("--g")
    m.add_argument("--t", type=float, default=None)
    m.add_argument("--mode", choices=["point", "plane"], default=None)

    fam = sub.add_parser("family", help="isometric families")
    fam.add_argument("kind", choices=sorted(FAMILIES))
    fam.add_argument("scene", nargs="?", default=None)
    _common(fam)
    for name in ("f", "n", "r", "x", "y", "profile", "t", "s", "v-range", "eps"):
        fam.add_argument(f"--{name}", default=None)
    for name in ("hbar", "c", "a", "b", "abar", "bbar"):
        fam.add_argument(f"--{name}", type=float, default=None)
    fam.add_argument("--n-u", type=int, default=None)

    w = sub.add_parser("wreath", help="six diagrams of an infinitesimal isometry plus report")
    w.add_argument("scene", nargs="?", default=None)
    _common(w)
    w.add_argument("--f")
    w.add_argument("--n")

    pa = sub.add_parser("paratactic", help="surface from an area-preserving planar map")
    pa.add_argument("scene", nargs="?", default=None)
    _common(pa)
    pa.add_argument("--f")
    pa.add_argument("--n")
    pa.add_argument("--left", help="'X;Y' expressions of the left image")
    pa.add_argument("--right", help="'X;Y' expressions of the right image")

    dc = sub.add_parser("discrete", help="discrete nets: voss, flex, koenigs, check")
    dc.add_argument("kind", choices=["voss", "flex", "koenigs", "check"])
    dc.add_argument("scene", nargs="?", default=None)
    _common(dc)
    dc.add_argument("--t", default=None, help="flex parameter(s), comma separated")
    dc.add_argument("--scale", type=float, default=None)

    v = sub.add_parser("verify", help="run the invariant suite")
    _common(v)
    return p


COMMANDS = {
    "curvature": cmd_curvature,
    "dual": cmd_dual,
    "minkowski": cmd_minkowski,
    "family": cmd_family,
    "wreath": cmd_wreath,
    "paratactic": cmd_paratactic,
    "discrete": cmd_discrete,
    "verify": cmd_verify,
}


def _threads() -> int | None:
    raw = os.environ.get("ISOWREATH_THREADS")
    if raw is None or raw == "":
        return None
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"ISOWREATH_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise UsageError(f"ISOWREATH_THREADS must be a positive integer, got {raw!r}")
    return n


def _join_negative_values(argv):
    # argparse reads "-1,-1,..." or "-u^2" as an option; every long flag takes a value, so glue it on
    out = []
    it = iter(argv)
    for a in it:
        if a.startswith("--") and "=" not in a and a != "--help":
            nxt = next(it, None)
            if nxt is not None and nxt[:1] == "-" and nxt[:2] != "--" and nxt != "-h":
                out.append(f"{a}={nxt}")
                continue
            out.append(a)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(a)
    return out


def run(argv=None) -> int:
    try:
        _threads()
        args = build_parser().parse_args(_join_negative_values(sys.argv[1:] if argv is None else list(argv)))
        scene = getattr(args, "scene", None)
        if scene is not None and args.command not in ("discrete",):
            Scene.load(scene).apply(args)
        if args.tol is None:
            args.tol = 1e-8
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except (ValidationError, ValueError, ArithmeticError) as e:
        # library errors are ValueError subclasses; ExprError included
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
