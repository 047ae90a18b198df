"""Acceptance gate: one PASS/FAIL line per criterion, at the stated tolerances."""

import math

import numpy as np
import pytest

from isowreath.curvature import curvature_graph
from isowreath.discrete import (
    Rulings,
    discrete_minding_shear,
    dihedral_jumps,
    homothety_residual,
    koenigs_check,
    koenigs_dualize,
    minding_invariants,
    mixed_area,
    net_dual_nu,
    planarity_residual,
    polyline_spread,
    QuadNet,
    quad_area,
    tangent_line_topview,
    translational_residual,
    voss_construct,
    voss_flex,
)
from isowreath.duality import (
    L5,
    curvature_from_support,
    delta5,
    dual_field_curvature,
    dualize_graph,
    nu5,
    uncorrected_support_H,
)
from isowreath.expr import Jet2, eval_jet2
from isowreath.fields import AnalyticField, Grid2
from isowreath.isometry import (
    NegativeRadicandError,
    Profile,
    assoc_family,
    bour_eps_example,
    bour_family,
    curvature_param,
    helical_surface,
    minding_family,
)
from isowreath.wreath import (
    AreaPreservationError,
    build_wreath,
    para_wreath_maps,
    paratactic_forward,
    paratactic_inverse,
    rotation_flex_identity,
    split_pair,
    PlanarMap,
    wreath_report,
)
from randexpr import central_differences, random_exprs, random_source


def F(src, **p):
    return AnalyticField.from_string(src, p)


@pytest.fixture
def gate(capsys):
    """Print a PASS/FAIL row (uncaptured) and assert it."""

    def check(criterion, name, residual, tol):
        ok = bool(residual < tol)
        with capsys.disabled():
            print(f"\n[{criterion:>2}] {'PASS' if ok else 'FAIL'}  {name}: {residual:.3e} < {tol:.0e}")
        assert ok, f"{name}: {residual:.3e} >= {tol:.0e}"

    return check


def test_01_paraboloid(gate):
    f = F("(a*u^2 + b*v^2)/2", a=2.0, b=3.0)
    g = Grid2.square(-1, 1, 41)
    U, V = g.mesh()
    s = curvature_graph(f, U, V)
    err = max(np.max(np.abs(s.K - 6)), np.max(np.abs(s.H - 2.5)), np.max(np.abs(s.kappa1 - 2)), np.max(np.abs(s.kappa2 - 3)))
    Ui, Vi = g.mesh(2)
    ss = curvature_graph(f.sample(g), Ui, Vi)
    err_s = max(np.max(np.abs(ss.K - 6)), np.max(np.abs(ss.H - 2.5)), np.max(np.abs(ss.kappa1 - 2)), np.max(np.abs(ss.kappa2 - 3)))
    assert g.hu == 0.05
    gate(1, "paraboloid K, H, kappa (analytic)", err, 1e-12)
    gate(1, "paraboloid K, H, kappa (sampled h=0.05)", err_s, 1e-9)


def test_02_duality_algebra(gate):
    E = np.random.default_rng(2).normal(size=(100_000, 5)).T
    inv = max(np.max(np.abs(np.array(delta5(*delta5(*E))) - E)), np.max(np.abs(np.array(nu5(*nu5(*E))) - E)))
    x, y = E[0], E[1]
    S = (x, y, (x * x + y * y) / 2, x, y)
    self_dual = np.max(np.abs(np.array(delta5(*S)) - np.array(S)))
    comp = np.max(np.abs(np.array(nu5(*E)) - np.array(L5(*delta5(*E)))))
    gate(2, "delta^2 = nu^2 = id on 1e5 quintuples", inv, 1e-12)
    gate(2, "unit sphere self-dual (exact)", self_dual, np.nextafter(0, 1))
    gate(2, "nu = L o delta pointwise", comp, 1e-12)


def test_03_curvature_transformation(gate):
    rng = np.random.default_rng(3)
    worst = 0.0
    for k in range(50):
        a, b = rng.uniform(1, 3, 2)
        src = f"{a:.4f}*u^2 + {b:.4f}*v^2 + ({random_source(rng, 4)})/20"
        f = F(src, a=float(rng.uniform(-1, 1)))
        u, v = rng.uniform(-0.5, 0.5, (2, 100))
        s = curvature_graph(f, u, v)
        Kd, Hd = dual_field_curvature(dualize_graph(f), u, v)
        worst = max(worst, np.max(np.abs(Kd * s.K - 1)), np.max(np.abs(Hd - s.H / s.K) / np.abs(s.H / s.K)))
    gate(3, "K(dF) K(F) = 1 and H(dF) = H/K, 50 surfaces x 100 points", worst, 1e-8)


def test_04_support_curvature(gate):
    a, b = 2.0, 3.0
    h = F("u^2/(2*a) + v^2/(2*b)", a=a, b=b)
    U, V = Grid2.square(-1, 1, 21).mesh()
    K, H = curvature_from_support(h, U, V)
    err = max(np.max(np.abs(K - a * b)), np.max(np.abs(H - (a + b) / 2)))
    doubled = np.max(np.abs(uncorrected_support_H(h, U, V) - (a + b)))
    gate(4, "support h gives K = ab, H = (a+b)/2", err, 1e-12)
    gate(4, "uncorrected quotient equals 2H", doubled, 1e-12)


def test_05_isometric_split(gate):
    fp, fm = split_pair(F("(u^2 - v^2 + cos(1+u)*cosh(1+v) + cosh(v)*sin(u))/10"), F("(u^2 + v^2)/6"))
    U, V = Grid2.square(-1, 1, 129).mesh()
    d = np.max(np.abs(curvature_graph(fp, U, V).K - curvature_graph(fm, U, V).K))
    gate(5, "K(f+h) = K(f-h)", d, 1e-10)


def test_06_associated_family(gate):
    x, y = F("sin(u)*cosh(v)/2 + 10"), F("cos(u)*sinh(v)/2")
    U, V = Grid2.square(-1, 1, 129).mesh()
    K0 = curvature_graph(x, U, V).K
    d = max(np.max(np.abs(curvature_graph(assoc_family(x, y, t), U, V).K - K0)) for t in (0.3, 1.1, 2.7))
    gate(6, "associated family K invariant", d, 1e-8)


def _bour_gate(gate, v_range):
    P = Profile.from_string("-sin(v)")
    try:
        fam = bour_family(P, 1.0, 0.045124, v_range, eps=bour_eps_example)
    except NegativeRadicandError as err:
        gate(7, f"Bour on v in {list(v_range)}: radicand < 0 at v = {err.v:.4f}", math.inf, 1e-6)
    U, V = np.meshgrid(np.linspace(0, 2 * math.pi, 41), np.linspace(*v_range, 41))
    dK = np.max(np.abs(curvature_param(fam.surface(), U, V)[0] - curvature_param(helical_surface(P), U, V)[0]))
    gate(7, f"Bour max |dK| on v in {list(v_range)}", dK, 1e-6)
    gate(7, "Bour quadrature closure", fam.closure, 1e-8)


@pytest.mark.xfail(strict=True, reason="radicand cos^2 v - 1/v^2 + c is negative for v < 2.031 at c = 0.045124")
def test_07_bour_stated_range(gate):
    _bour_gate(gate, (0.5, 3.0))


def test_07_bour_feasible_range(gate):
    _bour_gate(gate, (2.1, 3.0))


def test_08_darboux_wreath(gate):
    g = Grid2.square(-1, 1, 33)
    U, V = g.mesh()
    W = build_wreath(F("(u^2+v^2)/2"), F("u*v"), g)
    gate(8, "potential c = (u^2 - v^2)/2", float(np.max(np.abs(W.c.values - (U**2 - V**2) / 2))), 1e-15)
    gate(8, "wreath relations (analytic)", wreath_report(W).max_residual(), 1e-9)
    gs = Grid2.square(-1, 1, 129)
    Ws = build_wreath(F("(u^2+v^2)/2").sample(gs), F("u*v").sample(gs), gs)
    gate(8, "wreath relations (sampled 129^2), tol 10 h^2", wreath_report(Ws).max_residual(), 10 * gs.hu**2)
    # t-derivative of K(C + t Cbar): finite differences against the closed form
    pts = [(0.3, 0.2), (-0.5, 0.7), (0.1, -0.4)]
    flex = [rotation_flex_identity(F("(u^2+v^2)/2"), F(n), u, v) for n in ("u*v", "exp(u)*cos(v)") for u, v in pts]
    gate(8, "dK/dt = n_uv K(F,V) on flexible pairs (fd)", max(abs(r["fd"] - r["undivided_rhs"]) for r in flex), 1e-6)
    gen = [rotation_flex_identity(F("u^2 + sin(v) + u*v/3"), F("u*v + u^3/5 + v^2/4"), u, v) for u, v in pts]
    gate(8, "dK/dt closed form off flexible pairs (fd)", max(abs(r["fd"] - r["exact"]) for r in gen), 1e-6)


def test_09_paratactic(gate):
    g = Grid2.square(-1, 1, 129)
    U, V = g.mesh()
    f, n = F("exp(u)*cos(v)"), F("(u^2+v^2)/2")
    El, Er = para_wreath_maps(f, n)
    res = paratactic_inverse(El, Er, g)
    l, r = paratactic_forward(res.E)
    L = np.stack([np.asarray(j.value) for j in El.jets(U, V)], -1)
    R = np.stack([np.asarray(j.value) for j in Er.jets(U, V)], -1)
    gate(9, "forward o inverse recovers planar images", float(max(np.max(np.abs(l - L)), np.max(np.abs(r - R)))), 1e-12)
    gate(9, "z closure residual", res.closure, 1e-8)
    M = PlanarMap(lambda u, v: (Jet2.var_u(u), Jet2.var_v(v)))
    S = PlanarMap(lambda u, v: (Jet2.var_u(u) * 1.5, Jet2.var_v(v)))
    with pytest.raises(AreaPreservationError):
        paratactic_inverse(M, S, Grid2.square(-1, 1, 33))


def test_10_voss(gate):
    P = tangent_line_topview(np.linspace(0.1, 1.3, 24), np.linspace(2.0, 3.2, 22))
    N = voss_construct(P, 0.03 * np.arange(24) ** 1.3, 0.4 * np.sin(np.arange(22) / 5))
    assert min(N.shape) >= 20
    F1 = voss_flex(N, 1.0)
    B1 = net_dual_nu(F1)
    plan = top = para = area = jump = 0.0
    for t in (0.5, 1.0, 2.0):
        Ft = voss_flex(N, t)
        plan = max(plan, float(np.max(planarity_residual(Ft.faces()))))
        top = max(top, float(np.max(np.abs(Ft.top_view() - F1.top_view()))))
        Bt = net_dual_nu(Ft)
        f = Bt.faces()[..., :2]
        para = max(para, float(np.max(np.abs(f[..., 0, :] + f[..., 2, :] - f[..., 1, :] - f[..., 3, :]))))
        para = max(para, translational_residual(Bt))
        area = max(area, float(np.max(np.abs(quad_area(Bt.faces()) - quad_area(B1.faces())))))
        ji, jj = dihedral_jumps(Ft)
        jump = max(jump, polyline_spread(ji, 0), polyline_spread(jj, 1))
    gate(10, "Voss flex planarity", plan, 1e-10)
    gate(10, "Voss flex top view fixed", top, 1e-10)
    gate(10, "dual faces parallelograms", para, 1e-12)
    gate(10, "dual face areas t-invariant", area, 1e-12)
    gate(10, "dihedral jump constant per polyline", jump, 1e-9)


def _shoelace(P):
    x, y = P[..., 0], P[..., 1]
    return 0.5 * np.sum(x * np.roll(y, -1, -1) - np.roll(x, -1, -1) * y, axis=-1)


def _det(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def test_11_koenigs(gate):
    rng = np.random.default_rng(11)
    T = QuadNet(np.cumsum(rng.uniform(0.5, 1.5, 8))[:, None, None] * [1.0, 0.0, 0.2]
                + np.cumsum(rng.uniform(0.5, 1.5, 9))[None, :, None] * [0.3, 1.0, -0.1]
                + (np.arange(8)[:, None, None] ** 2 * 0.05) * [0.0, 0.0, 1.0])
    D = koenigs_dualize(T)
    r, _, _ = homothety_residual(T, koenigs_dualize(D))
    gate(11, "Koenigs dual of dual homothetic to original", r, 1e-10)

    # random parallel quad pairs from the 2D space of edge scalings
    n = 10_000
    sq = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    P = sq + rng.uniform(-0.3, 0.3, (n, 4, 2))
    e = np.roll(P, -1, -2) - P
    hom = np.ones((n, 4))
    # three-vector identity det(b,c) a + det(c,a) b + det(a,b) c = 0 gives a second null vector
    other = np.stack([np.zeros(n), _det(e[:, 2], e[:, 3]), _det(e[:, 3], e[:, 1]), _det(e[:, 1], e[:, 2])], -1)

    def build(lam):
        steps = lam[..., None] * e
        return P[:, :1] + np.concatenate([np.zeros((n, 1, 2)), np.cumsum(steps[:, :3], 1)], 1)

    # polarization of the shoelace area as an independent mixed-area oracle
    def oracle(Q):
        return 0.5 * (_shoelace(P + Q) - _shoelace(P) - _shoelace(Q))

    mh, mo = oracle(build(hom)), oracle(build(other))
    dual = mh[:, None] * other - mo[:, None] * hom
    dual /= np.max(np.abs(dual), axis=1, keepdims=True)
    is_dual = rng.random(n) < 0.5
    alpha = np.where(is_dual, 0.0, rng.choice([-1, 1], n) * rng.uniform(0.05, 2, n))
    beta = rng.choice([-1, 1], n) * rng.uniform(0.2, 2, n)
    Q = build(alpha[:, None] * hom + beta[:, None] * dual) + rng.normal(size=(n, 1, 2))
    # all four edges, including the closing one, are parallel to those of P
    assert np.max(np.abs(_det(np.roll(Q, -1, -2) - Q, e))) < 1e-12
    _, res = koenigs_check(P[:, None], Q[:, None])
    res = res[:, 0]
    kc = res <= 1e-9
    zero_mixed = np.abs(mixed_area(P, Q)) <= 1e-9
    mismatch = int(np.sum(kc != zero_mixed))
    assert np.array_equal(kc, is_dual)
    gate(11, "koenigs_check <=> mixed area 0, 1e4 pairs (mismatches)", mismatch, 1)


def _rulings(rng, m=10):
    ang = np.cumsum(rng.uniform(0.2, 0.5, m))
    e = np.stack([np.cos(ang), np.sin(ang), rng.normal(size=m)], -1)
    p = np.concatenate([rng.normal(size=(m, 2)), rng.normal(size=(m, 1))], -1)
    return Rulings(p, e)


def test_12_minding(gate):
    rng = np.random.default_rng(12)
    R = _rulings(rng)
    a = minding_invariants(R)
    worst = 0.0
    for _ in range(100):
        b = minding_invariants(discrete_minding_shear(R, rng.normal(size=len(R) - 1)))
        worst = max(worst, *(float(np.max(np.abs(getattr(a, k) - getattr(b, k)))) for k in ("rho", "phi", "d")))
    gate(12, "discrete Minding rho, phi, d under 100 shears", worst, 1e-12)
    Fm, Rm = F("u*sin(v/u) + (v/u)^2"), F("u*cos(v/u)")
    U, V = Grid2(1.0, -1.0, 1 / 32, 1 / 16, 33, 33).mesh()
    K0 = curvature_graph(Fm, U, V).K
    d = max(float(np.max(np.abs(curvature_graph(minding_family(Fm, Rm, s), U, V).K - K0))) for s in (-1.0, 0.5, 2.0))
    gate(12, "smooth Minding |K(F+sR) - K(F)|", d, 1e-8)


def test_13_expression_ad(gate):
    worst = 0.0
    for _, e, p, (u, v) in random_exprs(13, 1000):
        j = eval_jet2(e, u, v, p)
        ad = np.array([j.du, j.dv, j.duu, j.duv, j.dvv])
        worst = max(worst, float(np.max(np.abs(ad - central_differences(e, u, v, p)) / np.maximum(np.abs(ad), 1.0))))
    gate(13, "AD vs central differences, 1000 expressions", worst, 1e-5)
