import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isowreath.curvature import curvature_graph
from isowreath.duality import (
    J5,
    L5,
    ContactElement,
    ContactField,
    DualityError,
    L_ce,
    contact_field_of_graph,
    coord_jets,
    curvature_from_support,
    delta_ce,
    dual_curvature_rule,
    dual_field_curvature,
    dual_line,
    dual_topview_area,
    dualize_graph,
    envelope,
    integrability_residual,
    iso_angle,
    nu_ce,
    nu_self_incidence,
    point_dual_plane,
    uncorrected_support_H,
    support_contact_field,
    surface_from_support,
    tangency_residual,
    total_abs_curvature,
)
from isowreath.expr import Jet2
from isowreath.fields import AnalyticField, Grid2, ParamSurface, SupportField, iso_distance

real = st.floats(min_value=-50, max_value=50, allow_nan=False)
quint = st.tuples(real, real, real, real, real)
point = st.tuples(real, real, real)


def F(src, **p):
    return AnalyticField.from_string(src, p)


class TestContactMaps:
    def test_sphere_point_self_dual(self):
        assert delta_ce(ContactElement(1, 1, 1, 1, 1)) == ContactElement(1, 1, 1, 1, 1)

    def test_delta_by_hand(self):
        assert delta_ce(ContactElement(1, 2, 3, 4, 5)) == ContactElement(4, 5, 11, 1, 2)

    def test_nu_by_hand(self):
        assert nu_ce(ContactElement(1, 2, 3, 4, 5)) == ContactElement(5, -4, -11, -2, 1)

    @given(quint)
    def test_involutions(self, e):
        E = ContactElement(*e)
        assert delta_ce(delta_ce(E)).as_array() == pytest.approx(E.as_array(), abs=1e-9)
        assert nu_ce(nu_ce(E)).as_array() == pytest.approx(E.as_array(), abs=1e-9)

    @given(quint)
    def test_nu_is_L_after_delta(self, e):
        E = np.array(e)
        assert np.allclose(nu_ce(E), L_ce(delta_ce(E)), atol=1e-12, rtol=0)

    @given(point)
    def test_point_on_own_nu_plane(self, p):
        assert abs(nu_self_incidence(p)) <= 1e-12 * (1 + max(abs(c) for c in p) ** 2)

    @given(quint)
    def test_dual_element_incident(self, e):
        # the dual point lies on the dual plane
        D = delta_ce(ContactElement(*e))
        a, b, c = point_dual_plane(ContactElement(*e).point, "delta")
        assert D.p == pytest.approx(a) and D.q == pytest.approx(b)
        assert D.z == pytest.approx(a * D.x + b * D.y + c, abs=1e-8 * (1 + abs(D.z)))

    def test_array_shape_error(self):
        with pytest.raises(DualityError):
            delta_ce(np.zeros((3, 4)))


class TestMetricDuality:
    @given(point, point)
    def test_distance_becomes_angle(self, p1, p2):
        d = iso_distance(p1, p2)
        for which in ("delta", "nu"):
            ang = float(iso_angle(point_dual_plane(p1, which), point_dual_plane(p2, which)))
            assert ang == pytest.approx(d, abs=1e-9)

    @settings(max_examples=50)
    @given(point, point)
    def test_line_top_views(self, p1, p2):
        t = np.subtract(p2, p1)[:2]
        if np.hypot(*t) < 1e-3:
            return
        a, b = dual_line(p1, p2, "delta")
        c, d = dual_line(p1, p2, "nu")
        td, tn = (b - a)[:2], (d - c)[:2]
        cos_d = abs(td @ t) / (np.linalg.norm(td) * np.linalg.norm(t))
        sin_n = abs(tn[0] * t[1] - tn[1] * t[0]) / (np.linalg.norm(tn) * np.linalg.norm(t))
        assert cos_d < 1e-9
        assert sin_n < 1e-9


class TestGraphFields:
    def test_sphere_contact_field(self, grid33):
        U, V = grid33.mesh()
        E = contact_field_of_graph(F("(u^2+v^2)/2")).values(U, V)
        assert np.allclose(E, np.stack([U, V, (U**2 + V**2) / 2, U, V], -1))

    def test_constant_field(self):
        assert contact_field_of_graph(F("3 + 0*u")).values(0.2, 0.4).tolist() == [0.2, 0.4, 3.0, 0.0, 0.0]

    def test_saddle_point(self):
        assert contact_field_of_graph(F("u*v")).values(1.0, 2.0).tolist() == [1.0, 2.0, 2.0, 2.0, 1.0]

    def test_cusp_dual_parametrization(self, grid33):
        U, V = grid33.mesh()
        D = dualize_graph(F("(u^2 - v^3)/2")).values(U, V)
        assert np.allclose(D[..., :3], np.stack([U, -1.5 * V**2, (U**2 - 2 * V**3) / 2], -1), atol=1e-14)

    def test_sphere_self_dual(self, grid33):
        U, V = grid33.mesh()
        f = F("(u^2+v^2)/2")
        assert np.allclose(dualize_graph(f).values(U, V), contact_field_of_graph(f).values(U, V))

    def test_minimal_dual_has_harmonic_support(self, grid33):
        U, V = grid33.mesh()
        f = F("exp(u)*cos(v)")
        D = dualize_graph(f).values(U, V)
        # delta(F) equals the surface with support function h = f
        assert np.allclose(D[..., :3], surface_from_support(SupportField(f), U, V), atol=1e-14)

    def test_integrability(self, grid33):
        U, V = grid33.mesh()
        for src in ("sin(u)*v^2", "exp(u+v)", "u*v"):
            E = contact_field_of_graph(F(src))
            assert np.max(np.abs(integrability_residual(E, U, V))) < 1e-14
            assert np.max(np.abs(tangency_residual(dualize_graph(F(src), "nu"), U, V))) < 1e-13

    def test_non_surface_residual(self):
        def fn(u, v):
            U, V = coord_jets(u, v)
            z = 0.0 * U
            return (U, V, z, V, z)

        assert float(integrability_residual(ContactField(fn), 0.3, 0.4)) == 1.0


class TestSupport:
    def test_sphere(self):
        assert surface_from_support(F("(u^2+v^2)/2"), 0.5, -1.0).tolist() == [0.5, -1.0, 0.625]

    def test_zero_support_is_origin(self):
        assert surface_from_support(F("0*u"), 0.7, 0.1).tolist() == [0.0, 0.0, 0.0]

    def test_linear_support(self):
        assert surface_from_support(F("u"), 0.7, 0.1).tolist() == [1.0, 0.0, 0.0]

    def test_paraboloid_curvature(self):
        a, b = 2.0, 3.0
        K, H = curvature_from_support(F("u^2/(2*a) + v^2/(2*b)", a=a, b=b), 0.1, 0.2)
        assert (K, H) == pytest.approx((a * b, (a + b) / 2))
        assert uncorrected_support_H(F("u^2/(2*a) + v^2/(2*b)", a=a, b=b), 0.1, 0.2) == pytest.approx(a + b)

    def test_sphere_support_curvature(self):
        assert curvature_from_support(F("(u^2+v^2)/2"), 0.3, 0.3) == pytest.approx((1.0, 1.0))

    def test_parabolic_point_error(self):
        with pytest.raises(DualityError):
            curvature_from_support(F("u^2 + 0*v"), 0.1, 0.1)

    def test_support_field_curvature_matches(self, grid33):
        U, V = grid33.mesh()
        h = F("u^2 + v^2/2 + u*v/3 + exp(u)/5")
        K, H = curvature_from_support(h, U, V)
        Kp, Hp = dual_field_curvature(support_contact_field(h), U, V)
        assert np.allclose(K, Kp, rtol=1e-12) and np.allclose(H, Hp, rtol=1e-12)


class TestEnvelope:
    def test_reproduces_support_surface(self, grid33):
        U, V = grid33.mesh()
        h = F("u^2/2 + v^2 + u*v/4")
        n = ParamSurface.from_strings("u", "v", "-1 + 0*u")
        d = h
        assert np.allclose(envelope(n, d, U, V), surface_from_support(h, U, V), atol=1e-13)

    def test_singular_family(self):
        n = ParamSurface.from_strings("cos(u)", "sin(u)", "0*u")
        with pytest.raises(DualityError):
            envelope(n, F("1 + 0*u"), 0.3, 0.2)

    def test_sphere_tangent_planes(self, grid33):
        U, V = grid33.mesh()
        n = ParamSurface.from_strings("u", "v", "-1 + 0*u")
        e = envelope(n, F("(u^2+v^2)/2"), U, V)
        assert np.allclose(e, dualize_graph(F("(u^2+v^2)/2")).values(U, V)[..., :3])

    def test_envelope_tangency(self):
        # envelope point lies on its plane and its derivatives are tangent (FD oracle)
        n = ParamSurface.from_strings("u", "v + u^2/4", "-1 - v/3")
        d = F("sin(u) + v^2")
        u, v, h = 0.3, 0.2, 1e-6
        p = envelope(n, d, u, v)
        nn = np.array([float(j.value) for j in n.point_jets(u, v)])
        assert p @ nn == pytest.approx(float(d.jet(u, v).value), abs=1e-12)
        pu = (envelope(n, d, u + h, v) - envelope(n, d, u - h, v)) / (2 * h)
        pv = (envelope(n, d, u, v + h) - envelope(n, d, u, v - h)) / (2 * h)
        assert abs(pu @ nn) < 1e-7 and abs(pv @ nn) < 1e-7


class TestCurvatureRule:
    def test_paraboloid(self):
        r = dual_curvature_rule(6.0, 2.5, "delta", kappa=[2.0, 3.0])
        assert (r["K"], r["H"]) == pytest.approx((1 / 6, 5 / 12))
        assert r["kappa"] == pytest.approx([1 / 3, 1 / 2])

    def test_sphere_fixed(self):
        r = dual_curvature_rule(1.0, 1.0)
        assert (r["K"], r["H"]) == (1.0, 1.0)

    def test_developable_error(self):
        with pytest.raises(DualityError):
            dual_curvature_rule(0.0, 1.0)

    @pytest.mark.parametrize("which", ["delta", "nu"])
    def test_rule_against_parametric_oracle(self, which, grid33):
        U, V = grid33.mesh()
        f = F("u^2 + v^2/2 + u*v/3 + sin(u)*v/5")
        s = curvature_graph(f, U, V)
        Kd, Hd = dual_field_curvature(dualize_graph(f, which), U, V)
        r = dual_curvature_rule(s.K, s.H, which)
        assert np.allclose(Kd, r["K"], rtol=1e-10) and np.allclose(Hd, r["H"], rtol=1e-10)

    def test_paraboloid_dual_via_graph(self):
        Kd, Hd = dual_field_curvature(dualize_graph(F("(2*u^2+3*v^2)/2")), 0.2, 0.1)
        assert (Kd, Hd) == pytest.approx((1 / 6, 5 / 12))


def test_total_curvature_equals_dual_area():
    grid = Grid2(-0.5, -0.5, 1 / 128, 1 / 128, 129, 129)
    f = F("u^2 + v^2/2 + u^3/3 + exp(v)/4")
    total = total_abs_curvature(f, grid)
    area = dual_topview_area(f, grid)
    assert abs(area - total) / total < 0.01


def test_jet_components_broadcast():
    U, V = coord_jets(np.zeros((2, 3)), 1.0)
    assert isinstance(U, Jet2) and U.du.shape == (2, 3)


def test_rotation_and_reflection_orders():
    E = np.random.default_rng(4).normal(size=(5, 50))
    J4, L2, L4 = E, E, E
    for _ in range(4):
        J4 = np.array(J5(*J4))
    for _ in range(2):
        L2 = np.array(L5(*L2))
    L4 = np.array(L5(*L5(*L2)))
    assert np.array_equal(J4, E) and np.array_equal(L4, E)
    # L is a quarter turn composed with a reflection, so L^2 is the half turn with p, q negated
    assert np.array_equal(L2, E * np.array([-1, -1, 1, -1, -1])[:, None])
