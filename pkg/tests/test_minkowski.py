import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isowreath.curvature import curvature_graph, mixed_curvature
from isowreath.duality import surface_from_support
from isowreath.fields import AnalyticField, Grid2
from isowreath.minkowski import (
    MinkowskiError,
    SumSpec,
    shear,
    sum_curvature_check,
    sum_plane,
    sum_point,
    window_sum,
    windowed_mixed_area,
)
from randexpr import random_exprs

small = st.floats(min_value=-0.9, max_value=0.9, allow_nan=False)
SPHERE = "(u^2+v^2)/2"


def F(src, **p):
    return AnalyticField.from_string(src, p)


class TestPointSum:
    def test_t_zero(self, grid33):
        U, V = grid33.mesh()
        f = F("sin(u)*v")
        assert np.array_equal(sum_point(f, F("u^3"), 0.0).value(U, V), f.value(U, V))

    def test_linearity(self, grid33):
        U, V = grid33.mesh()
        h = sum_point(F(SPHERE), F("u*v"), 2.0).value(U, V)
        assert np.allclose(h, (U**2 + V**2) / 2 + 2 * U * V, atol=1e-15)

    def test_sphere_offset_adds_one_to_H(self):
        f = F("exp(u)*cos(v)/3 + u^2")
        s0 = curvature_graph(f, 0.2, 0.1)
        s1 = curvature_graph(sum_point(f, F(SPHERE), 1.0), 0.2, 0.1)
        assert s1.H == pytest.approx(s0.H + 1.0)
        # K(F, S) = H(F)
        assert s1.K == pytest.approx(s0.K + 2 * s0.H + 1.0)

    def test_random_curvature_laws(self):
        rows = list(random_exprs(21, 80, depth=4))
        worst = 0.0
        for (_, e1, p1, (u, v)), (_, e2, p2, _) in zip(rows[::2], rows[1::2]):
            r = sum_curvature_check(AnalyticField(e1, p1), AnalyticField(e2, p2), 0.7, u, v)
            worst = max(worst, r["K_sum"], r["H_sum"])
        assert worst < 1e-9

    @settings(max_examples=40, deadline=None)
    @given(t=st.floats(-4, 4), u=small, v=small)
    def test_mixed_term_on_grid(self, t, u, v):
        f, g = F("u^2*v + cos(v)"), F("sinh(u)*v^2")
        Kt = curvature_graph(sum_point(f, g, t), u, v).K
        assert Kt == pytest.approx(
            curvature_graph(f, u, v).K + 2 * t * mixed_curvature(f, g, u, v) + t * t * curvature_graph(g, u, v).K,
            abs=1e-10,
        )

    @settings(max_examples=40, deadline=None)
    @given(a=st.floats(-5, 5), b=st.floats(-5, 5), c=st.floats(-5, 5), u=small, v=small)
    def test_commutes_with_shear(self, a, b, c, u, v):
        f, g, t = F("u^3 + v"), F("exp(v)*u"), 0.6
        lhs = sum_point(shear(f, a, b, c), shear(g, a, b, c), t).value(u, v)
        rhs = shear(sum_point(f, g, t), (1 + t) * a, (1 + t) * b, (1 + t) * c).value(u, v)
        assert lhs == pytest.approx(rhs, abs=1e-11)


class TestPlaneSum:
    def test_t_zero(self):
        h = F("u^2 + v^2/3")
        assert surface_from_support(sum_plane(h, F(SPHERE), 0.0), 0.3, 0.1).tolist() == surface_from_support(h, 0.3, 0.1).tolist()

    def test_paraboloid_supports_add(self):
        # h = u^2/(2a) + v^2/(2b): the sum has 1/a = 1/a1 + 1/a2
        h1 = F("u^2/(2*a) + v^2/(2*b)", a=2.0, b=4.0)
        h2 = F("u^2/(2*a) + v^2/(2*b)", a=2.0, b=4.0 / 3.0)
        h = sum_plane(h1, h2, 1.0)
        j = h.jet(0.3, -0.2)
        assert (j.duu, j.dvv, j.duv) == pytest.approx((1.0, 1.0, 0.0))
        assert surface_from_support(h, 0.3, -0.2) == pytest.approx(surface_from_support(F(SPHERE), 0.3, -0.2))

    def test_plane_offset_of_sphere(self):
        # offsetting the unit sphere by t scales its support
        h = sum_plane(F(SPHERE), F(SPHERE), 0.5)
        assert surface_from_support(h, 0.4, 0.2) == pytest.approx([0.6, 0.3, 1.5 * 0.1])

    def test_laws(self, grid33):
        U, V = grid33.mesh()
        r = sum_curvature_check(F("u^2 + v^2/2 + u*v/4"), F("exp(u)/3 + v^2"), 0.8, U, V, mode="plane")
        assert max(r.values()) < 1e-10

    def test_flat_sum_rejected(self):
        with pytest.raises(MinkowskiError):
            sum_curvature_check(F("u^2 + 0*v"), F("u*0"), 1.0, 0.1, 0.1, mode="plane")

    def test_bad_mode(self):
        with pytest.raises(MinkowskiError):
            SumSpec("both", F("u"), F("v"), 1.0)
        with pytest.raises(MinkowskiError):
            sum_curvature_check(F("u"), F("v"), 1.0, 0.0, 0.0, mode="both")

    def test_spec_dispatch(self):
        s = SumSpec("point", F("u"), F("v"), 2.0).result()
        assert s.value(1.0, 3.0) == 7.0


class TestMixedArea:
    grid = Grid2.square(-0.5, 0.5, 65)

    def test_matches_integrated_mixed_curvature(self):
        f, g = F("u^2 + v^2/2 + u^3/5"), F("exp(u)*v^2/2 + u^2/3")
        cells = windowed_mixed_area(f, g, self.grid)
        # midpoint-rule oracle for the integral of K(F, G)
        g2 = self.grid
        U, V = np.meshgrid(g2.u0 + g2.hu * (np.arange(g2.nu - 1) + 0.5), g2.v0 + g2.hv * (np.arange(g2.nv - 1) + 0.5), indexing="ij")
        oracle = float(np.sum(mixed_curvature(f, g, U, V))) * g2.hu * g2.hv
        assert window_sum(cells, 0, 64, 0, 64) == pytest.approx(oracle, rel=1e-3)

    def test_vanishes_for_harmonic_against_sphere(self):
        # K(S, G) = H(G) = 0 for harmonic G
        cells = windowed_mixed_area(F(SPHERE), F("exp(u)*cos(v)"), self.grid)
        assert np.max(np.abs(cells)) < 1e-3 * self.grid.hu * self.grid.hv
        area = 30 * 55 * self.grid.hu * self.grid.hv
        assert abs(window_sum(cells, 10, 40, 5, 60)) < 10 * self.grid.hu**2 * area

    def test_self_mixed_area_is_area(self):
        f = F("u^2 + v^2/2")
        cells = windowed_mixed_area(f, f, self.grid)
        assert window_sum(cells, 0, 64, 0, 64) == pytest.approx(2.0, rel=1e-12)
