import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rieszlab import lie_models as lm

GROUPS = ["heisenberg", "su2", "sl2"]


def matrix_test_function(g):
    return complex(g[0, 0] + 0.3 * g[0, 1] ** 2 - 0.7j * g[1, 0] + 0.2 * g[0, -1] * g[-1, -1])


POINTS = {
    "heisenberg": [(0.7, 0.4, -0.3), (1.6, 4.1, 1.2)],
    "su2": [(0.9, 0.5, -1.0), (2.0, 4.0, 2.5)],
    "sl2": [(0.8, 1.1, 0.4), (1.5, 5.0, -2.0)],
}


class TestModels:
    @pytest.mark.parametrize("name", GROUPS)
    def test_structure_constants(self, name):
        assert lm.commutator_residual(lm.get_model(name)) <= 1e-13

    @pytest.mark.parametrize("alias,name", [("h", "heisenberg"), ("H", "heisenberg"),
                                            ("su2", "su2"), ("sl2", "sl2")])
    def test_aliases(self, alias, name):
        assert lm.get_model(alias).name == name

    def test_unknown_group(self):
        with pytest.raises(ValueError, match="unknown group"):
            lm.get_model("so3")

    def test_su2_basis_is_antihermitian_traceless(self):
        for A in lm.SU2.basis:
            assert np.allclose(A.conj().T, -A)
            assert abs(np.trace(A)) < 1e-15

    def test_sl2_basis_real(self):
        for A in lm.SL2.basis:
            assert np.abs(A.imag).max() == 0


class TestHeisenbergLaw:
    @given(st.lists(st.floats(-5, 5), min_size=9, max_size=9))
    def test_associative_and_matrix_homomorphism(self, v):
        p, q, r = np.array(v[:3]), np.array(v[3:6]), np.array(v[6:])
        lhs = lm.heis_mul(lm.heis_mul(p, q), r)
        rhs = lm.heis_mul(p, lm.heis_mul(q, r))
        assert np.allclose(lhs, rhs, atol=1e-9)
        M = lm.heis_to_matrix(p) @ lm.heis_to_matrix(q)
        assert np.allclose(lm.heis_from_matrix(M), lm.heis_mul(p, q), atol=1e-9)

    @given(st.lists(st.floats(-5, 5), min_size=3, max_size=3))
    def test_inverse(self, v):
        p = np.array(v)
        assert np.allclose(lm.heis_mul(p, lm.heis_inv(p)), 0, atol=1e-12)

    def test_broadcasting(self):
        p = np.random.default_rng(0).normal(size=(5, 3))
        out = lm.heis_mul(p, p[::-1])
        assert out.shape == (5, 3)


class TestChart:
    @pytest.mark.parametrize("name", GROUPS)
    @pytest.mark.parametrize("k", range(2))
    def test_closed_form_matches_expm(self, name, k):
        m = lm.get_model(name)
        r, theta, z = POINTS[name][k]
        a = lm.chart_to_group(r, theta, z, m)
        b = lm.chart_to_group_expm(r, theta, z, m)
        assert np.abs(a - b).max() <= 1e-12

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            lm.chart_to_group(4.0, 0.0, 0.0, lm.SU2)
        with pytest.raises(ValueError):
            lm.chart_to_group(-1.0, 0.0, 0.0, lm.HEISENBERG)

    def test_manifold_check(self):
        g = lm.chart_to_group(0.5, 0.1, 0.2, lm.SU2)
        lm.check_point(g, lm.SU2)
        with pytest.raises(lm.ManifoldError):
            lm.check_point(1.01 * g, lm.SU2)
        with pytest.raises(lm.ManifoldError):
            lm.group_mul(g, 2 * np.eye(2), lm.SU2)


class TestCoordinateFields:
    @pytest.mark.parametrize("name", GROUPS)
    @pytest.mark.parametrize("which", ["X", "Y", "Z"])
    def test_fields_match_left_invariant_derivative(self, name, which):
        m = lm.get_model(name)
        f = lm.chart_function(matrix_test_function, m)
        field = lm.coordinate_vector_field(m, which)
        for p in POINTS[name]:
            g = lm.chart_to_group(*p, m)
            ref = lm.left_invariant_derivative(matrix_test_function, g, m.element(which))
            assert abs(field.apply(f, p) - ref) <= 1e-6

    @pytest.mark.parametrize("which,A", [("Xhat", "X"), ("Yhat", "Y")])
    def test_heisenberg_right_invariant(self, which, A):
        m = lm.HEISENBERG
        f = lm.chart_function(matrix_test_function, m)
        field = lm.coordinate_vector_field(m, which)
        for p in POINTS["heisenberg"]:
            g = lm.chart_to_group(*p, m)
            ref = lm.right_invariant_derivative(matrix_test_function, g, m.element(A))
            assert abs(field.apply(f, p) - ref) <= 1e-6

    def test_W_on_x_plus_iy(self):
        # W (x + i y) = (X - iY)(x + iy) = 1 + 1 = 2 at any point
        f = lm.chart_function(lambda g: complex(g[0, 1] + 1j * g[1, 2]), lm.HEISENBERG)
        W = lm.coordinate_vector_field("h", "W")
        for p in POINTS["heisenberg"]:
            assert abs(W.apply(f, p) - 2) <= 1e-7

    def test_dr_variant_is_not_the_field(self):
        f = lm.chart_function(matrix_test_function, lm.HEISENBERG)
        p = POINTS["heisenberg"][0]
        g = lm.chart_to_group(*p, lm.HEISENBERG)
        ref = (lm.left_invariant_derivative(matrix_test_function, g, lm.HEISENBERG.X)
               - 1j * lm.left_invariant_derivative(matrix_test_function, g, lm.HEISENBERG.Y))
        partials = lm.chart_partials(f, p)
        variant = complex(lm.heisenberg_W_dr_variant(p[0], p[1]) @ partials)
        assert abs(variant - ref) > 1e-2
        assert abs(lm.coordinate_vector_field("h", "W").apply_partials(partials, p) - ref) <= 1e-6

    @pytest.mark.parametrize("name", GROUPS)
    def test_bracket_residual(self, name):
        def f(r, t, z):
            return np.cos(r) * np.sin(t + 0.3) + 0.2 * r * r * np.cos(z)

        for p in POINTS[name]:
            assert lm.field_bracket_residual(name, f, p) <= 1e-4

    def test_singular_chart(self):
        with pytest.raises(lm.ChartSingularityError):
            lm.coordinate_vector_field("su2", "X").coefficients(0.0, 0.1, 0.1)
        with pytest.raises(ValueError):
            lm.coordinate_vector_field("su2", "What")


class TestHaar:
    @given(st.floats(0.05, 3.0), st.floats(0, 6.28))
    @settings(max_examples=25)
    def test_su2_density_is_sin(self, r, theta):
        ratio = lm.haar_density("su2", r, theta, 0.3) / math.sin(r)
        ref = lm.haar_density("su2", 1.0, 0.0, 0.0) / math.sin(1.0)
        assert ratio == pytest.approx(ref, rel=1e-9)

    @given(st.floats(0.05, 3.0))
    @settings(max_examples=25)
    def test_sl2_density_is_sinh(self, r):
        ratio = lm.haar_density("sl2", r, 0.4, 0.1) / math.sinh(r)
        ref = lm.haar_density("sl2", 1.0, 0.0, 0.0) / math.sinh(1.0)
        assert ratio == pytest.approx(ref, rel=1e-9)

    def test_heisenberg_cartesian_density(self):
        assert lm.haar_density("h", 1.3, 0.2, 0.0, coords="cartesian") == pytest.approx(1.0)
        assert lm.haar_density("h", 1.3, 0.2, 0.0) == pytest.approx(1.3)
