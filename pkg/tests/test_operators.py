import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from rieszlab import blocks as blk
from rieszlab import operators as ops

SU2_SPINS = [k / 2 for k in range(1, 9)]


class TestIntertwining:
    @pytest.mark.parametrize("j", SU2_SPINS)
    def test_su2(self, j):
        res = ops.intertwining_residuals(blk.su2_block(j))
        assert max(res.values()) <= 1e-10

    @pytest.mark.parametrize("d", range(2, 6))
    def test_sl2(self, d):
        res = ops.intertwining_residuals(blk.sl2_block(d))
        assert max(res.values()) <= 1e-10

    @pytest.mark.parametrize("lam", [0.5, -1.0, 2.0])
    def test_heisenberg(self, lam):
        res = ops.intertwining_residuals(blk.heisenberg_fiber(lam, 1, 16, 4))
        assert set(res) == {"WL", "WZ"}
        assert max(res.values()) <= 1e-10

    def test_two_copies_report_each_copy(self):
        res = ops.intertwining_residuals(blk.heisenberg_fiber(1.0, 2, 5, 2))
        assert set(res) == {"WL[0]", "WZ[0]", "WL[1]", "WZ[1]"}
        assert max(res.values()) <= 1e-10


class TestTwoRoutes:
    @pytest.mark.parametrize("j", [0.5, 1, 1.5, 2])
    @pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0])
    def test_su2_against_oracles(self, j, alpha):
        b = blk.su2_block(j)
        R, _ = ops.riesz2_resolvent(b, alpha)
        S = ops.riesz2_integral(b, alpha)
        W = b.X - 1j * b.Y
        assert np.abs(R - oracles.riesz2_by_pseudoinverse(b.X, b.Y, b.rho, alpha)).max() <= 1e-10
        assert np.abs(S - 2 * oracles.pair_integral_quad(b.L, W @ W, alpha)).max() <= 1e-8
        assert np.abs(S - R).max() <= 1e-8

    @pytest.mark.parametrize("alpha", [0.0, 1.0])
    def test_sl2_dimension_two(self, alpha):
        rep = ops.two_route_residual(blk.sl2_block(2), alpha)
        assert rep.passed

    @pytest.mark.parametrize("d", [3, 4, 5])
    def test_sl2_higher_dimensions_fail_loudly(self, d):
        with pytest.raises(ValueError):
            ops.two_route_residual(blk.sl2_block(d), 0.0)

    @pytest.mark.parametrize("lam", [0.5, -0.5, 1.0, -1.0, 2.0])
    def test_heisenberg_fiber(self, lam):
        rep = ops.two_route_residual(blk.heisenberg_fiber(lam, 1, 20, 5), 0.0)
        assert rep.residual <= 1e-8

    def test_heisenberg_cross_terms(self):
        b = blk.heisenberg_fiber(1.0, 2, 5, 2)
        for j in range(2):
            for k in range(2):
                assert ops.two_route_residual(b, 0.0, j, k).residual <= 1e-8

    def test_report_fields(self):
        rep = ops.two_route_residual(blk.su2_block(1), 0.5)
        d = rep.to_dict()
        assert d["passed"] and d["notes"]["alpha"] == 0.5


class TestShift:
    @pytest.mark.parametrize("t", [0.1, 0.5, 1.0])
    @pytest.mark.parametrize("j", [0.5, 1, 2])
    def test_su2(self, t, j):
        res = ops.shift_identity_residual(blk.su2_block(j), t)
        assert res["pairing"] <= 1e-9 and res["WPt"] <= 1e-9

    @pytest.mark.parametrize("d", [2, 3])
    def test_sl2_pairing_uses_rho(self, d):
        assert ops.shift_identity_residual(blk.sl2_block(d), 0.5)["pairing"] <= 1e-9

    @pytest.mark.parametrize("lam", [0.5, -1.0])
    def test_heisenberg_sign(self, lam):
        res = ops.shift_identity_residual(blk.heisenberg_fiber(lam, 1, 16, 4), 0.5)
        assert res["minus"] <= 1e-9
        assert res["plus"] > 1e-2


class TestRealParts:
    @pytest.mark.parametrize("j", [0.5, 1, 2])
    def test_real_imag_split(self, j):
        assert ops.real_imag_residual(blk.su2_block(j), 0.5) <= 1e-10

    @pytest.mark.parametrize("j", [0.5, 1, 1.5, 3])
    def test_antisymmetric_pair_integral(self, j):
        b = blk.su2_block(j)
        A = np.array([[0, 1], [-1, 0]])
        R0, _, _ = blk.spectral_pinv(b, 0.5)
        assert ops.restricted_norm(2 * ops.S_A_operator(b, A, 0.5) - b.Z @ R0, b) <= 1e-9

    def test_S_abc_is_linear(self):
        b = blk.su2_block(1)
        s1 = ops.build_S_abc(b, ops.OperatorSpec(1, 0, 0, alpha=0.5))
        s2 = ops.build_S_abc(b, ops.OperatorSpec(0, 1, 2, alpha=0.5))
        s3 = ops.build_S_abc(b, ops.OperatorSpec(1, 1, 2, alpha=0.5))
        assert np.allclose(s1 + s2, s3)


class TestBounds:
    @given(st.floats(1.001, 50.0))
    def test_p_star_duality(self, p):
        q = p / (p - 1)
        assert ops.p_star(p) == pytest.approx(ops.p_star(q))
        assert ops.p_star(p) >= 2

    def test_p2_unit_spec(self):
        bv = ops.bound_value(ops.OperatorSpec(1, 0, 0, p=2))
        assert bv.theorem_bound == 1.0
        assert bv.cot_bound == pytest.approx(1.0, abs=1e-15)

    def test_p4_full_spec(self):
        assert ops.bound_value(ops.OperatorSpec(1, 1, 1, p=4)).theorem_bound == 9.0

    def test_matrix_norm_of_martingale_matrix(self):
        A = np.array([[-1, 1j], [1j, 1]])
        assert abs(ops.matrix_norm(A) - math.sqrt(2)) <= 1e-12
        assert np.array_equal(ops.martingale_matrix(1, 0, 0), A)
        bv = ops.bound_value(ops.OperatorSpec(0, 1, 0, p=2), A)
        assert bv.lemma31_bound == pytest.approx(math.sqrt(2) / 2)

    def test_complex_spectral_norm_differs(self):
        # as a complex matrix A is 2 times a rank-one projection
        A = ops.martingale_matrix(1, 0, 0)
        assert np.linalg.norm(A, 2) == pytest.approx(2.0)

    @pytest.mark.parametrize("n,j,k", [(2, 0, 1), (3, 2, 0)])
    def test_matrix_norm_general_n(self, n, j, k):
        assert ops.matrix_norm(ops.martingale_matrix(n, j, k)) == pytest.approx(math.sqrt(2))

    @pytest.mark.parametrize("kw", [dict(p=1.0), dict(p=math.inf), dict(alpha=-1.0)])
    def test_spec_validation(self, kw):
        with pytest.raises(ValueError):
            ops.OperatorSpec(1, 0, 0, **kw)
