import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thetaseed.curves import HyperellipticCurve, period_matrices
from thetaseed.partitions import EVEN, ODD, HyperellipticStratumSpec, mk
from thetaseed.reports import dumps
from thetaseed.sigma import (SigmaError, aj_expansion_check, bilinear_residual, build_context, default_grid,
                             eta_matrices, expansion_check, modular_invariance_check, refined_rst_check, sigma,
                             sigma_many, stratum_for_points, transformed_context, weierstrass_sigma,
                             weierstrass_sigma_coefficients)
from thetaseed.suite import fixture_context
from thetaseed.theta import sp_generators


@pytest.fixture(scope="module")
def g1():
    return fixture_context("g1_minus_delta")


@pytest.fixture(scope="module")
def g2():
    return fixture_context("g2_minus_delta")


@pytest.fixture(scope="module")
def g3():
    return fixture_context("g3_minus_delta")


def cauchy_derivatives(f, u0, n, radius=0.05, samples=64):
    """Taylor coefficients of f at u0 up to order n from an FFT on a circle."""
    us = u0 + radius * np.exp(2j * np.pi * np.arange(samples) / samples)
    c = np.fft.fft([f(u) for u in us]) / samples
    return [c[k] / radius**k for k in range(n + 1)]


class TestWeierstrassOracle:
    def test_known_coefficients(self):
        g2, g3 = 1.3, -0.7
        c = weierstrass_sigma_coefficients(g2, g3, 11)
        assert c[1] == 1
        assert abs(c[5] + g2 / 240) < 1e-15
        assert abs(c[7] + g3 / 840) < 1e-15
        assert abs(c[9] + g2**2 / 161280) < 1e-15
        assert abs(c[11] + g2 * g3 / 2217600) < 1e-15

    def test_odd(self):
        assert abs(weierstrass_sigma(0.3 + 0.1j, 4, 0) + weierstrass_sigma(-0.3 - 0.1j, 4, 0)) < 1e-15


class TestEta:
    def test_zero_lambda(self):
        w1 = np.array([[1.0 + 0.2j]])
        eta1, eta2 = eta_matrices(np.zeros((1, 1)), w1, np.array([[1j]]))
        assert np.all(eta1 == 0)
        assert np.allclose(eta2, -0.5j * np.pi / w1)

    def test_singular_omega(self):
        with pytest.raises(SigmaError):
            eta_matrices(np.zeros((2, 2)), np.zeros((2, 2)), np.eye(2) * 1j)

    @pytest.mark.parametrize("name, tol", [("g1", 1e-8), ("g2", 1e-6), ("g3", 1e-6)])
    def test_bilinear_relation(self, request, name, tol):
        assert request.getfixturevalue(name).bilinear_residual() < tol

    def test_symmetric_shift_keeps_relation(self, g2):
        c = np.array([[0.3, -0.2], [-0.2, 0.5]])
        e1, e2 = eta_matrices(g2.Lam, g2.omega1, g2.Omega, c, g2.omega2)
        assert bilinear_residual(g2.omega1, g2.omega2, e1, e2) < 1e-6


class TestSigmaGenus1:
    def test_derivative_at_zero(self, g1):
        h = 1e-4
        assert abs((sigma(g1, [h]) - sigma(g1, [-h])) / (2 * h) - 1) < 1e-6
        assert abs(sigma(g1, [0])) < 1e-14

    @settings(max_examples=20)
    @given(st.floats(0, 0.5), st.floats(0, 2 * np.pi))
    def test_matches_weierstrass(self, g1, r, t):
        u = r * np.exp(1j * t)
        assert abs(sigma(g1, [u]) - weierstrass_sigma(u, 4.0, 0.0)) < 1e-6

    def test_pe_differential_equation(self, g1):
        # wp = -(log sigma)'' satisfies wp'^2 = 4 wp^3 - 4 wp
        u0 = 0.31 + 0.22j
        c = cauchy_derivatives(lambda u: np.log(sigma(g1, [u])), u0, 3)
        wp, dwp = -2 * c[2], -6 * c[3]
        assert abs(dwp**2 - (4 * wp**3 - 4 * wp)) < 1e-8 * abs(dwp) ** 2

    def test_batch_matches_pointwise_and_is_deterministic(self, g1):
        grid = default_grid(1)
        a = sigma_many(g1, grid)
        assert np.allclose(a, [sigma(g1, u) for u in grid], atol=1e-15)
        assert np.array_equal(a, sigma_many(g1, grid))


class TestParity:
    @pytest.mark.parametrize("name", ["g1", "g2", "g3"])
    def test_half_period_parity(self, request, name):
        ctx = request.getfixturevalue(name)
        grid = default_grid(ctx.g, n=9, scale=0.3)
        sign = (-1) ** ctx.lam.weight
        assert np.max(np.abs(sigma_many(ctx, -grid) - sign * sigma_many(ctx, grid))) < 1e-10


class TestExpansion:
    def test_genus1_jet(self, g1):
        rep = expansion_check(g1)
        assert rep.passed and rep.residual < 1e-3

    def test_genus2_jet(self, g2):
        rep = expansion_check(g2)
        assert rep.passed and g2.lam.parts == (2, 1)

    def test_genus2_dual(self, g2):
        assert expansion_check(g2, dual=True).passed

    def test_branch_point_fixture(self):
        ctx = fixture_context("g2_branch_point")
        assert ctx.lam.parts == (1,)
        assert expansion_check(ctx).passed


class TestRefinedSingularity:
    def test_genus1(self, g1):
        rep = refined_rst_check(g1)
        assert rep.passed

    def test_genus2_pattern(self, g2):
        uev, z = g2.u_ev, g2.e * 0
        scale = max(abs(g2.evaluator.theta(np.array([0.2, 0.1j]), g2.eps)), 1)
        for I in ([], [1], [1, 1]):
            assert abs(uev.derivative(I, z, g2.eps)) < 1e-8 * scale
        assert abs(uev.derivative([3], z, g2.eps)) > 1e-3 * scale
        assert refined_rst_check(g2).passed

    def test_genus3_first_derivatives_vanish(self, g3):
        assert mk(g3.profile, 0) == 2
        uev = g3.u_ev
        for w in g3.gaps:
            assert abs(uev.derivative([w], np.zeros(3), g3.eps)) < 1e-8
        assert refined_rst_check(g3).passed

    def test_wrong_a0_fails(self, g2):
        assert not refined_rst_check(g2, a_entries=(1,)).passed


class TestAbelJacobiOrders:
    @pytest.mark.parametrize("k, power", [(1, 2), (2, 1)])
    def test_genus2(self, g2, k, power):
        rep = aj_expansion_check(g2, k)
        assert rep.passed
        assert rep.details["leading_power"] == power

    def test_precondition(self):
        ctx = fixture_context("g2_branch_point")  # lambda = (1), m_1 = 0
        with pytest.raises(ValueError):
            aj_expansion_check(ctx, 2)


class TestModular:
    def test_identity(self, g2):
        rep = modular_invariance_check(g2, np.eye(4, dtype=int))
        assert rep.residual == 0

    def test_non_symplectic(self, g1):
        with pytest.raises(SigmaError):
            transformed_context(g1, np.array([[1, 1], [1, 1]]))

    @pytest.mark.parametrize("gen", ["S", "T"])
    def test_genus1_generators(self, g1, gen):
        assert modular_invariance_check(g1, sp_generators(1)[gen], tol=1e-6).passed

    def test_genus2_generators(self, g2):
        for M in sp_generators(2).values():
            assert modular_invariance_check(g2, M, tol=1e-4).passed

    def test_composite_element(self, g2):
        gens = sp_generators(2)
        M = gens["J"] @ gens["T_12"] @ gens["R_shear"]
        assert modular_invariance_check(g2, M, tol=1e-4).passed


class TestContext:
    def test_stratum_for_points(self):
        assert stratum_for_points(2, 0) == HyperellipticStratumSpec(2, 1, EVEN)
        assert stratum_for_points(3, 0) == HyperellipticStratumSpec(3, 2, ODD)
        assert stratum_for_points(2, 1) == HyperellipticStratumSpec(2, 1, ODD)

    def test_involution_pair_rejected(self):
        c = HyperellipticCurve((-2.1, -1.3, -0.4, 0.5, 1.1, 1.9, 2.8))
        p = c.point(0.2 + 0.7j)
        with pytest.raises(SigmaError, match="involution"):
            build_context(c, [p, c.involution(p)], periods=period_matrices(c))

    def test_snapshot_serializable(self, g2):
        snap = json.loads(dumps(g2.snapshot()))
        assert snap["lambda"] == [2, 1] and snap["A0"] == [3] and snap["c0"] == -1
