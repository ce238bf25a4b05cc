import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thetaseed.curves import half_characteristics, is_even
from thetaseed.theta import (ThetaError, ThetaEvaluator, UEvaluator, even_theta_constants, is_symplectic,
                             klein_lambda, sp_generators, symplectic_transform)

ODD1 = (np.array([0.5]), np.array([0.5]))
SQUARE = np.array([[1j]])
OMEGA2 = np.array([[0.3 + 1.1j, 0.2 + 0.35j], [0.2 + 0.35j, -0.1 + 0.9j]])


@pytest.fixture(scope="module")
def ev1():
    return ThetaEvaluator(SQUARE, tol=1e-15, ball=1.0)


@pytest.fixture(scope="module")
def ev2():
    return ThetaEvaluator(OMEGA2, tol=1e-14, ball=1.0)


def brute_theta(Omega, z, eps, R):
    """Plain nested-loop sum over a box of radius R."""
    g = Omega.shape[0]
    e1, e2 = eps
    total = 0j
    for n in np.ndindex(*(2 * R + 1,) * g):
        v = np.array(n, dtype=float) - R + e1
        total += np.exp(1j * np.pi * v @ Omega @ v + 2j * np.pi * v @ (z + e2))
    return total


class TestValues:
    def test_jacobi_constant(self, ev1):
        # theta_3(0 | i) = pi^(1/4) / Gamma(3/4)
        expected = math.pi**0.25 / math.gamma(0.75)
        assert abs(ev1.theta(np.zeros(1)) - expected) / expected < 1e-12

    def test_high_radius_self_oracle(self, ev1):
        z = np.array([0.17 + 0.31j])
        wide = brute_theta(SQUARE, z, (np.zeros(1), np.zeros(1)), 4 * ev1.radius)
        assert abs(ev1.theta(z) - wide) / abs(wide) < 1e-12

    def test_genus2_brute(self, ev2):
        z = np.array([0.1 - 0.2j, -0.3 + 0.15j])
        eps = (np.array([0.5, 0.0]), np.array([0.5, 0.5]))
        assert abs(ev2.theta(z, eps) - brute_theta(OMEGA2, z, eps, 14)) < 1e-12

    def test_jacobi_derivative_formula(self, ev1):
        # theta_1' = pi theta_2 theta_3 theta_4 in these coordinates
        d = ev1.theta_z([0], np.zeros(1), ODD1)
        consts = [ev1.theta(np.zeros(1), (np.array([a]), np.array([b]))) for a, b in ((0.5, 0), (0, 0), (0, 0.5))]
        assert abs(abs(d) - math.pi * abs(np.prod(consts))) < 1e-12

    def test_integer_shift_of_characteristic(self, ev2):
        z = np.array([0.2 + 0.1j, -0.1j])
        a = ev2.theta(z, (np.array([0.5, 0.0]), np.array([0.5, 0.0])))
        b = ev2.theta(z, (np.array([1.5, -1.0]), np.array([0.5, 0.0])))
        assert abs(a - b) < 1e-13

    def test_ball_enforced(self, ev1):
        with pytest.raises(ThetaError, match="ball"):
            ev1.theta(np.array([2j]))

    def test_rejects_bad_omega(self):
        with pytest.raises(ThetaError):
            ThetaEvaluator(np.array([[1.0 - 1j]]))
        with pytest.raises(ThetaError):
            ThetaEvaluator(np.array([[1j, 0.1], [0.2, 1j]]))

    def test_tail_bound_certified(self, ev2):
        assert ev2.tail_bound < ev2.tol

    def test_theta_many_matches(self, ev2):
        zs = np.array([[0.1, 0.2j], [0.3 - 0.1j, 0.05]])
        assert np.allclose(ev2.theta_many(zs), [ev2.theta(z) for z in zs], atol=1e-14)


class TestSymmetry:
    @settings(max_examples=25)
    @given(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
    def test_even_and_quasi_periodic(self, ev2, a, b, c, d):
        z = np.array([a + 1j * b, c + 1j * d])
        assert abs(ev2.theta(z) - ev2.theta(-z)) < 1e-12
        assert ev2.quasi_periodicity_residual(z, [1, -1], [0, 2]) < 1e-10
        eps = (np.array([0.5, 0.5]), np.array([0.0, 0.5]))
        assert ev2.quasi_periodicity_residual(z, [0, 1], [1, 0], eps) < 1e-10

    def test_odd_constants_vanish(self, ev2):
        for e1, e2 in half_characteristics(2):
            if not is_even(e1, e2):
                assert abs(ev2.theta(np.zeros(2), (e1, e2))) < 1e-13

    def test_odd_derivative_of_even_theta_vanishes(self, ev2):
        assert abs(ev2.theta_z([0], np.zeros(2))) < 1e-12
        assert abs(ev2.theta_z([0, 1, 1], np.zeros(2))) < 1e-10

    def test_empty_derivative(self, ev2):
        z = np.array([0.1, 0.2j])
        assert ev2.theta_z([], z) == ev2.theta(z)


class TestDerivatives:
    @pytest.mark.parametrize("order", [1, 2, 3, 4])
    def test_finite_difference(self, ev2, order):
        rng = np.random.default_rng(order)
        z = 0.2 * (rng.normal(size=2) + 1j * rng.normal(size=2))
        dirs = [rng.normal(size=2) for _ in range(order)]
        exact = ev2.theta_dir(dirs, z)
        assert abs(exact - ev2.finite_difference(dirs, z)) < 1e-7 * max(abs(exact), 1)

    def test_u_evaluator_chain_rule(self, ev2):
        L = np.array([[0.4, 0.1j], [-0.2, 0.3]])
        uev = UEvaluator(ev2, L, (1, 3))
        assert np.array_equal(uev.direction(3), L[:, 1])
        with pytest.raises(ThetaError):
            uev.slot(2)
        u = np.array([0.1, -0.2])
        h = 1e-5
        fd = (uev.theta_at_u(u + [0, h]) - uev.theta_at_u(u - [0, h])) / (2 * h)
        assert abs(uev.derivative([3], L @ u) - fd) < 1e-8


class TestConstants:
    def test_genus1_count(self, ev1):
        assert even_theta_constants(ev1).count == 3

    def test_genus2_count(self, ev2):
        c = even_theta_constants(ev2)
        assert c.count == 10
        assert all(is_even(*e) for e in c.chars)

    def test_lambda_square_lattice(self, ev1):
        lam = klein_lambda(ev1)
        assert abs(lam[0, 0].imag) < 1e-12

    def test_lambda_symmetric_and_radius_free(self, ev2):
        a = klein_lambda(ev2)
        b = klein_lambda(ThetaEvaluator(OMEGA2, tol=1e-14, ball=1.0, min_radius=2 * ev2.radius))
        assert np.max(np.abs(a - a.T)) < 1e-14
        assert np.max(np.abs(a - b)) < 1e-10


class TestSymplectic:
    def test_identity(self):
        eps = (np.array([0.5, 0.0]), np.array([0.5, 0.5]))
        Om, (e1, e2) = symplectic_transform(OMEGA2, eps, np.eye(4, dtype=int))
        assert np.allclose(Om, OMEGA2) and np.allclose(e1, eps[0]) and np.allclose(e2, eps[1])

    def test_translation(self):
        Om, _ = symplectic_transform(SQUARE, ODD1, np.array([[1, 1], [0, 1]]))
        assert abs(Om[0, 0] - (1 + 1j)) < 1e-15

    def test_rejects_non_symplectic(self):
        with pytest.raises(ThetaError):
            symplectic_transform(SQUARE, ODD1, np.array([[2, 0], [0, 1]]))

    @pytest.mark.parametrize("g", [1, 2])
    def test_generators_preserve_siegel_space(self, g):
        Om = SQUARE if g == 1 else OMEGA2
        for M in sp_generators(g).values():
            assert is_symplectic(M)
            Om_t, _ = symplectic_transform(Om, (np.zeros(g), np.zeros(g)), M)
            assert np.max(np.abs(Om_t - Om_t.T)) < 1e-14
            assert np.min(np.linalg.eigvalsh(Om_t.imag)) > 0

    def test_odd_characteristic_stays_odd(self):
        eps = (np.array([0.5, 0.5]), np.array([0.5, 0.0]))
        for M in sp_generators(2).values():
            _, (e1, e2) = symplectic_transform(OMEGA2, eps, M)
            assert not is_even(e1 % 1, e2 % 1)
