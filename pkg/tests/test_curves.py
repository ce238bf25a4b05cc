import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thetaseed.curves import (AbelJacobi, CurveError, CurvePoint, HyperellipticCurve, a_matrix, agm,
                              characteristic_of, du_basis, half_characteristics, is_even, expansion_matrix_residual,
                              period_matrices, riemann_constant, theta_divisor_point)
from thetaseed.theta import ThetaEvaluator

G1 = HyperellipticCurve((-1, 0, 1))
G2 = HyperellipticCurve((-1.7, -0.6, 0.3, 1.2, 2.4))
G2_SYM = HyperellipticCurve((-2, -1, 0, 1, 2))


@pytest.fixture(scope="module")
def setups():
    out = {}
    for name, c in (("g1", G1), ("g2", G2), ("g2sym", G2_SYM)):
        P = period_matrices(c)
        out[name] = (c, P, AbelJacobi(c, P))
    return out


def local_expansion_oracle(curve, J, radius=0.2, n=256):
    """Taylor coefficients of z^(2i-2) / sqrt(prod(1 - e z^2)) by FFT on a circle."""
    z = radius * np.exp(2j * np.pi * np.arange(n) / n)
    h = np.prod([1 - e * z**2 for e in curve.branch_points], axis=0)
    rows = []
    for i in range(1, curve.genus + 1):
        c = np.fft.fft(z ** (2 * i - 2) / np.sqrt(h)) / n
        rows.append(c[:J] / radius ** np.arange(J))
    return np.array(rows)


class TestCurve:
    def test_sorted_and_genus(self):
        c = HyperellipticCurve((1, -1, 0))
        assert c.branch_points == (-1, 0, 1) and c.genus == 1
        assert G2.weierstrass_gaps == (1, 3)

    def test_distinct_points_required(self):
        with pytest.raises(CurveError, match="not distinct"):
            HyperellipticCurve((0, 0, 1))

    def test_odd_degree_required(self):
        with pytest.raises(CurveError):
            HyperellipticCurve((0, 1, 2, 3))

    def test_json(self):
        data = G2.to_json()
        assert HyperellipticCurve.from_json(json.dumps(data)) == G2
        data["genus"] = 3
        with pytest.raises(CurveError, match="genus"):
            HyperellipticCurve.from_json(data)

    def test_point_on_curve(self):
        p = G2.point(0.7 + 0.4j)
        assert abs(p.y**2 - G2.f(p.x)) < 1e-12
        assert G2.involution(p).y == -p.y


class TestDifferentials:
    @pytest.mark.parametrize("curve", [G1, G2, G2_SYM], ids=["g1", "g2", "g2sym"])
    def test_matches_substitution_oracle(self, curve):
        basis = du_basis(curve)
        J = basis.B.shape[1]
        assert np.max(np.abs(basis.B - local_expansion_oracle(curve, J))) < 1e-12

    def test_triangular(self):
        b = du_basis(G2)
        assert b.triangular_ok()
        assert b.B[1, 2] == 1 and np.all(b.B[1, :2] == 0)  # du_3 starts at z^2

    def test_exact_coefficients(self):
        b = du_basis(G1, J=10, exact_points=[-1, 0, 1])
        # 1/sqrt((1 - z^2)(1 + z^2)) = 1/sqrt(1 - z^4) = 1 + z^4/2 + 3z^8/8 + ...
        assert b.B_exact[0] == [1, 0, 0, 0, Fraction(1, 2), 0, 0, 0, Fraction(3, 8), 0]


class TestPeriods:
    def test_agm_oracle(self, setups):
        _, P, _ = setups["g1"]
        expected = np.pi / (2 * agm(np.sqrt(2.0), 1.0))
        assert abs(abs(P.omega1[0, 0]) - expected) / expected < 1e-9

    def test_square_lattice(self, setups):
        # y^2 = x^3 - x has an automorphism of order 4, so Omega = i
        _, P, _ = setups["g1"]
        assert abs(P.Omega[0, 0] - 1j) < 1e-12

    @pytest.mark.parametrize("name", ["g1", "g2", "g2sym"])
    def test_symmetric_positive(self, setups, name):
        _, P, _ = setups[name]
        assert P.symmetry_residual() < 1e-10
        assert P.min_imag_eigenvalue() > 0

    def test_quadrature_converged(self):
        a = period_matrices(G2, tol=1e-13)
        b = period_matrices(G2, tol=1e-13, n0=256)
        assert np.max(np.abs(a.omega1 - b.omega1)) < 1e-11
        assert np.max(np.abs(a.Omega - b.Omega)) < 1e-11

    @pytest.mark.parametrize("name", ["g1", "g2", "g2sym"])
    def test_expansion_matrix_identity(self, setups, name):
        c, P, aj = setups[name]
        assert expansion_matrix_residual(P, du_basis(c), a_matrix(aj)) < 1e-8


class TestAbelJacobi:
    def test_infinity(self, setups):
        _, _, aj = setups["g2"]
        assert np.all(aj(CurvePoint.infinity()) == 0)

    @settings(max_examples=20)
    @given(st.floats(-2.5, 2.5), st.floats(0.2, 1.5), st.sampled_from(["g1", "g2"]))
    def test_involution_antisymmetry(self, setups, re, im, name):
        c, P, aj = setups[name]
        p = c.point(complex(re, im))
        v = aj(p) + aj(c.involution(p))
        e1, e2 = characteristic_of(P.Omega, v)
        assert np.max(np.abs(e1 - np.round(e1))) < 1e-9
        assert np.max(np.abs(e2 - np.round(e2))) < 1e-9

    def test_node_doubling(self, setups):
        c, P, aj = setups["g2"]
        fine = AbelJacobi(c, P, nodes=80)
        p = c.point(0.8 + 0.9j)
        assert np.max(np.abs(aj(p) - fine(p))) < 1e-8

    def test_x_zero_rejected(self, setups):
        c, _, aj = setups["g2"]
        with pytest.raises(CurveError):
            aj.u_of_point(CurvePoint(0j, complex(c.Y(0))))


class TestRiemannConstant:
    def test_genus1_odd(self, setups):
        _, P, aj = setups["g1"]
        ev = ThetaEvaluator(P.Omega, tol=1e-12, ball=4.0, max_order=0)
        d = riemann_constant(aj, ev.theta_reduced)
        assert list(d.eps1) == [0.5] and list(d.eps2) == [0.5]

    def test_genus2_unique_across_samples(self, setups):
        _, P, aj = setups["g2"]
        ev = ThetaEvaluator(P.Omega, tol=1e-12, ball=4.0, max_order=0)
        a = riemann_constant(aj, ev.theta_reduced, rng=np.random.default_rng(1))
        b = riemann_constant(aj, ev.theta_reduced, rng=np.random.default_rng(2))
        assert np.array_equal(a.eps1, b.eps1) and np.array_equal(a.eps2, b.eps2)
        assert a.residuals["runner_up"] > 1e3 * a.residuals["normalized_residual"]
        # 2 delta is a lattice point
        e1, e2 = characteristic_of(P.Omega, 2 * a.vector)
        assert np.allclose(e1, np.round(e1)) and np.allclose(e2, np.round(e2))

    def test_branch_point_on_theta_divisor(self, setups):
        c, P, aj = setups["g2"]
        ev = ThetaEvaluator(P.Omega, tol=1e-12, ball=4.0, max_order=0)
        d = riemann_constant(aj, ev.theta_reduced)
        e = theta_divisor_point(aj, d, [c.point(0.3)])
        scale = max(abs(ev.theta_reduced(np.array([0.1, 0.2j]))), 1.0)
        assert abs(ev.theta_reduced(e)) < 1e-9 * scale


def test_characteristic_parity_counts():
    for g in (1, 2, 3):
        chars = half_characteristics(g)
        even = sum(is_even(*c) for c in chars)
        assert len(chars) == 4**g and even == 2 ** (g - 1) * (2**g + 1)
