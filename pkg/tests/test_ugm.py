import random
from fractions import Fraction
from math import factorial

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from thetaseed.partitions import EVEN, ODD, HyperellipticStratumSpec, Partition, hyperelliptic_gaps, minus_delta_spec
from thetaseed.schur import schur
from thetaseed.series import ExactSeries
from thetaseed.suite import KP_CELLS, negative_control
from thetaseed.ugm import (FrameError, UGMFrame, adjoint_wave, frame_from_wave, hirota_residue, kp_equation_check,
                           box_partitions, kp_expression, plucker, projective_match, recovered_plucker,
                           tau_from_coefficients, tau_from_frame, tau_k, tau_vanishing_check, theorem_tauAJ_check)

P = Partition.of
cells = st.sampled_from(KP_CELLS)


@st.composite
def frames(draw, lam=None, band=3):
    lam = draw(cells) if lam is None else lam
    seed = draw(st.integers(0, 10**6))
    return UGMFrame.random(lam, band, lam.length + 1, random.Random(seed))


class TestFrame:
    def test_normalization_enforced(self):
        with pytest.raises(FrameError):
            UGMFrame(P(2, 1), 3, 2, {(1, -1): 5})  # row 1 is the pivot of column -1

    def test_band_enforced(self):
        f = UGMFrame(P(1), 2, 1)
        with pytest.raises(FrameError):
            f.with_entry(f.pivot(-1) + 3, -1, 1)

    def test_json_round_trip(self):
        f = UGMFrame.random(P(2, 1), 3, 3, random.Random(4), rational=True)
        assert UGMFrame.from_json(f.to_json()) == f

    def test_plucker_examples(self):
        f = UGMFrame.random(P(2, 1), 3, 3, random.Random(1))
        assert plucker(f, P(2, 1)) == 1
        assert plucker(f, P(2)) == 0
        assert plucker(f, P(1, 1, 1)) == 0
        bare = UGMFrame(P(2, 1), 3, 3)
        assert plucker(bare, P(3, 1)) == 0

    @given(frames(lam=Partition()))
    def test_three_term_plucker_relation(self, f):
        # xi_0 xi_(2,2) - xi_(1) xi_(2,1) + xi_(2) xi_(1,1) = 0
        x = {mu: plucker(f, mu) for mu in (P(), P(1), P(2), P(1, 1), P(2, 1), P(2, 2))}
        assert x[P()] * x[P(2, 2)] - x[P(1)] * x[P(2, 1)] + x[P(2)] * x[P(1, 1)] == 0

    @given(frames())
    def test_support_above_lambda(self, f):
        for mu in box_partitions(f.lam.weight + 3, 4, 6):
            if plucker(f, mu):
                assert mu.contains(f.lam)


class TestTau:
    def test_trivial_cells(self):
        assert tau_from_frame(UGMFrame(Partition(), 3, 1), 6).series == 1
        assert tau_from_frame(UGMFrame(P(1), 3, 1), 6).series == ExactSeries.t(1, 6)

    @given(frames(lam=P(2, 1)))
    def test_leading_part_is_schur(self, f):
        tau = tau_from_frame(f, 9)
        assert tau.series.homogeneous(3) == schur(P(2, 1), 9)
        assert tau.series.min_weight() == 3

    def test_tau_k(self):
        tau = tau_from_frame(UGMFrame(P(2, 1), 3, 2), 6)
        assert tau_k(tau, 0) == 1
        assert tau_k(tau, 1) == schur(P(2), 6)
        assert tau_k(tau, 2) == tau.series


class TestHirota:
    def test_vacuum(self):
        assert hirota_residue(tau_from_coefficients({Partition(): 1}, 9), 8).is_zero()
        assert kp_equation_check(tau_from_coefficients({Partition(): 1}, 9))

    def test_cutoff_precondition(self):
        with pytest.raises(ValueError, match="too small"):
            hirota_residue(tau_from_coefficients({Partition(): 1}, 8), 8)

    def test_sum_of_hooks_is_not_a_counterexample(self):
        # s_(1) + s_(3) satisfies every Plücker relation; it comes from a frame
        tau = tau_from_coefficients({P(1): 1, P(3): 1}, 12)
        assert kp_expression(tau).is_zero()
        assert hirota_residue(tau, 10).is_zero()

    def test_negative_control(self):
        tau = negative_control()
        assert not hirota_residue(tau, 12).is_zero()
        assert not kp_equation_check(tau)

    @pytest.mark.parametrize("lam", [P(1), P(2, 1), P(3, 2, 1)])
    def test_kp_equation_on_frames(self, lam):
        f = UGMFrame.random(lam, 3, lam.length + 1, random.Random(lam.weight))
        assert kp_equation_check(tau_from_frame(f, lam.weight + 8))

    @settings(max_examples=15)
    @given(frames())
    def test_residue_vanishes(self, f):
        W = 10
        tau = tau_from_frame(f, max(W + 1 - f.lam.weight, f.lam.weight + 1))
        assert hirota_residue(tau, W).is_zero()

    def test_residue_to_ts_round_trip_shape(self):
        r = hirota_residue(negative_control(), 12)
        assert not r.to_ts().is_zero()


class TestTauIdentities:
    @pytest.mark.parametrize("spec, k", [(minus_delta_spec(2), 0), (minus_delta_spec(2), 1),
                                         (minus_delta_spec(3), 2), (HyperellipticStratumSpec(3, 1, EVEN), 0)])
    def test_unperturbed_and_random(self, spec, k):
        p = hyperelliptic_gaps(spec)
        lam = p.partition
        for f in (UGMFrame(lam, 3, spec.g), UGMFrame.random(lam, 3, spec.g, random.Random(9))):
            tau = tau_from_frame(f, lam.weight + 6)
            assert theorem_tauAJ_check(tau, p, k).passed
            assert tau_vanishing_check(tau, p).passed

    def test_m_zero_rejected(self):
        p = hyperelliptic_gaps(HyperellipticStratumSpec(2, 1, ODD))
        tau = tau_from_frame(UGMFrame(p.partition, 3, 2), 5)
        with pytest.raises(ValueError):
            theorem_tauAJ_check(tau, p, 1)

    def test_wrong_sign_detected(self):
        p = hyperelliptic_gaps(minus_delta_spec(2))
        tau = tau_from_frame(UGMFrame(p.partition, 3, 2), 8)
        assert not tau_vanishing_check(tau, p, sign=1).passed


class TestWave:
    def test_vacuum_wave(self):
        w = adjoint_wave(tau_from_coefficients({Partition(): 1}, 8), 5)
        assert w.m0 == 0
        assert w.coeffs == {(a, -a): mpq((-1) ** a, factorial(a)) for a in range(6)}

    def test_t1_wave(self):
        # x Psi = (x + z) e^{-x/z}
        w = adjoint_wave(tau_from_coefficients({P(1): 1}, 8), 6)
        assert w.m0 == 1
        expected = {(0, 1): Fraction(1)}
        for a in range(1, 6):
            c = Fraction((-1) ** (a - 1), factorial(a - 1)) + Fraction((-1) ** a, factorial(a))
            if c:
                expected[(a, 1 - a)] = c
        assert {k: Fraction(int(v.numerator), int(v.denominator)) for k, v in w.coeffs.items()} == expected

    def test_staircase_cell(self):
        # tau = s_(2,1): tau(x e_1) = x^3/3, so x^3 Psi = (x^3 + 3x^2 z + 3x z^2) e^{-x/z}
        w = adjoint_wave(tau_from_frame(UGMFrame(P(2, 1), 3, 2), 12), 8)
        assert w.m0 == 3
        poly = {(3, 0): 1, (2, 1): 3, (1, 2): 3}
        expected = {}
        for (a0, p0), c in poly.items():
            for n in range(9):
                key = (a0 + n, p0 - n)
                expected[key] = expected.get(key, 0) + Fraction(c * (-1) ** n, factorial(n))
        for key, c in expected.items():
            if w.exact(*key):
                assert Fraction(str(w.coeffs.get(key, 0))) == c

    @pytest.mark.parametrize("lam", [Partition(), P(1), P(2, 1), P(2, 2, 1, 1)])
    def test_round_trip(self, lam):
        f = UGMFrame.random(lam, 3, lam.length + 1, random.Random(17))
        rec = frame_from_wave(tau_from_frame(f, 30), 14)
        assert rec.lam == lam
        src = {mu: plucker(f, mu) for mu in box_partitions(10, 10, 10)}
        ok, scale = projective_match(src, {mu: recovered_plucker(rec, mu) for mu in src})
        assert ok and scale

    def test_single_perturbation_round_trip(self):
        f = UGMFrame(P(2, 1), 3, 2).with_entry(3, -1, 2)
        rec = frame_from_wave(tau_from_frame(f, 24), 12)
        src = {mu: plucker(f, mu) for mu in box_partitions(8, 8, 8)}
        assert projective_match(src, {mu: recovered_plucker(rec, mu) for mu in src})[0]

    def test_projective_match_rejects_mismatch(self):
        assert not projective_match({P(): 1, P(1): 2}, {P(): 2, P(1): 2})[0]
        assert projective_match({P(): 1, P(1): 2}, {P(): 3, P(1): 6})[0]
