"""Sigma functions normalized by their leading Schur jet, and the checks built on them.

sigma(u) = exp(u^T eta_1 omega_1^{-1} u / 2) theta[e]((2 omega_1)^{-1} u) / C_e,
C_e = c_0 d_{A_0} theta[e](0), derivatives taken in u = (u_{w_1}, ..., u_{w_g}).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from itertools import combinations_with_replacement
from math import factorial
from typing import Sequence

import numpy as np

from .curves import (AbelJacobi, CurvePeriods, CurvePoint, HyperellipticCurve, RiemannConstant, characteristic_of,
                     period_matrices, riemann_constant, theta_divisor_point)
from .partitions import (EVEN, ODD, GapProfile, HyperellipticStratumSpec, Partition, extended_a_sequence,
                         hyperelliptic_gaps, mk)
from .schur import schur
from .theta import (ThetaEvaluator, UEvaluator, blocks, even_theta_constants, is_symplectic, klein_lambda,
                    symplectic_transform)


class SigmaError(ValueError):
    pass


def eta_matrices(Lam: np.ndarray, omega1: np.ndarray, Omega: np.ndarray, c: np.ndarray | None = None,
                 omega2: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """eta_1 = omega_1^{-T} Lambda, eta_2 = -(pi i / 2) omega_1^{-T} + omega_1^{-T} Lambda Omega.

    A symmetric shift ``c`` replaces eta_k by eta_k - c omega_k.
    """
    if abs(np.linalg.det(omega1)) < 1e-300:
        raise SigmaError("omega_1 is singular")
    wt = np.linalg.inv(omega1).T
    eta1 = wt @ Lam
    eta2 = -0.5j * np.pi * wt + wt @ Lam @ Omega
    if c is not None:
        c = np.asarray(c)
        w2 = omega1 @ Omega if omega2 is None else omega2
        eta1 = eta1 - c @ omega1
        eta2 = eta2 - c @ w2
    return eta1, eta2


def bilinear_residual(omega1, omega2, eta1, eta2) -> float:
    g = omega1.shape[0]
    M = np.block([[omega1, omega2], [eta1, eta2]])
    J = np.block([[np.zeros((g, g)), np.eye(g)], [-np.eye(g), np.zeros((g, g))]])
    return float(np.max(np.abs(M.T @ J @ M + 0.5j * np.pi * J)))


@dataclass
class SigmaContext:
    curve: HyperellipticCurve
    periods: CurvePeriods
    omega1: np.ndarray
    omega2: np.ndarray
    Omega: np.ndarray
    Lam: np.ndarray
    eta1: np.ndarray
    eta2: np.ndarray
    eps: tuple[np.ndarray, np.ndarray]
    e: np.ndarray
    profile: GapProfile
    evaluator: ThetaEvaluator
    C: complex
    c0: int
    A0: tuple[int, ...]
    c_shift: np.ndarray | None = None
    delta: RiemannConstant | None = None
    aj: AbelJacobi | None = None

    @property
    def g(self) -> int:
        return self.Omega.shape[0]

    @property
    def lam(self) -> Partition:
        return self.profile.partition

    @property
    def gaps(self) -> tuple[int, ...]:
        return self.profile.w

    @property
    def L(self) -> np.ndarray:
        return np.linalg.inv(2 * self.omega1)

    @property
    def u_ev(self) -> UEvaluator:
        return UEvaluator(self.evaluator, self.L, self.gaps)

    def bilinear_residual(self) -> float:
        return bilinear_residual(self.omega1, self.omega2, self.eta1, self.eta2)

    def snapshot(self) -> dict:
        def enc(m):
            m = np.atleast_1d(np.asarray(m, dtype=complex))
            return [[v.real, v.imag] for v in m.ravel()]

        return {
            "genus": self.g,
            "lambda": list(self.lam.parts),
            "A0": list(self.A0),
            "c0": self.c0,
            "eps1": list(map(float, self.eps[0])),
            "eps2": list(map(float, self.eps[1])),
            "C": [self.C.real, self.C.imag],
            "Omega": enc(self.Omega),
            "eta1": enc(self.eta1),
        }


def stratum_for_points(g: int, n_finite: int) -> HyperellipticStratumSpec:
    """Stratum of sum of n finite points plus (g-1-n) copies of infinity, minus the Riemann divisor."""
    if (g + 1 - n_finite) % 2 == 0:
        return HyperellipticStratumSpec(g, (g + 1 - n_finite) // 2, ODD)
    return HyperellipticStratumSpec(g, (g - n_finite) // 2, EVEN)


def build_context(curve: HyperellipticCurve, q: Sequence[CurvePoint] = (), profile: GapProfile | None = None,
                  theta_tol: float = 1e-14, min_radius: int = 6, c_shift=None, periods: CurvePeriods | None = None,
                  delta: RiemannConstant | None = None, sign: int | None = None,
                  a_entries: Sequence[int] | None = None) -> SigmaContext:
    """Context for e = sum I(q_i) - delta; with no q this is e = -delta."""
    g = curve.genus
    periods = periods or period_matrices(curve)
    aj = AbelJacobi(curve, periods)
    if delta is None:
        ball = 0.5 * float(np.sum(np.abs(periods.Omega.imag), axis=1).max()) + 0.6
        wide = ThetaEvaluator(periods.Omega, tol=1e-12, ball=ball, max_order=0)
        delta = riemann_constant(aj, wide.theta_reduced)
    finite = [p for p in q if not p.is_infinity]
    for a in range(len(finite)):
        for b in range(a + 1, len(finite)):
            pa, pb = finite[a], finite[b]
            if abs(pa.x - pb.x) < 1e-12 and abs(pa.y + pb.y) < 1e-9 * max(1.0, abs(pa.y)):
                raise SigmaError("points are exchanged by the hyperelliptic involution")
    e = theta_divisor_point(aj, delta, finite)
    if profile is None:
        profile = hyperelliptic_gaps(stratum_for_points(g, len(finite)))
    eps1, eps2 = characteristic_of(periods.Omega, e)
    eps1 = eps1 - np.floor(eps1 + 1e-12)
    ev = ThetaEvaluator(periods.Omega, tol=theta_tol, ball=1.0, min_radius=min_radius,
                        deriv_scale=float(np.abs(np.linalg.inv(2 * periods.omega1)).max()))
    consts = even_theta_constants(ev)
    Lam = klein_lambda(ev, consts)
    eta1, eta2 = eta_matrices(Lam, periods.omega1, periods.Omega, c_shift, periods.omega2)
    seq = extended_a_sequence(profile, 0)
    A0 = tuple(a_entries) if a_entries is not None else seq.entries
    c0 = seq.sign if sign is None else sign
    L = np.linalg.inv(2 * periods.omega1)
    uev = UEvaluator(ev, L, profile.w)
    dA0 = uev.derivative(A0, np.zeros(g), (eps1, eps2))
    C = c0 * dA0
    if abs(C) == 0:
        raise SigmaError("normalization constant vanishes")
    return SigmaContext(curve, periods, periods.omega1, periods.omega2, periods.Omega, Lam, eta1, eta2,
                        (eps1, eps2), e, profile, ev, C, c0, A0, None if c_shift is None else np.asarray(c_shift),
                        delta, aj)


def sigma(ctx: SigmaContext, u) -> complex:
    u = np.atleast_1d(np.asarray(u, dtype=complex))
    quad = 0.5 * u @ ctx.eta1 @ np.linalg.solve(ctx.omega1, u)
    z = ctx.L @ u
    return complex(np.exp(quad) * ctx.evaluator.theta(z, ctx.eps) / ctx.C)


def sigma_many(ctx: SigmaContext, us: np.ndarray) -> np.ndarray:
    us = np.atleast_2d(np.asarray(us, dtype=complex))
    P = ctx.eta1 @ np.linalg.inv(ctx.omega1)
    quad = 0.5 * np.einsum("ni,ij,nj->n", us, P, us)
    zs = us @ ctx.L.T
    return np.exp(quad) * ctx.evaluator.theta_many(zs, ctx.eps) / ctx.C


# --------------------------------------------------------------- Weierstrass oracle


def weierstrass_sigma_coefficients(g2: float, g3: float, max_degree: int) -> dict[int, float]:
    """Taylor coefficients of the Weierstrass sigma via its classical two-index recursion."""
    a: dict[tuple[int, int], float] = {(0, 0): 1.0}

    def get(m, n):
        return a.get((m, n), 0.0) if m >= 0 and n >= 0 else 0.0

    for deg in range(4, max_degree + 1, 2):
        for n in range(0, deg // 6 + 1):
            if (deg - 6 * n) % 4:
                continue
            m = (deg - 6 * n) // 4
            a[(m, n)] = (3 * (m + 1) * get(m + 1, n - 1) + 16 / 3 * (n + 1) * get(m - 2, n + 1)
                         - (2 * m + 3 * n - 1) * (4 * m + 6 * n - 1) / 3 * get(m - 1, n))
    out: dict[int, float] = {}
    for (m, n), v in a.items():
        k = 4 * m + 6 * n + 1
        out[k] = out.get(k, 0.0) + v * (g2 / 2) ** m * (2 * g3) ** n / factorial(k)
    return out


def weierstrass_sigma(u, g2: float, g3: float, max_degree: int = 60) -> complex:
    coeffs = weierstrass_sigma_coefficients(g2, g3, max_degree)
    return sum(c * u**k for k, c in coeffs.items())


# --------------------------------------------------------------- reports


@dataclass
class CheckReport:
    name: str
    passed: bool
    residual: float
    tolerance: float
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return self.passed


def _weighted_monomials(weight: int, gaps: Sequence[int]) -> list[tuple[int, ...]]:
    out = []

    def rec(i, rest, acc):
        if i == len(gaps):
            if rest == 0:
                out.append(tuple(acc))
            return
        for e in range(rest // gaps[i] + 1):
            rec(i + 1, rest - e * gaps[i], acc + [e])

    rec(0, weight, [])
    return out


def _schur_on_gaps(mu: Partition, gaps: Sequence[int]) -> dict[tuple[int, ...], complex]:
    """Coefficients of s_mu restricted to t_{w_i} = u_{w_i}, as exponent vectors over the gap slots."""
    W = max(mu.weight, max(gaps))
    s = schur(mu, W)
    out: dict[tuple[int, ...], complex] = {}
    gap_set = set(gaps)
    for mono, c in s.terms.items():
        if any(e and (k + 1) not in gap_set for k, e in enumerate(mono)):
            continue
        key = tuple(mono[w - 1] if w - 1 < len(mono) else 0 for w in gaps)
        out[key] = out.get(key, 0) + float(c)
    return out


def graded_components(f, gaps: Sequence[int], direction: np.ndarray, radius: float, samples: int) -> np.ndarray:
    """P_n(d) for n < samples from f(rho^{w} d) on the circle |rho| = radius."""
    rhos = radius * np.exp(2j * np.pi * np.arange(samples) / samples)
    vals = np.array([f(np.array([r**w * d for w, d in zip(gaps, direction)])) for r in rhos])
    coeffs = np.fft.fft(vals) / samples
    return coeffs / radius ** np.arange(samples)


def expansion_check(ctx: SigmaContext, dual: bool = False, n_dirs: int | None = None, radius: float = 0.35,
                    samples: int = 32, tol: float = 1e-3, vanish_tol: float = 1e-6, seed: int = 7) -> CheckReport:
    """Leading weighted jet of theta[e]((2 omega_1)^{-1} u) / C_e against s_lambda(u).

    With ``dual`` the point -e is used, multiplied by (-1)^{|lambda|}, against the conjugate partition.
    """
    lam = ctx.lam
    target_mu = lam.conjugate() if dual else lam
    gaps = ctx.gaps
    sgn = (-1) ** lam.weight if dual else 1
    L = ctx.L
    ev = ctx.evaluator
    # theta[eps](-z) = theta[-eps](z), which is theta(z - e) up to a constant and a linear exponential

    def f(u):
        z = -(L @ u) if dual else L @ u
        return sgn * ev.theta(z, ctx.eps) / ctx.C

    monos = _weighted_monomials(target_mu.weight, gaps)
    expected = _schur_on_gaps(target_mu, gaps)
    rng = np.random.default_rng(seed)
    n_dirs = n_dirs or max(2 * len(monos), 4)
    rows, rhs = [], []
    lower = 0.0
    scale = 0.0
    for _ in range(n_dirs):
        d = rng.normal(size=len(gaps)) + 1j * rng.normal(size=len(gaps))
        d = d / np.linalg.norm(d)
        P = graded_components(f, gaps, d, radius, samples)
        scale = max(scale, float(np.max(np.abs(P[: target_mu.weight + 1]))))
        if target_mu.weight:
            lower = max(lower, float(np.max(np.abs(P[: target_mu.weight]))))
        rows.append([np.prod([di**e for di, e in zip(d, m)]) for m in monos])
        rhs.append(P[target_mu.weight])
    coef, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
    exp_vec = np.array([expected.get(m, 0.0) for m in monos], dtype=complex)
    rel = float(np.linalg.norm(coef - exp_vec) / max(np.linalg.norm(exp_vec), 1e-300))
    lower_rel = lower / max(scale, 1e-300)
    passed = rel < tol and lower_rel < vanish_tol
    return CheckReport(
        "theta_leading_jet_dual" if dual else "theta_leading_jet",
        passed,
        rel,
        tol,
        {
            "partition": list(target_mu.parts),
            "monomials": [list(m) for m in monos],
            "fitted": [[complex(c).real, complex(c).imag] for c in coef],
            "expected": [float(e.real) for e in exp_vec],
            "lower_weight_relative": lower_rel,
        },
    )


def _unit_ball_scale(ctx: SigmaContext, shift=None, samples: int = 64, seed: int = 3) -> float:
    rng = np.random.default_rng(seed)
    g = ctx.g
    best = 0.0
    for _ in range(samples):
        u = rng.normal(size=g) + 1j * rng.normal(size=g)
        u = u / np.linalg.norm(u) * rng.uniform(0, 1) ** (1 / (2 * g))
        z = ctx.L @ u
        best = max(best, abs(ctx.evaluator.theta(z, ctx.eps)))
    return best


def refined_rst_check(ctx: SigmaContext, vanish_tol: float = 1e-5, nondeg: float = 1e-3,
                      a_entries: Sequence[int] | None = None) -> CheckReport:
    lam = ctx.lam
    gaps = ctx.gaps
    m0 = mk(ctx.profile, 0)
    uev = ctx.u_ev
    zero = np.zeros(ctx.g)
    scale = _unit_ball_scale(ctx)
    worst_i = worst_ii = 0.0
    scanned = []
    max_size = max(lam.weight, m0)
    for size in range(0, max_size + 1):
        for I in combinations_with_replacement(gaps, size):
            by_weight = sum(I) < lam.weight
            by_degree = size < m0
            if not (by_weight or by_degree):
                continue
            v = abs(uev.derivative(I, zero, ctx.eps)) / scale
            scanned.append(list(I))
            if by_weight:
                worst_i = max(worst_i, v)
            if by_degree:
                worst_ii = max(worst_ii, v)
    A0 = tuple(a_entries) if a_entries is not None else ctx.A0
    lead = abs(uev.derivative(A0, zero, ctx.eps)) / scale
    passed = worst_i < vanish_tol and worst_ii < vanish_tol and lead > nondeg
    return CheckReport(
        "refined_singularity",
        passed,
        max(worst_i, worst_ii),
        vanish_tol,
        {"A0_derivative_normalized": lead, "nondegeneracy_threshold": nondeg, "scale": scale,
         "weight_slice_max": worst_i, "degree_slice_max": worst_ii, "scanned": scanned},
    )


def aj_expansion_check(ctx: SigmaContext, k: int, z_fixed: Sequence[complex] | None = None, radius: float = 0.08,
                       samples: int = 32, tol: float = 1e-4, sig: float = 1e-7) -> CheckReport:
    """Leading power in z_k of d_{A_k} theta(sum_{j<=k} I(p_j) + e) and its coefficient ratio."""
    g = ctx.g
    if not 1 <= k <= g:
        raise SigmaError("k must lie in [1, g]")
    if mk(ctx.profile, k - 1) == 0 or (k < g and mk(ctx.profile, k) == 0):
        raise SigmaError(f"m_{k} = 0")
    aj = ctx.aj or AbelJacobi(ctx.curve, ctx.periods)
    seq_k = extended_a_sequence(ctx.profile, k)
    seq_prev = extended_a_sequence(ctx.profile, k - 1)
    z_fixed = list(z_fixed) if z_fixed is not None else [0.11 * np.exp(0.7j * (j + 1)) for j in range(k - 1)]
    base = np.zeros(g, dtype=complex)
    for z in z_fixed[: k - 1]:
        base = base + aj.of_z(z)
    ball = float(np.max(np.abs((ctx.e + base).imag))) + 0.5
    wide = ThetaEvaluator(ctx.Omega, tol=1e-13, ball=ball, max_order=4,
                          deriv_scale=float(np.abs(ctx.L).max()))
    uev = UEvaluator(wide, ctx.L, ctx.gaps)
    G = uev.derivative(seq_prev.entries, ctx.e + base)
    zs = radius * np.exp(2j * np.pi * np.arange(samples) / samples)
    vals = np.array([uev.derivative(seq_k.entries, ctx.e + base + aj.of_z(z)) for z in zs])
    coeffs = np.fft.fft(vals) / samples / radius ** np.arange(samples)
    mags = np.abs(coeffs) * radius ** np.arange(samples)
    top = mags[: samples // 2].max()
    lead = int(next(n for n in range(samples // 2) if mags[n] > sig * top))
    expected_power = ctx.lam.part(k)
    ratio = coeffs[expected_power] / G
    target = seq_k.sign / seq_prev.sign
    err = abs(ratio - target)
    passed = lead == expected_power and err < tol
    return CheckReport(
        f"abel_jacobi_leading_order_k{k}",
        passed,
        float(err),
        tol,
        {"leading_power": lead, "expected_power": expected_power, "ratio": [ratio.real, ratio.imag],
         "expected_ratio": target, "A_k": list(seq_k.entries), "A_k_minus_1": list(seq_prev.entries)},
    )


# --------------------------------------------------------------- modular invariance


def _evaluator_like(ctx: SigmaContext, Omega, L, theta_tol, min_radius, ball=None, max_order=None) -> ThetaEvaluator:
    ev = ctx.evaluator
    return ThetaEvaluator(Omega, tol=ev.tol if theta_tol is None else theta_tol,
                          ball=ev.ball if ball is None else ball,
                          max_order=ev.max_order if max_order is None else max_order,
                          min_radius=ev.min_radius if min_radius is None else min_radius,
                          deriv_scale=float(np.abs(L).max()))


def transformed_context(ctx: SigmaContext, M: np.ndarray, theta_tol: float | None = None,
                        min_radius: int | None = None, recompute_lambda: bool = False,
                        ball: float | None = None, max_order: int | None = None) -> SigmaContext:
    M = np.asarray(M)
    if not is_symplectic(M):
        raise SigmaError("M is not symplectic")
    A, B, C, D = (b.astype(float) for b in blocks(M))
    w1 = ctx.omega1 @ D.T + ctx.omega2 @ C.T
    w2 = ctx.omega1 @ B.T + ctx.omega2 @ A.T
    e1 = ctx.eta1 @ D.T + ctx.eta2 @ C.T
    e2 = ctx.eta1 @ B.T + ctx.eta2 @ A.T
    Om_t, eps_t = symplectic_transform(ctx.Omega, ctx.eps, M)
    L = np.linalg.inv(2 * w1)
    ev = _evaluator_like(ctx, Om_t, L, theta_tol, min_radius, ball, max_order)
    Lam = ctx.Lam
    if recompute_lambda:
        Lam = klein_lambda(ev)
        e1, e2 = eta_matrices(Lam, w1, Om_t)
    uev = UEvaluator(ev, L, ctx.gaps)
    Cn = ctx.c0 * uev.derivative(ctx.A0, np.zeros(ctx.g), eps_t)
    return replace(ctx, omega1=w1, omega2=w2, Omega=Om_t, Lam=Lam, eta1=e1, eta2=e2, eps=eps_t, evaluator=ev, C=Cn)


def default_grid(g: int, n: int = 25, scale: float = 0.4, seed: int = 11) -> np.ndarray:
    if g == 1:
        side = int(round(np.sqrt(n)))
        xs = np.linspace(-scale, scale, side)
        return np.array([[complex(a, b)] for a in xs for b in xs])
    rng = np.random.default_rng(seed)
    return scale * (rng.uniform(-1, 1, size=(n, g)) + 1j * rng.uniform(-1, 1, size=(n, g)))


def modular_invariance_check(ctx: SigmaContext, M: np.ndarray, grid: np.ndarray | None = None, tol: float = 1e-6,
                             recompute_lambda: bool = False, theta_tol: float | None = None,
                             min_radius: int | None = None, ball: float | None = None,
                             max_order: int | None = None) -> CheckReport:
    """max |sigma~(u) - sigma(u)| / max |sigma| over the grid, sigma~ built from the M-transformed data."""
    grid = default_grid(ctx.g) if grid is None else np.atleast_2d(grid)
    base = ctx
    if any(v is not None for v in (theta_tol, min_radius, ball, max_order)):
        base = rebuild_evaluator(ctx, theta_tol, min_radius, ball, max_order)
    new = transformed_context(base, M, theta_tol, min_radius, recompute_lambda, ball, max_order)
    s0 = sigma_many(base, grid)
    s1 = sigma_many(new, grid)
    res = float(np.max(np.abs(s1 - s0)) / np.max(np.abs(s0)))
    return CheckReport("sigma_modular_invariance", res < tol, res, tol,
                       {"M": np.asarray(M).tolist(), "grid_points": len(grid), "recompute_lambda": recompute_lambda,
                        "radius": new.evaluator.radius})


def rebuild_evaluator(ctx: SigmaContext, theta_tol: float | None, min_radius: int | None, ball: float | None = None,
                      max_order: int | None = None) -> SigmaContext:
    ev = _evaluator_like(ctx, ctx.Omega, ctx.L, theta_tol, min_radius, ball, max_order)
    uev = UEvaluator(ev, ctx.L, ctx.gaps)
    C = ctx.c0 * uev.derivative(ctx.A0, np.zeros(ctx.g), ctx.eps)
    return replace(ctx, evaluator=ev, C=C)


def convergence_witness(ctx: SigmaContext, M: np.ndarray,
                        tolerances: Sequence[float] = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-8, 1e-10),
                        min_radius: int = 1, floor: float = 1e-13, grid: np.ndarray | None = None) -> tuple[bool, list[float]]:
    """Modular residuals as the theta tolerance tightens; must be non-increasing down to ``floor``.

    The evaluators are sized for the grid alone (derivative order |A_0|, ball from the grid) so the
    truncation radius actually responds to the tolerance.
    """
    grid = default_grid(ctx.g) if grid is None else np.atleast_2d(grid)
    M = np.asarray(M)
    A, B, C, D = (b.astype(float) for b in blocks(M))
    L_new = np.linalg.inv(2 * (ctx.omega1 @ D.T + ctx.omega2 @ C.T))
    ball = max(float(np.abs((grid @ ctx.L.T).imag).max()), float(np.abs((grid @ L_new.T).imag).max())) + 0.05
    res = []
    for t in tolerances:
        r = modular_invariance_check(ctx, M, grid, tol=np.inf, theta_tol=t, min_radius=min_radius, ball=ball,
                                     max_order=len(ctx.A0)).residual
        res.append(max(r, floor))
    ok = all(b <= a * (1 + 1e-9) for a, b in zip(res, res[1:]))
    return ok, res
