"""Verification groups shared by the ``verify`` command and the acceptance tests.

Each function returns a list of :class:`CheckResult`.  Exact checks carry tolerance 0.
"""
from __future__ import annotations

import json
import random
from dataclasses import replace
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .config import RunConfig, default_fixture_dir
from .curves import (AbelJacobi, CurvePoint, HyperellipticCurve, a_matrix, agm, du_basis, expansion_matrix_residual,
                     period_matrices)
from .partitions import (GapProfile, Partition, a_sequence, hyperelliptic_gaps, hyperelliptic_strata, mk,
                         partitions_of)
from .reports import CheckResult
from .schur import (dual_schur_identity, hankel_minimal_term, minimal_degree_term, schur, theorem1_check,
                    theorem2_check)
from .sigma import (SigmaContext, aj_expansion_check, bilinear_residual, build_context, convergence_witness,
                    expansion_check, modular_invariance_check, refined_rst_check, sigma, weierstrass_sigma)
from .theta import ThetaEvaluator, sp_generators
from .ugm import (TauSeries, UGMFrame, box_partitions, frame_from_wave, hirota_residue, kp_equation_check, plucker,
                  projective_match, recovered_plucker, tau_from_coefficients, tau_from_frame, tau_vanishing_check,
                  theorem_tauAJ_check)

KP_CELLS = (Partition(), Partition.of(1), Partition.of(2, 1), Partition.of(3, 2, 1), Partition.of(2, 2, 1, 1))
MUTATIONS = ("sign-flip", "permute-a0", "plucker")


# ------------------------------------------------------------------ fixtures


def load_profile(path: str | Path) -> GapProfile:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"profile file not found: {path}")
    return GapProfile.from_json(path.read_text())


def example_profiles(fixture_dir: Path | None = None) -> list[GapProfile]:
    d = Path(fixture_dir or default_fixture_dir())
    return [load_profile(p) for p in sorted(d.glob("profile_*.json"))]


def load_curve(path: str | Path) -> HyperellipticCurve:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"curve file not found: {path}")
    return HyperellipticCurve.from_json(path)


def parse_e_spec(curve: HyperellipticCurve, spec) -> list[CurvePoint]:
    """``"minus_delta"`` or ``{"q": [[re, im] or [re, im, sheet], ...]}`` for e = sum I(q_i) - delta."""
    if spec in (None, "minus_delta", "-delta"):
        return []
    if isinstance(spec, str):
        spec = json.loads(spec)
    pts = []
    for q in spec["q"]:
        x = complex(q[0], q[1])
        sheet = int(q[2]) if len(q) > 2 else 1
        pts.append(curve.point(x, sheet))
    return pts


@lru_cache(maxsize=16)
def _context(curve_path: str, e_key: str) -> SigmaContext:
    curve = load_curve(curve_path)
    return build_context(curve, parse_e_spec(curve, json.loads(e_key)))


def sigma_context(curve_path: str | Path, e_spec="minus_delta") -> SigmaContext:
    return _context(str(Path(curve_path).resolve()), json.dumps(e_spec, sort_keys=True))


def fixture_context(name: str, fixture_dir: Path | None = None) -> SigmaContext:
    d = Path(fixture_dir or default_fixture_dir())
    table = {f["name"]: f for f in json.loads((d / "sigma_fixtures.json").read_text())}
    entry = table[name]
    return sigma_context(d / entry["curve"], entry["e"])


# ------------------------------------------------------------------ mutations


def permuted_a_entries(profile: GapProfile, k: int) -> tuple[int, ...]:
    """A_k with the non-gap pairing reversed: b_{g-k+1-i} - b*_{m+1-i}."""
    m = mk(profile, k)
    g = profile.genus
    return tuple(sorted((profile.b_gap(g - k + 1 - i) - profile.b_star(m + 1 - i) for i in range(1, m + 1)),
                        reverse=True))


def _mutation_kwargs(profile: GapProfile, k: int, mutation: str | None) -> dict:
    seq = a_sequence(profile, k)
    if mutation == "sign-flip":
        return {"sign": -seq.sign}
    if mutation == "permute-a0":
        perm = permuted_a_entries(profile, k)
        if perm != seq.entries:
            return {"a_entries": perm}
    return {}


# ------------------------------------------------------------------ criterion groups


def schur_group(g_max: int = 5, extra: Iterable[GapProfile] = (), mutation: str | None = None) -> list[CheckResult]:
    out = []
    profiles = [hyperelliptic_gaps(s) for g in range(1, g_max + 1) for s in hyperelliptic_strata(g)] + list(extra)
    for p in profiles:
        rep = theorem2_check(p, **_mutation_kwargs(p, 0, mutation))
        out.append(CheckResult.exact(f"schur_vanishing_at_origin[b={list(p.b)}]", "schur-vanishing-at-origin",
                                     rep.passed, **rep.checks, **{k: rep.details[k] for k in ("lambda", "m0", "A0", "c0")}))
    return out


def _enlargements(profile: GapProfile, k: int) -> list[Partition]:
    """lambda itself plus partitions that differ from it by one box in the first k rows."""
    lam = profile.partition
    base = list(lam.padded(profile.genus))
    out = [lam]
    for row in range(min(k, 2)):
        if row == 0 or base[row] < base[row - 1]:
            parts = list(base)
            parts[row] += 1
            out.append(Partition(tuple(parts)))
    return out


def tau_group(g_max: int = 4, frames_per_cell: int = 20, seed: int = 0, mutation: str | None = None,
              band: int = 3, extra_weight: int = 6) -> list[CheckResult]:
    rng = random.Random(seed)
    out = []
    for g in range(1, g_max + 1):
        for s in hyperelliptic_strata(g):
            p = hyperelliptic_gaps(s)
            lam = p.partition
            ks = [k for k in range(g) if mk(p, k) > 0]
            miwa_ok = all(theorem1_check(p, mu, k, **_mutation_kwargs(p, k, mutation))
                          for k in ks for mu in _enlargements(p, k))
            out.append(CheckResult.exact(f"schur_miwa_identity[g={g},lambda={list(lam.parts)}]",
                                         "schur-derivative-on-miwa-points", miwa_ok, ks=ks))
            frames = [UGMFrame(lam, band, g)] + [UGMFrame.random(lam, band, g, rng) for _ in range(frames_per_cell)]
            bad = []
            for idx, f in enumerate(frames):
                tau = tau_from_frame(f, lam.weight + extra_weight)
                for k in ks:
                    if not theorem_tauAJ_check(tau, p, k, **_mutation_kwargs(p, k, mutation)).passed:
                        bad.append((idx, k))
                if not tau_vanishing_check(tau, p, **_mutation_kwargs(p, 0, mutation)).passed:
                    bad.append((idx, "vanishing"))
            out.append(CheckResult.exact(f"tau_miwa_identities[g={g},lambda={list(lam.parts)}]",
                                         "tau-derivative-on-miwa-points", not bad, frames=len(frames), ks=ks,
                                         failures=bad[:10]))
    return out


def negative_control() -> TauSeries:
    """1 + s_(2,2): violates the Plücker relation xi_0 xi_(2,2) = xi_(1) xi_(2,1) - xi_(2) xi_(1,1)."""
    return tau_from_coefficients({Partition(): 1, Partition.of(2, 2): 1}, 13)


def _perturbed(tau: TauSeries) -> TauSeries:
    """Add 1 to one Plücker coefficient two boxes above lambda."""
    coeffs = dict(tau.provenance)
    lam = tau.lam
    parts = list(lam.padded(max(2, lam.length)))
    parts[0] += 1
    parts[1] += 1
    target = Partition.of(2, 2) if lam.weight == 0 else Partition(tuple(parts))
    coeffs[target] = coeffs.get(target, 0) + 1
    return tau_from_coefficients(coeffs, tau.W)


def kp_group(n_frames: int = 100, seed: int = 1, joint_weight: int = 12, mutation: str | None = None,
             band: int = 3) -> list[CheckResult]:
    rng = random.Random(seed)
    out = []
    per_cell = {lam: 0 for lam in KP_CELLS}
    failures = []
    for n in range(n_frames):
        lam = KP_CELLS[n % len(KP_CELLS)]
        f = UGMFrame.random(lam, band, lam.length + 1, rng)
        W = joint_weight + 1 - lam.weight
        tau = tau_from_frame(f, max(W, lam.weight + 1))
        if mutation == "plucker":
            tau = _perturbed(tau)
        res = hirota_residue(tau, joint_weight)
        per_cell[lam] += 1
        if not res.is_zero():
            failures.append((n, list(lam.parts)))
    out.append(CheckResult.exact("hirota_bilinear_residue_vanishes", "kp-bilinear-identity", not failures,
                                 frames=n_frames, joint_weight=joint_weight,
                                 cells={str(list(k.parts)): v for k, v in per_cell.items()}, failures=failures[:10]))
    neg = negative_control()
    r = hirota_residue(neg, 12)
    out.append(CheckResult.exact("hirota_negative_control_detected", "kp-bilinear-identity",
                                 not r.is_zero() and not kp_equation_check(neg), control="1 + s_(2,2)"))
    return out


def roundtrip_group(n_frames: int = 20, max_weight: int = 10, seed: int = 2, mutation: str | None = None,
                    tau_weight: int = 30, depth: int = 14) -> list[CheckResult]:
    rng = random.Random(seed)
    failures = []
    for n in range(n_frames):
        lam = KP_CELLS[n % len(KP_CELLS)]
        f = UGMFrame.random(lam, 3, lam.length + 1, rng)
        tau = tau_from_frame(f, tau_weight)
        if mutation == "plucker":
            tau = _perturbed(tau)
        rec = frame_from_wave(tau, depth)
        src = {mu: plucker(f, mu) for mu in box_partitions(max_weight, max_weight, max_weight)}
        got = {mu: recovered_plucker(rec, mu) for mu in src}
        ok, scale = projective_match(src, got)
        if not ok:
            failures.append((n, list(lam.parts)))
    return [CheckResult.exact("frame_round_trip_plucker", "frame-from-wave-function", not failures,
                              frames=n_frames, max_weight=max_weight, failures=failures)]


def minimal_group(n_partitions: int = 200, max_weight: int = 12, seed: int = 3,
                  hankel_genera: Sequence[int] = (2, 3, 4, 5)) -> list[CheckResult]:
    rng = random.Random(seed)
    pools = {w: list(partitions_of(w)) for w in range(max_weight + 1)}
    bad = []
    for _ in range(n_partitions):
        mu = rng.choice(pools[rng.randint(0, max_weight)])
        low = schur(mu).lowest_degree_part()
        if minimal_degree_term(mu).terms != low.terms:
            bad.append(list(mu.parts))
    out = [CheckResult.exact("minimal_degree_term", "minimal-degree-term", not bad, samples=n_partitions,
                             failures=bad[:10])]
    for g in hankel_genera:
        stair = Partition(tuple(range(g, 0, -1)))
        ok = hankel_minimal_term(g).terms == minimal_degree_term(stair).terms
        out.append(CheckResult.exact(f"hankel_minimal_term[g={g}]", "minimal-degree-term-staircase", ok))
    return out


def duality_group(n_partitions: int = 200, max_weight: int = 12, seed: int = 4,
                  fixture_dir: Path | None = None, tol: float = 1e-3) -> list[CheckResult]:
    rng = random.Random(seed)
    pools = {w: list(partitions_of(w)) for w in range(max_weight + 1)}
    bad = []
    for _ in range(n_partitions):
        mu = rng.choice(pools[rng.randint(0, max_weight)])
        if not dual_schur_identity(mu):
            bad.append(list(mu.parts))
    out = [CheckResult.exact("schur_duality", "schur-sign-duality", not bad, samples=n_partitions, failures=bad)]
    ctx = fixture_context("g2_minus_delta", fixture_dir)
    rep = expansion_check(ctx, dual=True, tol=tol)
    out.append(CheckResult.numeric("theta_jet_duality[g2_minus_delta]", "theta-jet-duality", rep.residual, tol,
                                   **rep.details))
    return out


def curves_group(fixture_dir: Path | None = None, quad_tol: float = 1e-13) -> list[CheckResult]:
    d = Path(fixture_dir or default_fixture_dir())
    out = []
    c1 = load_curve(d / "curve_g1.json")
    P1 = period_matrices(c1, tol=quad_tol)
    e1, e2, e3 = (e.real for e in c1.branch_points)
    expected = np.pi / (2 * agm(np.sqrt(e3 - e1), np.sqrt(e3 - e2)))
    rel = abs(abs(P1.omega1[0, 0]) - expected) / expected
    out.append(CheckResult.numeric("genus1_period_vs_agm", "period-matrix", rel, 1e-9))
    for g in (1, 2, 3):
        c = load_curve(d / f"curve_g{g}.json")
        P = period_matrices(c, tol=quad_tol)
        out.append(CheckResult.numeric(f"period_symmetry[g={g}]", "period-matrix", P.symmetry_residual(), 1e-10))
        lam_min = P.min_imag_eigenvalue()
        out.append(CheckResult(f"period_positivity[g={g}]", "period-matrix", max(0.0, -lam_min), 0.0, lam_min > 0,
                               {"min_eigenvalue": lam_min}))
        aj = AbelJacobi(c, P)
        basis = du_basis(c, exact_points=[int(e.real) for e in c.branch_points]
                         if all(float(e.real).is_integer() and e.imag == 0 for e in c.branch_points) else None)
        res = expansion_matrix_residual(P, basis, a_matrix(aj))
        out.append(CheckResult.numeric(f"expansion_matrix_identity[g={g}]", "local-expansion-of-abel-jacobi", res, 1e-8))
    return out


def theta_group(fixture_dir: Path | None = None, seed: int = 5, theta_tol: float = 1e-14) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    out = []
    for name in ("g1_minus_delta", "g2_minus_delta", "g3_minus_delta"):
        ctx = fixture_context(name, fixture_dir)
        g = ctx.g
        ev = ThetaEvaluator(ctx.Omega, tol=theta_tol, ball=1.0)
        worst = 0.0
        for _ in range(5):
            z = 0.3 * (rng.normal(size=g) + 1j * rng.normal(size=g))
            m = rng.integers(-1, 2, size=g)
            n = rng.integers(-2, 3, size=g)
            worst = max(worst, ev.quasi_periodicity_residual(z, m, n, ctx.eps))
        out.append(CheckResult.numeric(f"theta_quasi_periodicity[{name}]", "theta-quasi-periodicity", worst, 1e-9))
        z = 0.2 * (rng.normal(size=g) + 1j * rng.normal(size=g))
        dirs = [rng.normal(size=g) for _ in range(2)]
        exact = ev.theta_dir(dirs, z, ctx.eps)
        fd = ev.finite_difference(dirs, z, ctx.eps)
        out.append(CheckResult.numeric(f"theta_derivative_vs_difference[{name}]", "theta-derivatives",
                                       abs(exact - fd) / max(abs(exact), 1.0), 1e-7))
        out.append(CheckResult.numeric(f"riemann_bilinear_relation[{name}]", "eta-period-relation",
                                       ctx.bilinear_residual(), 1e-8 if g == 1 else 1e-6))
    return out


def sigma_group(fixture_dir: Path | None = None, mutation: str | None = None) -> list[CheckResult]:
    out = []
    ctx1 = fixture_context("g1_minus_delta", fixture_dir)
    if mutation == "sign-flip":
        ctx1 = replace(ctx1, C=-ctx1.C, c0=-ctx1.c0)
    us = [r * np.exp(1j * t) for r in (0.05, 0.25, 0.5) for t in np.linspace(0, 2 * np.pi, 12, endpoint=False)]
    err = max(abs(sigma(ctx1, [u]) - weierstrass_sigma(u, 4.0, 0.0)) for u in us)
    out.append(CheckResult.numeric("genus1_sigma_vs_weierstrass", "sigma-definition", err, 1e-6, points=len(us)))
    h = 1e-4
    d = (sigma(ctx1, [h]) - sigma(ctx1, [-h])) / (2 * h)
    out.append(CheckResult.numeric("genus1_sigma_derivative_at_zero", "sigma-definition", abs(d - 1), 1e-6))
    for name in ("g1_minus_delta", "g2_minus_delta", "g3_minus_delta", "g2_branch_point"):
        ctx = fixture_context(name, fixture_dir)
        if mutation == "sign-flip":
            ctx = replace(ctx, C=-ctx.C, c0=-ctx.c0)
        rep = expansion_check(ctx)
        out.append(CheckResult(f"theta_leading_jet[{name}]", "theta-leading-jet", rep.residual, rep.tolerance,
                               rep.passed, rep.details))
        a_override = None
        if mutation == "permute-a0":
            a_override = permuted_a_entries(ctx.profile, 0)
        rst = refined_rst_check(ctx, a_entries=a_override)
        out.append(CheckResult(f"refined_singularity[{name}]", "refined-riemann-singularity", rst.residual,
                               rst.tolerance, rst.passed, {k: v for k, v in rst.details.items() if k != "scanned"}))
        g = ctx.g
        for k in range(1, g + 1):
            if mk(ctx.profile, k - 1) == 0 or (k < g and mk(ctx.profile, k) == 0):
                continue
            aj = aj_expansion_check(ctx, k)
            out.append(CheckResult(f"abel_jacobi_leading_order[{name},k={k}]", "theta-on-abel-jacobi-image",
                                   aj.residual, aj.tolerance, bool(aj.passed), aj.details))
    return out


def modular_group(fixture_dir: Path | None = None) -> list[CheckResult]:
    out = []
    for name, tol in (("g1_minus_delta", 1e-6), ("g2_minus_delta", 1e-4)):
        ctx = fixture_context(name, fixture_dir)
        for gen, M in sp_generators(ctx.g).items():
            rep = modular_invariance_check(ctx, M, tol=tol)
            out.append(CheckResult(f"sigma_modular_invariance[{name},{gen}]", "sigma-modular-invariance",
                                   rep.residual, tol, rep.passed, rep.details))
            ok, series = convergence_witness(ctx, M)
            out.append(CheckResult(f"modular_convergence_witness[{name},{gen}]", "sigma-modular-invariance",
                                   0.0 if ok else 1.0, 0.0, ok, {"residuals": series}))
        M = sp_generators(ctx.g)["J" if ctx.g > 1 else "S"]
        rep = modular_invariance_check(ctx, M, tol=tol, recompute_lambda=True)
        out.append(CheckResult(f"sigma_modular_invariance_recomputed_lambda[{name}]", "sigma-modular-invariance",
                               rep.residual, tol, rep.passed, rep.details))
    return out


def mutation_group(fixture_dir: Path | None = None) -> list[CheckResult]:
    """Each mutation must make at least one check fail."""
    out = []
    g3 = hyperelliptic_gaps(hyperelliptic_strata(3)[1])  # odd stratum with m0 = 2
    for mutation in MUTATIONS:
        hits = []
        if mutation in ("sign-flip", "permute-a0"):
            if not all(c.passed for c in schur_group(0, [g3], mutation)):
                hits.append("schur_vanishing_at_origin")
            if not all(c.passed for c in tau_group(3, 1, mutation=mutation)):
                hits.append("tau_miwa_identities")
            if not all(c.passed for c in sigma_group(fixture_dir, mutation)):
                hits.append("sigma")
        else:
            if not all(c.passed for c in kp_group(5, mutation=mutation)[:1]):
                hits.append("hirota_bilinear_residue_vanishes")
            if not all(c.passed for c in roundtrip_group(3, mutation=mutation)):
                hits.append("frame_round_trip_plucker")
        out.append(CheckResult.exact(f"mutation_detected[{mutation}]", "mutation-sensitivity", bool(hits),
                                     failing_checks=hits))
    return out


GROUPS = {
    "schur": lambda cfg: schur_group(5, example_profiles(cfg.fixture_dir), cfg.mutation),
    "tau": lambda cfg: tau_group(4, cfg.frames_per_cell, cfg.seed, cfg.mutation),
    "kp": lambda cfg: kp_group(20 * cfg.frames_per_cell or 5, cfg.seed, mutation=cfg.mutation),
    "roundtrip": lambda cfg: roundtrip_group(max(cfg.frames_per_cell, 1) * 2, seed=cfg.seed, mutation=cfg.mutation),
    "minimal": lambda cfg: minimal_group(seed=cfg.seed),
    "curves": lambda cfg: curves_group(cfg.fixture_dir, cfg.quad_tol),
    "theta": lambda cfg: theta_group(cfg.fixture_dir, cfg.seed, cfg.theta_tol),
    "sigma": lambda cfg: sigma_group(cfg.fixture_dir, cfg.mutation),
    "modular": lambda cfg: modular_group(cfg.fixture_dir),
    "duality": lambda cfg: duality_group(seed=cfg.seed, fixture_dir=cfg.fixture_dir),
}


def run_groups(cfg: RunConfig) -> list[CheckResult]:
    out = []
    for name in cfg.checks:
        out.extend(GROUPS[name](cfg))
    return out
