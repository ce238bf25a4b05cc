"""Command-line entry point: ``thetaseed <command> ...``.

Exit codes: 0 all checks pass, 1 a check failed, 2 bad configuration or input.
"""
from __future__ import annotations

import argparse
import json
import logging
import random
import sys
from pathlib import Path

import numpy as np

from . import suite
from .config import CHECK_GROUPS, ConfigError, RunConfig, resolve
from .curves import CurveError, HyperellipticCurve, period_matrices
from .partitions import (EVEN, ODD, GapProfile, HyperellipticStratumSpec, InvalidGapProfile, InvalidPartition,
                         Partition, extended_a_sequence, hyperelliptic_gaps, mk, profile_from_weierstrass_gaps,
                         semigroup_gaps)
from .reports import CheckResult, Report, dumps
from .schur import schur
from .sigma import (SigmaError, build_context, modular_invariance_check, refined_rst_check, sigma_many)
from .theta import ThetaError, ThetaEvaluator, sp_generators
from .ugm import (FrameError, UGMFrame, hirota_residue, tau_from_frame, tau_vanishing_check, theorem_tauAJ_check)

log = logging.getLogger("thetaseed")

INPUT_ERRORS = (ConfigError, FileNotFoundError, InvalidGapProfile, InvalidPartition, CurveError, FrameError,
                SigmaError, ThetaError, json.JSONDecodeError, KeyError, ValueError)


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.replace(" ", "").split(",") if v)


def _complex_vector(text: str) -> np.ndarray:
    return np.array([complex(v.replace(" ", "")) for v in text.split(",")], dtype=complex)


# ------------------------------------------------------------------ gaps


def profile_from_args(args) -> GapProfile:
    if args.profile:
        return suite.load_profile(args.profile)
    if args.stratum:
        g, m0, parity = args.stratum.split(",")
        parity = {"odd": ODD, "even": EVEN}.get(parity.strip().lower(), parity.strip())
        return hyperelliptic_gaps(HyperellipticStratumSpec(int(g), int(m0), parity))
    if args.semigroup:
        return profile_from_weierstrass_gaps(semigroup_gaps(_ints(args.semigroup)))
    if args.b:
        b = _ints(args.b)
        w = _ints(args.w) if args.w else b
        return GapProfile(genus=len(b), b=b, w=w)
    raise ConfigError("give one of --profile, --stratum, --semigroup or --b")


def gaps_table(profile: GapProfile) -> dict:
    g = profile.genus
    rows = []
    for k in range(g + 1):
        m = mk(profile, k) if k < g else 0
        row = {"k": k, "m_k": m}
        if m > 0 or k == g:
            seq = extended_a_sequence(profile, k)
            row.update({"A_k": list(seq.entries), "c_k": seq.sign})
        rows.append(row)
    lam = profile.partition
    return {"profile": profile.to_json(), "lambda": list(lam.parts), "weight": lam.weight, "table": rows}


def cmd_gaps(args, cfg: RunConfig) -> int:
    print(dumps(gaps_table(profile_from_args(args))))
    return 0


# ------------------------------------------------------------------ schur


def cmd_schur(args, cfg: RunConfig) -> int:
    mu = Partition(_ints(args.mu)) if args.mu else Partition()
    W = max(args.weight or mu.weight, mu.weight)
    s = schur(mu, W, method=args.method)
    print(dumps({"mu": list(mu.parts), "weight_cutoff": W, "pretty": s.pretty(), "terms": s.to_records()}))
    return 0


# ------------------------------------------------------------------ tau


def cmd_tau_check(args, cfg: RunConfig) -> int:
    profile = profile_from_args(args)
    lam = profile.partition
    if args.frame:
        frame = UGMFrame.from_json(json.loads(Path(args.frame).read_text()))
        if frame.lam != lam:
            raise ConfigError(f"frame cell {frame.lam} differs from the profile partition {lam}")
    else:
        frame = UGMFrame.random(lam, args.band, profile.genus, random.Random(cfg.seed))
    W = lam.weight + 6
    tau = tau_from_frame(frame, W)
    results = []
    for k in range(profile.genus):
        if mk(profile, k) > 0:
            rep = theorem_tauAJ_check(tau, profile, k)
            results.append(CheckResult.exact(f"tau_miwa_identity[k={k}]", "tau-derivative-on-miwa-points",
                                             rep.passed, **rep.checks))
    rep = tau_vanishing_check(tau, profile)
    results.append(CheckResult.exact("tau_vanishing_at_origin", "tau-vanishing-at-origin", rep.passed, **rep.checks))
    joint = args.joint_weight
    tau_kp = tau_from_frame(frame, max(joint + 1 - lam.weight, W))
    results.append(CheckResult.exact("hirota_bilinear_residue_vanishes", "kp-bilinear-identity",
                                     hirota_residue(tau_kp, joint).is_zero(), joint_weight=joint))
    return _emit(Report(results, {"frame": frame.to_json(), **cfg.to_json()}), args)


# ------------------------------------------------------------------ curve numerics


def _curve(args) -> HyperellipticCurve:
    return suite.load_curve(args.curve)


def cmd_periods(args, cfg: RunConfig) -> int:
    P = period_matrices(_curve(args), tol=cfg.quad_tol)
    out = P.to_json()
    out["symmetry_residual"] = P.symmetry_residual()
    out["min_imag_eigenvalue"] = P.min_imag_eigenvalue()
    print(dumps(out))
    return 0


def cmd_theta(args, cfg: RunConfig) -> int:
    P = period_matrices(_curve(args), tol=cfg.quad_tol)
    g = P.genus
    zs = [_complex_vector(z) for z in args.z] or [np.zeros(g)]
    if any(len(z) != g for z in zs):
        raise ConfigError(f"each z needs {g} components")
    eps = None
    if args.char:
        c = [float(v) for v in args.char.split(",")]
        if len(c) != 2 * g:
            raise ConfigError(f"--char needs {2 * g} numbers")
        eps = (np.array(c[:g]), np.array(c[g:]))
    ball = max(1.0, max(float(np.abs(z.imag).max()) for z in zs))
    ev = ThetaEvaluator(P.Omega, tol=cfg.theta_tol, ball=ball, max_order=0)
    vals = [ev.theta(z, eps) for z in zs]
    print(dumps({"radius": ev.radius, "tail_bound": ev.tail_bound, "values": vals}))
    return 0


def _context(args, cfg: RunConfig):
    curve = _curve(args)
    e_spec = json.loads(args.e) if args.e and args.e.lstrip().startswith("{") else (args.e or "minus_delta")
    return build_context(curve, suite.parse_e_spec(curve, e_spec), theta_tol=cfg.theta_tol)


def cmd_sigma(args, cfg: RunConfig) -> int:
    ctx = _context(args, cfg)
    us = [_complex_vector(u) for u in args.u]
    if args.u_file:
        us += [_complex_vector(line) for line in Path(args.u_file).read_text().splitlines() if line.strip()]
    if not us:
        raise ConfigError("no u values given")
    if any(len(u) != ctx.g for u in us):
        raise ConfigError(f"each u needs {ctx.g} components")
    vals = sigma_many(ctx, np.array(us))
    err = ctx.evaluator.tail_bound / abs(ctx.C)
    print(dumps({
        "context": ctx.snapshot(),
        "values": [{"u": u, "sigma": v, "error_estimate": err * abs(np.exp(0.5 * u @ ctx.eta1 @ np.linalg.solve(ctx.omega1, u)))}
                   for u, v in zip(us, vals)],
    }))
    return 0


def cmd_rst_check(args, cfg: RunConfig) -> int:
    ctx = _context(args, cfg)
    rep = refined_rst_check(ctx)
    res = CheckResult(rep.name, "refined-riemann-singularity", rep.residual, rep.tolerance, rep.passed, rep.details)
    return _emit(Report([res], cfg.to_json()), args)


def cmd_modular_check(args, cfg: RunConfig) -> int:
    ctx = _context(args, cfg)
    gens = sp_generators(ctx.g)
    if args.matrix:
        mats = {"custom": np.array(json.loads(args.matrix), dtype=int)}
    elif args.generator:
        unknown = [n for n in args.generator if n not in gens]
        if unknown:
            raise ConfigError(f"unknown generators {unknown}; choose from {sorted(gens)}")
        mats = {n: gens[n] for n in args.generator}
    else:
        mats = gens
    tol = args.tol if args.tol is not None else (1e-6 if ctx.g == 1 else 1e-4)
    results = []
    for name, M in mats.items():
        rep = modular_invariance_check(ctx, M, tol=tol)
        results.append(CheckResult(f"{rep.name}[{name}]", "sigma-modular-invariance", rep.residual, tol,
                                   rep.passed, rep.details))
    return _emit(Report(results, cfg.to_json()), args)


# ------------------------------------------------------------------ verify


def max_fixture_weight(cfg: RunConfig) -> int:
    weights = [lam.weight for lam in suite.KP_CELLS]
    if "schur" in cfg.checks:
        weights += [p.partition.weight for p in suite.example_profiles(cfg.fixture_dir)]
    return max(weights)


def cmd_verify(args, cfg: RunConfig) -> int:
    if not Path(cfg.fixture_dir).is_dir():
        raise FileNotFoundError(f"fixture directory not found: {cfg.fixture_dir}")
    cfg.validate(max_fixture_weight(cfg))
    results = suite.run_groups(cfg)
    return _emit(Report(results, cfg.to_json()), args)


def _emit(report: Report, args) -> int:
    if getattr(args, "report", None):
        report.write(args.report)
        log.info("report written to %s", args.report)
    if getattr(args, "quiet", False):
        for c in report.checks:
            print(c.line())
    else:
        print(report.dumps())
    return 0 if report.passed else 1


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--precision", type=int)
    common.add_argument("--weight-cutoff", type=int, dest="weight_cutoff")
    common.add_argument("--theta-tol", type=float, dest="theta_tol")
    common.add_argument("--quad-tol", type=float, dest="quad_tol")
    common.add_argument("--seed", type=int)
    common.add_argument("--fixture-dir", dest="fixture_dir")
    common.add_argument("--report", help="write the JSON report here")
    common.add_argument("--quiet", action="store_true", help="print one line per check instead of JSON")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="thetaseed", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def profile_opts(sp):
        sp.add_argument("--profile", help="gap-profile JSON file")
        sp.add_argument("--stratum", help="hyperelliptic stratum as g,m0,odd|even")
        sp.add_argument("--semigroup", help="Weierstrass semigroup generators, e.g. 3,7,8 (uses b = w)")
        sp.add_argument("--b", help="gaps b as a comma list")
        sp.add_argument("--w", help="Weierstrass gaps w (defaults to b)")

    sp = sub.add_parser("gaps", parents=[common], help="partition, m_k, A_k and c_k of a gap profile")
    profile_opts(sp)
    sp.set_defaults(func=cmd_gaps)

    sp = sub.add_parser("schur", parents=[common], help="exact Schur polynomial in the t variables")
    sp.add_argument("mu", nargs="?", default="", help="partition as a comma list")
    sp.add_argument("--weight", type=int, help="weight cutoff for the series")
    sp.add_argument("--method", choices=("jt", "mn"), default="jt")
    sp.set_defaults(func=cmd_schur)

    sp = sub.add_parser("tau-check", parents=[common], help="tau-function identities for one frame")
    profile_opts(sp)
    sp.add_argument("--frame", help="frame JSON; a random frame is drawn when omitted")
    sp.add_argument("--band", type=int, default=3)
    sp.add_argument("--joint-weight", type=int, default=12, dest="joint_weight")
    sp.set_defaults(func=cmd_tau_check)

    def curve_opts(sp, with_e=False):
        sp.add_argument("curve", help="curve JSON file")
        if with_e:
            sp.add_argument("--e", default="minus_delta",
                            help='"minus_delta" or JSON {"q": [[re, im] or [re, im, sheet], ...]}')

    sp = sub.add_parser("periods", parents=[common], help="period matrices of a curve")
    curve_opts(sp)
    sp.set_defaults(func=cmd_periods)

    sp = sub.add_parser("theta", parents=[common], help="Riemann theta values")
    curve_opts(sp)
    sp.add_argument("--z", action="append", default=[], help="comma list of complex components; repeatable")
    sp.add_argument("--char", help="characteristic eps',eps'' as 2g numbers")
    sp.set_defaults(func=cmd_theta)

    sp = sub.add_parser("sigma", parents=[common], help="sigma function values")
    curve_opts(sp, with_e=True)
    sp.add_argument("--u", action="append", default=[], help="comma list of complex components; repeatable")
    sp.add_argument("--u-file", dest="u_file", help="file with one u vector per line")
    sp.set_defaults(func=cmd_sigma)

    sp = sub.add_parser("rst-check", parents=[common], help="vanishing pattern of theta derivatives at e")
    curve_opts(sp, with_e=True)
    sp.set_defaults(func=cmd_rst_check)

    sp = sub.add_parser("modular-check", parents=[common], help="sigma invariance under Sp(2g, Z)")
    curve_opts(sp, with_e=True)
    sp.add_argument("--generator", action="append", help="generator name; repeatable (default: all)")
    sp.add_argument("--matrix", help="custom symplectic matrix as JSON")
    sp.add_argument("--tol", type=float)
    sp.set_defaults(func=cmd_modular_check)

    sp = sub.add_parser("verify", parents=[common], help="run the verification suite")
    sp.add_argument("--checks", help=f"comma list from {','.join(CHECK_GROUPS)}")
    sp.add_argument("--frames-per-cell", type=int, dest="frames_per_cell")
    sp.add_argument("--mutate", dest="mutation", choices=suite.MUTATIONS, help="inject a deliberate error")
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    flags = {k: getattr(args, k, None) for k in ("precision", "weight_cutoff", "theta_tol", "quad_tol", "seed",
                                                 "fixture_dir", "checks", "frames_per_cell", "mutation")}
    try:
        cfg = resolve(flags, args.config)
        if args.command != "verify":
            cfg.validate()
        return args.func(args, cfg)
    except INPUT_ERRORS as exc:
        print(f"thetaseed: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
