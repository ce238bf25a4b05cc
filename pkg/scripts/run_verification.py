"""Run every check group at acceptance size and write one JSON report."""
import argparse
import sys
import time

from thetaseed import suite
from thetaseed.config import CHECK_GROUPS, RunConfig
from thetaseed.reports import Report

FULL_SIZE = {
    "schur": lambda cfg: suite.schur_group(5, suite.example_profiles(cfg.fixture_dir)),
    "tau": lambda cfg: suite.tau_group(4, 20, cfg.seed),
    "kp": lambda cfg: suite.kp_group(100, cfg.seed),
    "roundtrip": lambda cfg: suite.roundtrip_group(20, max_weight=10, seed=cfg.seed),
    "minimal": lambda cfg: suite.minimal_group(200, 12, seed=cfg.seed, hankel_genera=(2, 3, 4, 5)),
    "duality": lambda cfg: suite.duality_group(200, 12, seed=cfg.seed),
}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="verification_report.json")
    ap.add_argument("--seed", type=int, default=RunConfig().seed)
    ap.add_argument("--groups", default=",".join(CHECK_GROUPS))
    args = ap.parse_args()
    cfg = RunConfig(seed=args.seed)
    report = Report(config=cfg.to_json())
    for name in args.groups.split(","):
        start = time.perf_counter()
        runner = FULL_SIZE.get(name, suite.GROUPS[name])
        results = runner(cfg)
        report.extend(results)
        failed = sum(not r.passed for r in results)
        print(f"{name:10s} {len(results):3d} checks  {failed} failed  {time.perf_counter() - start:6.1f}s")
    report.write(args.out)
    print(f"{'PASS' if report.passed else 'FAIL'}  report written to {args.out}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
