"""Fuzz the KP bilinear identity on random banded frames and report per-cell timings."""
import argparse
import random
import time
from collections import defaultdict

from thetaseed.suite import KP_CELLS, negative_control
from thetaseed.ugm import UGMFrame, hirota_residue, tau_from_frame


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-n", "--frames", type=int, default=200)
    ap.add_argument("--joint-weight", type=int, default=12)
    ap.add_argument("--band", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--rational", action="store_true", help="draw rational rather than integer entries")
    args = ap.parse_args()

    rng = random.Random(args.seed)
    W = args.joint_weight
    stats = defaultdict(lambda: [0, 0, 0.0])  # frames, failures, seconds
    for n in range(args.frames):
        lam = KP_CELLS[n % len(KP_CELLS)]
        f = UGMFrame.random(lam, args.band, lam.length + 1, rng, rational=args.rational)
        start = time.perf_counter()
        tau = tau_from_frame(f, max(W + 1 - lam.weight, lam.weight + 1))
        ok = hirota_residue(tau, W).is_zero()
        s = stats[lam.parts]
        s[0] += 1
        s[1] += not ok
        s[2] += time.perf_counter() - start
        if not ok:
            print(f"FAIL frame {n} lambda={lam.parts}: {f.to_json()}")

    for parts, (count, bad, secs) in stats.items():
        print(f"lambda={str(parts):14s} frames={count:4d} failures={bad} mean={secs / count * 1e3:7.1f} ms")
    control = not hirota_residue(negative_control(), W).is_zero()
    print(f"negative control detected: {control}")


if __name__ == "__main__":
    main()
