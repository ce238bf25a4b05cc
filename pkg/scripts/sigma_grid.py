"""Tabulate sigma on a grid for one fixture and compare genus 1 against the Weierstrass series."""
import argparse
import json

import numpy as np

from thetaseed.reports import dumps
from thetaseed.sigma import default_grid, sigma_many, weierstrass_sigma
from thetaseed.suite import fixture_context


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--fixture", default="g2_minus_delta",
                    choices=["g1_minus_delta", "g2_minus_delta", "g3_minus_delta", "g2_branch_point"])
    ap.add_argument("-n", type=int, default=100, help="number of grid points")
    ap.add_argument("--scale", type=float, default=0.4)
    ap.add_argument("--out", help="write the table as JSON")
    args = ap.parse_args()

    ctx = fixture_context(args.fixture)
    grid = default_grid(ctx.g, n=args.n, scale=args.scale)
    vals = sigma_many(ctx, grid)
    sign = (-1) ** ctx.lam.weight
    parity = np.max(np.abs(sigma_many(ctx, -grid) - sign * vals))
    print(f"{args.fixture}: g={ctx.g} lambda={ctx.lam.parts} points={len(grid)}")
    print(f"max |sigma| = {np.max(np.abs(vals)):.3e}   parity residual = {parity:.2e}")
    if ctx.g == 1:
        ref = np.array([weierstrass_sigma(u[0], 4.0, 0.0) for u in grid])
        print(f"max |sigma - weierstrass| = {np.max(np.abs(vals - ref)):.2e}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(dumps({"fixture": args.fixture, "context": ctx.snapshot(),
                            "points": [{"u": u, "sigma": v} for u, v in zip(grid, vals)]}))
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
