#!/usr/bin/env python3
"""Solve the reference liquidation problem for three risk aversions and write
the trading curves side by side, ready for plotting.

Usage: python3 scripts/make_trading_curves.py [out.csv]
"""

import csv
import sys

import numpy as np

from blocktrade import (
    ConstantVolume,
    LiquidationProblem,
    MarketParams,
    PowerLawCost,
    PowerLawImpact,
)
from blocktrade.objective import eval_I
from blocktrade.solver import SolveOptions, newton_solve

GAMMAS = (5e-7, 1e-6, 2e-6)


def make_problem(gamma):
    return LiquidationProblem(
        q0=500_000.0,
        horizon=1.0,
        market=MarketParams(s0=40.0, sigma=0.5, gamma=gamma, psi=0.004),
        volume=ConstantVolume(5_000_000.0),
        cost=PowerLawCost(eta=0.02, phi=0.65),
        impact=PowerLawImpact(k=4.5e-6, beta=0.75),
    )


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "trading_curves.csv"
    opts = SolveOptions(n_steps=1000)
    curves = {}
    times = None
    for gamma in GAMMAS:
        problem = make_problem(gamma)
        traj = newton_solve(problem, opts)
        curves[gamma] = traj.q
        times = traj.grid.times
        print(
            f"gamma={gamma:g}: objective {eval_I(problem, traj, psi=0.0):.1f}, "
            f"{traj.iterations} iterations, residual {traj.max_residual:.2e}"
        )
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"q_gamma_{g:g}" for g in GAMMAS])
        for i, t in enumerate(times):
            writer.writerow([f"{t:.17g}"] + [f"{curves[g][i]:.17g}" for g in GAMMAS])
    print(f"wrote {out}")
    assert np.all(curves[2e-6] <= curves[5e-7] + 1e-6), "risk ordering violated"


if __name__ == "__main__":
    main()
