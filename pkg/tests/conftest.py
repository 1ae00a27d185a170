import numpy as np
import pytest

from blocktrade import (
    ConstantVolume,
    LiquidationProblem,
    MarketParams,
    PowerLawCost,
    PowerLawImpact,
)

# Reference configuration used throughout: a liquid large-cap stock, prices in
# currency per share, times in days. Daily volume 5M shares, block of 500k.
REF_S0 = 40.0
REF_SIGMA = 0.5
REF_GAMMA = 1e-6
REF_PSI = 0.004
REF_VOLUME = 5_000_000.0
REF_Q0 = 500_000.0
REF_ETA = 0.02
REF_PHI = 0.65
REF_K = 4.5e-6
REF_BETA = 0.75


def make_reference_problem(gamma=REF_GAMMA, q0=REF_Q0, horizon=1.0, psi=REF_PSI):
    return LiquidationProblem(
        q0=q0,
        horizon=horizon,
        market=MarketParams(s0=REF_S0, sigma=REF_SIGMA, gamma=gamma, psi=psi),
        volume=ConstantVolume(REF_VOLUME),
        cost=PowerLawCost(eta=REF_ETA, phi=REF_PHI),
        impact=PowerLawImpact(k=REF_K, beta=REF_BETA),
    )


def make_quadratic_problem(eta=0.01, gamma=REF_GAMMA, q0=REF_Q0, horizon=1.0, psi=REF_PSI):
    """Quadratic-cost variant with a closed-form optimal curve."""
    return LiquidationProblem(
        q0=q0,
        horizon=horizon,
        market=MarketParams(s0=REF_S0, sigma=REF_SIGMA, gamma=gamma, psi=psi),
        volume=ConstantVolume(REF_VOLUME),
        cost=PowerLawCost(eta=eta, phi=1.0),
        impact=PowerLawImpact(k=REF_K, beta=REF_BETA),
    )


@pytest.fixture
def reference_problem():
    return make_reference_problem()


@pytest.fixture
def quadratic_problem():
    return make_quadratic_problem()


def linear_trajectory(problem, n_steps):
    """Straight-line liquidation as a hand-built trajectory."""
    from blocktrade.solver import Grid, Trajectory

    grid = Grid(n_steps=n_steps, t_start=0.0, t_end=problem.horizon)
    j = np.arange(n_steps + 1)
    q = problem.q0 * (1.0 - j / n_steps)
    v = (q[:-1] - q[1:]) / grid.tau
    return Trajectory(grid=grid, q=q, p=np.zeros(n_steps + 1), v=v)
