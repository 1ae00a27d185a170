"""Euler simulation of the price and cash dynamics under a fixed schedule.

Validates the Gaussian law of the terminal wealth empirically: for a
deterministic selling schedule the simulated mark-to-market wealth
X_T + q_T * S_T must match the analytic mean and variance, with zero excess
kurtosis. The permanent-impact drift of the price is integrated exactly over
every substep (it is the increment of the impact antiderivative along the
schedule), which removes the integrable singularity of the per-share impact
at the first trade; the cash integral is left-endpoint Euler, with substeps
controlling its bias.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .market_model import LiquidationProblem
from .solver import Trajectory

__all__ = ["SimulationConfig", "SimulationResult", "simulate_cash"]


@dataclass(frozen=True)
class SimulationConfig:
    n_paths: int = 100_000
    n_substeps: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("n_paths must be positive")
        if self.n_substeps < 1:
            raise ValueError("n_substeps must be positive")


@dataclass(frozen=True, eq=False)
class SimulationResult:
    """Sample statistics of the terminal wealth across paths."""

    mean: float
    variance: float
    se_mean: float
    se_variance: float
    excess_kurtosis: float
    n_paths: int
    samples: Optional[np.ndarray] = None


def simulate_cash(
    problem: LiquidationProblem,
    traj: Trajectory,
    cfg: SimulationConfig,
    keep_samples: bool = False,
) -> SimulationResult:
    """Simulate terminal wealth X_T + q_T * S_T along the trajectory grid.

    Each trajectory cell is split into ``n_substeps`` Euler steps with
    Gaussian increments; statistics are reproducible for a fixed seed. For a
    liquidating trajectory the terminal inventory is zero and the wealth is
    just the cash.
    """
    rng = np.random.default_rng(cfg.seed)
    m = problem.market
    times = traj.grid.times
    tau_sub = traj.grid.tau / cfg.n_substeps
    sqrt_dt = math.sqrt(tau_sub)
    q_ref = float(traj.q[0])

    prices = np.full(cfg.n_paths, m.s0)
    cash = np.zeros(cfg.n_paths)
    for j in range(traj.grid.n_steps):
        v = float(traj.v[j])
        cost_rate = 0.0
        for i in range(cfg.n_substeps):
            t_left = times[j] + i * tau_sub
            q_left = traj.q[j] - v * (i * tau_sub)
            q_right = q_left - v * tau_sub
            vol = float(problem.volume(t_left))
            cost_rate = vol * float(problem.cost(v / vol)) + m.psi * abs(v)
            drift = -(
                float(problem.impact(q_ref - q_right))
                - float(problem.impact(q_ref - q_left))
            )
            cash += (v * prices - cost_rate) * tau_sub
            prices += m.sigma * sqrt_dt * rng.standard_normal(cfg.n_paths) + drift

    wealth = cash + float(traj.q[-1]) * prices
    mean = float(np.mean(wealth))
    variance = float(np.var(wealth, ddof=1)) if cfg.n_paths > 1 else 0.0
    se_mean = math.sqrt(variance / cfg.n_paths)
    se_variance = variance * math.sqrt(2.0 / max(cfg.n_paths - 1, 1))
    centered = wealth - mean
    m2 = float(np.mean(centered**2))
    m4 = float(np.mean(centered**4))
    excess_kurtosis = m4 / (m2 * m2) - 3.0 if m2 > 0 else 0.0
    return SimulationResult(
        mean=mean,
        variance=variance,
        se_mean=se_mean,
        se_variance=se_variance,
        excess_kurtosis=excess_kurtosis,
        n_paths=cfg.n_paths,
        samples=wealth if keep_samples else None,
    )
