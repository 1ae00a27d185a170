"""Block-trade prices and the risk-liquidity premium decomposition.

A block of q shares is worth its mark-to-market value minus a premium with
three parts: permanent market impact (PMI), linear execution costs (LEC), and
nonlinear execution costs plus price risk (NECPR). The NECPR part is the
optimal liquidation value: solved numerically on a finite horizon, and in
closed form when the buyer faces no time constraint. Proportional costs enter
only through the linear term; the optimal schedule itself never depends on
them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

from .closed_forms import theta_infinity
from .market_model import ConstantVolume, LiquidationProblem
from .objective import eval_I
from .solver import SolveOptions, newton_solve

__all__ = [
    "PriceDecomposition",
    "PremiumFloorError",
    "GammaBracketError",
    "price_finite",
    "price_infinite",
    "implied_gamma",
]


class PremiumFloorError(ValueError):
    """Quoted premium does not exceed the risk-free floor PMI + LEC."""


class GammaBracketError(ValueError):
    """No risk aversion inside the search bracket reproduces the quote."""


@dataclass(frozen=True)
class PriceDecomposition:
    """Premium split and resulting prices; basis points are relative to MtM."""

    mtm: float
    pmi: float
    lec: float
    necpr_T: Optional[float]
    necpr_inf: Optional[float]
    price_T: Optional[float]
    price_inf: Optional[float]
    premium_bp_T: Optional[float]
    premium_bp_inf: Optional[float]


def _bp(mtm: float, premium: float) -> float:
    return 1e4 * premium / mtm if mtm > 0 else 0.0


def _zero_decomposition() -> PriceDecomposition:
    return PriceDecomposition(
        mtm=0.0,
        pmi=0.0,
        lec=0.0,
        necpr_T=0.0,
        necpr_inf=0.0,
        price_T=0.0,
        price_inf=0.0,
        premium_bp_T=0.0,
        premium_bp_inf=0.0,
    )


def _assemble(mtm, pmi, lec, necpr_T, necpr_inf) -> PriceDecomposition:
    price_T = mtm - pmi - lec - necpr_T if necpr_T is not None else None
    price_inf = mtm - pmi - lec - necpr_inf if necpr_inf is not None else None
    return PriceDecomposition(
        mtm=mtm,
        pmi=pmi,
        lec=lec,
        necpr_T=necpr_T,
        necpr_inf=necpr_inf,
        price_T=price_T,
        price_inf=price_inf,
        premium_bp_T=_bp(mtm, mtm - price_T) if price_T is not None else None,
        premium_bp_inf=_bp(mtm, mtm - price_inf) if price_inf is not None else None,
    )


def price_finite(problem: LiquidationProblem, opts: Optional[SolveOptions] = None) -> PriceDecomposition:
    """Price the block on the problem's horizon via solve-then-evaluate.

    The infinite-horizon column is filled too whenever the volume curve is
    constant, since it comes for free in closed form.
    """
    q = problem.q0
    if q == 0:
        return _zero_decomposition()
    traj = newton_solve(problem, opts)
    necpr_T = eval_I(problem, traj, psi=0.0)
    necpr_inf = (
        theta_infinity(problem, q) if isinstance(problem.volume, ConstantVolume) else None
    )
    return _assemble(
        mtm=q * problem.market.s0,
        pmi=problem.impact.integral(q),
        lec=problem.market.psi * q,
        necpr_T=necpr_T,
        necpr_inf=necpr_inf,
    )


def price_infinite(
    problem: LiquidationProblem,
    q: Optional[float] = None,
    s: Optional[float] = None,
) -> PriceDecomposition:
    """Closed-form price with no liquidation deadline (constant volume only)."""
    if q is None:
        q = problem.q0
    if s is None:
        s = problem.market.s0
    if q < 0:
        raise ValueError("q must be nonnegative")
    if q == 0:
        return _zero_decomposition()
    return _assemble(
        mtm=q * s,
        pmi=problem.impact.integral(q),
        lec=problem.market.psi * q,
        necpr_T=None,
        necpr_inf=theta_infinity(problem, q),
    )


def implied_gamma(
    problem: LiquidationProblem,
    quoted_premium: float,
    *,
    finite_horizon: bool = False,
    opts: Optional[SolveOptions] = None,
    gamma_lo: float = 1e-12,
    gamma_hi: float = 1e-2,
    rel_tol: float = 1e-6,
) -> float:
    """Risk aversion implied by a quoted total premium (currency).

    Strips the gamma-independent floor (PMI + LEC) and inverts the strictly
    increasing map gamma -> NECPR by bisection. The default inverts the
    closed-form infinite-horizon value; ``finite_horizon=True`` swaps in the
    slow route that re-solves the trading curve at every probe.
    """
    if not isinstance(problem.volume, ConstantVolume):
        raise ValueError("implied gamma requires a constant volume curve")
    q = problem.q0
    floor = problem.impact.integral(q) + problem.market.psi * q
    target = quoted_premium - floor
    if target <= 0:
        raise PremiumFloorError(
            f"quoted premium {quoted_premium} does not exceed the floor {floor}"
        )

    def necpr(gamma: float) -> float:
        probe = replace(problem, market=replace(problem.market, gamma=gamma))
        if finite_horizon:
            return eval_I(probe, newton_solve(probe, opts), psi=0.0)
        return theta_infinity(probe, q)

    lo, hi = gamma_lo, gamma_hi
    f_lo, f_hi = necpr(lo), necpr(hi)
    if not f_lo <= target <= f_hi:
        raise GammaBracketError(
            f"target NECPR {target} outside bracket [{f_lo}, {f_hi}] "
            f"for gamma in [{lo}, {hi}]"
        )
    # bisection in log-gamma: the map is monotone and spans many decades
    while hi / lo - 1.0 > rel_tol:
        mid = math.sqrt(lo * hi)
        if necpr(mid) < target:
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi)
