"""Strict key-value configuration for the command-line tools.

Format: one ``dotted.key = value`` per line; ``#`` starts a full-line comment;
blank lines are ignored. Unknown or duplicate keys are hard errors so a typo
cannot silently fall back to a default in a financially sensitive run. The
full schema is documented in the README.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

from .market_model import (
    ConstantVolume,
    LiquidationProblem,
    MarketParams,
    PiecewiseLinearVolume,
    PowerLawCost,
    PowerLawImpact,
    validate,
)
from .montecarlo import SimulationConfig
from .solver import SolveOptions

__all__ = ["ConfigError", "RunConfig", "parse_config"]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    problem: LiquidationProblem
    solve: SolveOptions
    mc: SimulationConfig
    q_list: tuple[float, ...]
    horizons: Optional[tuple[float, ...]]
    quoted_premium: Optional[float]
    grid_n_t: int
    grid_n_q: int
    grid_t_max: Optional[float]
    grid_epsilon: Optional[float]
    dump_paths: bool


def _parse_float(text: str) -> float:
    return float(text)


def _parse_int(text: str) -> int:
    value = float(text)
    if value != int(value):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_float_list(text: str) -> tuple[float, ...]:
    items = [s.strip() for s in text.split(",") if s.strip()]
    if not items:
        raise ValueError("expected a comma-separated list of numbers")
    return tuple(float(s) for s in items)


def _parse_str(text: str) -> str:
    return text.strip()


# key -> (parser, required)
_SCHEMA = {
    "problem.q0": (_parse_float, True),
    "problem.horizon": (_parse_float, True),
    "market.s0": (_parse_float, True),
    "market.sigma": (_parse_float, True),
    "market.gamma": (_parse_float, True),
    "market.psi": (_parse_float, False),
    "cost.type": (_parse_str, True),
    "cost.eta": (_parse_float, False),
    "cost.phi": (_parse_float, False),
    "impact.type": (_parse_str, True),
    "impact.k": (_parse_float, False),
    "impact.beta": (_parse_float, False),
    "volume.type": (_parse_str, True),
    "volume.rate": (_parse_float, False),
    "volume.path": (_parse_str, False),
    "solve.n_steps": (_parse_int, False),
    "solve.newton_tol": (_parse_float, False),
    "solve.max_iter": (_parse_int, False),
    "solve.max_halvings": (_parse_int, False),
    "mc.n_paths": (_parse_int, False),
    "mc.n_substeps": (_parse_int, False),
    "mc.seed": (_parse_int, False),
    "mc.dump_paths": (_parse_bool, False),
    "price.q_list": (_parse_float_list, False),
    "price.quoted_premium": (_parse_float, False),
    "price.horizons": (_parse_float_list, False),
    "grid.n_t": (_parse_int, False),
    "grid.n_q": (_parse_int, False),
    "grid.t_max": (_parse_float, False),
    "grid.epsilon": (_parse_float, False),
}


def _read_pairs(path: str) -> dict:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    pairs = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in _SCHEMA:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in pairs:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            parser, _ = _SCHEMA[key]
            try:
                pairs[key] = parser(value)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from None
    return pairs


def _require(pairs: dict, key: str, path: str):
    if key not in pairs:
        raise ConfigError(f"{path}: missing required key {key!r}")
    return pairs[key]


def parse_config(path: str) -> RunConfig:
    """Parse and validate a run configuration; see the README for the schema."""
    pairs = _read_pairs(path)
    for key, (_, required) in _SCHEMA.items():
        if required:
            _require(pairs, key, path)

    cost_type = pairs["cost.type"]
    if cost_type == "power_law":
        cost = PowerLawCost(
            eta=_require(pairs, "cost.eta", path),
            phi=_require(pairs, "cost.phi", path),
        )
    else:
        raise ConfigError(f"{path}: unsupported cost.type {cost_type!r}")

    impact_type = pairs["impact.type"]
    if impact_type == "power_law":
        impact = PowerLawImpact(
            k=_require(pairs, "impact.k", path),
            beta=_require(pairs, "impact.beta", path),
        )
    else:
        raise ConfigError(f"{path}: unsupported impact.type {impact_type!r}")

    volume_type = pairs["volume.type"]
    if volume_type == "constant":
        volume = ConstantVolume(rate=_require(pairs, "volume.rate", path))
    elif volume_type == "csv":
        csv_path = _require(pairs, "volume.path", path)
        if not os.path.isabs(csv_path):
            csv_path = os.path.join(os.path.dirname(os.path.abspath(path)), csv_path)
        try:
            volume = PiecewiseLinearVolume.from_csv(csv_path)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"{path}: volume csv: {exc}") from None
    else:
        raise ConfigError(f"{path}: unsupported volume.type {volume_type!r}")

    problem = LiquidationProblem(
        q0=pairs["problem.q0"],
        horizon=pairs["problem.horizon"],
        market=MarketParams(
            s0=pairs["market.s0"],
            sigma=pairs["market.sigma"],
            gamma=pairs["market.gamma"],
            psi=pairs.get("market.psi", 0.0),
        ),
        volume=volume,
        cost=cost,
        impact=impact,
    )
    report = validate(problem)
    if not report.ok:
        failed = ", ".join(c.name for c in report.failures())
        raise ConfigError(f"{path}: invalid problem, failed checks: {failed}")

    try:
        solve = SolveOptions(
            n_steps=pairs.get("solve.n_steps", 1000),
            newton_tol=pairs.get("solve.newton_tol"),
            max_iter=pairs.get("solve.max_iter", 50),
            max_halvings=pairs.get("solve.max_halvings", 20),
        )
        mc = SimulationConfig(
            n_paths=pairs.get("mc.n_paths", 100_000),
            n_substeps=pairs.get("mc.n_substeps", 1),
            seed=pairs.get("mc.seed", 0),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None

    return RunConfig(
        problem=problem,
        solve=solve,
        mc=mc,
        q_list=pairs.get("price.q_list", (problem.q0,)),
        horizons=pairs.get("price.horizons"),
        quoted_premium=pairs.get("price.quoted_premium"),
        grid_n_t=pairs.get("grid.n_t", 21),
        grid_n_q=pairs.get("grid.n_q", 21),
        grid_t_max=pairs.get("grid.t_max"),
        grid_epsilon=pairs.get("grid.epsilon"),
        dump_paths=pairs.get("mc.dump_paths", False),
    )
