"""Deterministic synthetic datasets: heavy-tailed holdings plus direct layers.

Bank sizes follow a Pareto law, so a few banks dominate portfolio volume
and self-impact, mirroring the concentration seen in real systems. Per
asset, the banks' collective position is capped strictly below the
outstanding volume, so generated snapshots always validate. Identical
configs (same seed) produce identical snapshots.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .model import (
    BankRegistry,
    ExposureLayer,
    HoldingsSnapshot,
    SystemSnapshot,
)


def _default_direct_density() -> dict[str, float]:
    return {"DL": 0.15, "deri": 0.08, "secu": 0.08, "FX": 0.05}


@dataclass(frozen=True)
class GeneratorConfig:
    """Knobs for the synthetic system generator."""

    banks: int = 20
    assets: int = 40
    seed: int = 0
    holdings_density: float = 0.25
    tail_exponent: float = 1.5
    direct_density: Mapping[str, float] = field(default_factory=_default_direct_density)
    equity_scale: float = 1e6
    default_probability_range: tuple[float, float] = (0.001, 0.01)
    n_dates: int = 1
    start_date: dt.date = dt.date(2013, 9, 30)
    currency: str = "XTS"

    def __post_init__(self):
        if self.banks < 1 or self.assets < 1 or self.n_dates < 1:
            raise ValueError("banks, assets and n_dates must be positive")
        if not 0.0 < self.holdings_density <= 1.0:
            raise ValueError(
                f"holdings_density must lie in (0, 1], got {self.holdings_density}"
            )
        for name, density in self.direct_density.items():
            if not 0.0 <= density <= 1.0:
                raise ValueError(
                    f"direct density for {name!r} must lie in [0, 1], got {density}"
                )
        if self.tail_exponent <= 0 or self.equity_scale <= 0:
            raise ValueError("tail_exponent and equity_scale must be positive")
        lo, hi = self.default_probability_range
        if not (0.0 <= lo <= hi <= 1.0):
            raise ValueError(
                f"default_probability_range must be ordered within [0, 1], "
                f"got ({lo}, {hi})"
            )
        # each masked cell is later bumped to at least one share; the cap
        # slack must be able to absorb those bumps
        if self.banks > 10_000:
            raise ValueError("infeasible config: more banks than the holding caps allow")


def generate_series(config: GeneratorConfig) -> list[SystemSnapshot]:
    """Generate ``config.n_dates`` snapshots about one synthetic system.

    The bank population, holdings pattern and exposure pattern are fixed
    across dates; prices follow a multiplicative random walk and direct
    exposure amounts get per-date noise.
    """
    rng = np.random.default_rng(config.seed)
    b, m = config.banks, config.assets

    bank_ids = tuple(f"B{k:03d}" for k in range(b))
    asset_ids = tuple(f"A{k:04d}" for k in range(m))

    size = 1.0 + rng.pareto(config.tail_exponent, size=b)
    equity = config.equity_scale * size * rng.lognormal(0.0, 0.25, b)
    lo, hi = config.default_probability_range
    p = rng.uniform(lo, hi, b)
    registry = BankRegistry(bank_ids, equity, p)

    outstanding = np.floor(rng.lognormal(14.0, 0.5, m)) + 1e5
    base_price = rng.lognormal(2.0, 0.8, m)

    mask = rng.random((b, m)) < config.holdings_density
    raw = size[:, np.newaxis] * rng.exponential(1.0, (b, m)) * mask
    cap = rng.uniform(0.3, 0.8, m) * outstanding
    col = raw.sum(axis=0)
    scale = np.divide(cap, col, out=np.zeros(m), where=col > 0)
    shares = np.floor(raw * scale)
    shares[mask & (shares == 0)] = 1.0
    if np.any(shares.sum(axis=0) > outstanding):
        raise RuntimeError("generator cap violated; please report this config")

    base_layers = {}
    for name, density in config.direct_density.items():
        edge_mask = rng.random((b, b)) < density
        np.fill_diagonal(edge_mask, False)
        amounts = equity[np.newaxis, :] * rng.lognormal(-1.5, 0.8, (b, b))
        base_layers[name] = edge_mask * amounts

    snapshots = []
    price = base_price
    for t in range(config.n_dates):
        if t > 0:
            price = price * rng.lognormal(0.0, 0.05, m)
        holdings = HoldingsSnapshot(
            config.start_date + dt.timedelta(days=30 * t),
            asset_ids,
            shares,
            outstanding,
            price,
        )
        layers = []
        for name in config.direct_density:
            matrix = base_layers[name]
            if t > 0:
                matrix = matrix * rng.lognormal(0.0, 0.1, (b, b))
            layers.append(ExposureLayer(name, matrix))
        snapshots.append(
            SystemSnapshot(
                holdings.date,
                registry,
                holdings,
                tuple(layers),
                {"currency": config.currency, "exposure_basis": "gross"},
            )
        )
    return snapshots


def generate_synthetic(config: GeneratorConfig) -> SystemSnapshot:
    """Generate the first (or only) snapshot for a config."""
    return generate_series(config)[0]
