"""Indirect exposures from overlapping portfolios.

A bank liquidating its portfolio depresses the prices of the assets it
holds, which inflicts losses on every other bank holding the same assets.
The bank-asset impact is either linear (the fraction of outstanding shares
held) or exponential-absorption ``1 - exp(-alpha * fraction)`` when markets
have limited capacity to absorb sales. Projecting those impacts through
current portfolio values yields a bank-bank exposure layer, including
diagonal self-impact terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .debtrank import EconomicValue
from .model import OP_LAYER, ExposureLayer, HoldingsSnapshot


@dataclass(frozen=True)
class AssetImpactMatrix:
    """Bank-on-asset price impact fractions, linear or absorption mode."""

    matrix: np.ndarray
    mode: str
    alpha: float | np.ndarray | None = None

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


def linear_impact(holdings: HoldingsSnapshot) -> AssetImpactMatrix:
    """Impact of a bank on an asset: its share of the outstanding volume."""
    return AssetImpactMatrix(holdings.shares / holdings.outstanding, mode="linear")


def price_after_sale(x: float, alpha: float) -> float:
    """Price multiplier after a fraction ``x`` of an asset is sold.

    Selling nothing leaves the price untouched (returns exactly 1).
    """
    if x < 0:
        raise ValueError(f"sold fraction must be nonnegative, got {x}")
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return math.exp(-alpha * x)


def calibrate_alpha(sold_fraction: float, price_drop: float) -> float:
    """Solve for alpha so selling ``sold_fraction`` drops the price by ``price_drop``.

    E.g. ``calibrate_alpha(0.1, 0.1)`` pins a 10% price fall when one tenth
    of an asset is sold; the result satisfies
    ``price_after_sale(sold_fraction, alpha) == 1 - price_drop`` exactly.
    """
    if not 0.0 < sold_fraction <= 1.0:
        raise ValueError(f"sold_fraction must lie in (0, 1], got {sold_fraction}")
    if not 0.0 < price_drop < 1.0:
        raise ValueError(f"price_drop must lie in (0, 1), got {price_drop}")
    return -math.log(1.0 - price_drop) / sold_fraction


def absorption_impact(holdings: HoldingsSnapshot, alpha) -> AssetImpactMatrix:
    """Impact with limited market absorption: ``1 - exp(-alpha * held fraction)``.

    ``alpha`` is one global parameter, or one value per asset for markets
    with differing depth.
    """
    alpha = np.asarray(alpha, dtype=float)
    if alpha.ndim not in (0, 1):
        raise ValueError("alpha must be a scalar or one value per asset")
    if alpha.ndim == 1 and alpha.size != holdings.n_assets:
        raise ValueError(
            f"per-asset alpha needs {holdings.n_assets} values, got {alpha.size}"
        )
    if np.any(alpha <= 0):
        raise ValueError(f"alpha must be positive, got {alpha}")
    fractions = holdings.shares / holdings.outstanding
    return AssetImpactMatrix(-np.expm1(-alpha * fractions), mode="absorption", alpha=alpha)


def indirect_exposures(
    holdings: HoldingsSnapshot, impact: AssetImpactMatrix
) -> ExposureLayer:
    """Project bank-asset impacts into a bank-bank exposure layer.

    Entry (i, j) weighs the current value of bank i's asset positions by
    bank j's impact on each asset: ``sum_a impact[j, a] * price[a] *
    shares[i, a]``. In linear mode the result is symmetric; in absorption
    mode it generally is not. The diagonal is kept: it is the loss a bank
    inflicts on itself by rapidly liquidating its own portfolio.
    """
    if impact.matrix.shape != holdings.shares.shape:
        raise ValueError(
            f"impact matrix {impact.matrix.shape} does not match "
            f"holdings {holdings.shares.shape}"
        )
    position_values = holdings.shares * holdings.price[np.newaxis, :]
    return ExposureLayer(OP_LAYER, position_values @ impact.matrix.T)


def op_economic_value(holdings: HoldingsSnapshot) -> EconomicValue:
    """Economic value of each bank: its portfolio's share of all portfolios.

    The total is the combined market value of all bank portfolios. Raises
    on holdings with no positive position, where no value is definable.
    """
    portfolio = holdings.portfolio_values()
    total = portfolio.sum()
    if total <= 0:
        raise ValueError("degenerate holdings: no bank holds any asset")
    return EconomicValue(portfolio / total, total)
