"""DebtRank engine: distress propagation on one exposure matrix.

The dynamics carry two variables per bank: a distress level ``h`` in
[0, 1] and a discrete state (undistressed / distressed / inactive). Seed
banks start distressed at level ``psi``. Each round, every distressed bank
j passes ``W[j, i] * h[j]`` of distress to every bank i, h is capped at 1,
distressed banks turn inactive and banks whose h just became positive turn
distressed. The cascade stops when no bank is distressed, which happens
within ``b + 1`` rounds because a bank is distressed at most once.

DebtRank is the economic-value-weighted final distress: including the
seeds' own initial loss, ``sum_j h_j(T) v_j``; excluding it, the same sum
minus ``sum_j h_j(1) v_j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import kernels
from .model import BankRegistry, ExposureLayer

_STATE_CHARS = np.array(["U", "D", "I"])


@dataclass(frozen=True)
class EconomicValue:
    """Per-bank share of a network's total economic value.

    ``weights[i]`` is bank i's fraction of the total (they sum to 1 when
    ``total_value > 0``); ``total_value`` is the money amount being shared.
    """

    weights: np.ndarray
    total_value: float

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "total_value", float(self.total_value))


@dataclass(frozen=True)
class DebtRankResult:
    """Outcome of one cascade: final distress, states and DebtRank values."""

    final_distress: np.ndarray
    node_states: np.ndarray
    debtrank_excl: float
    debtrank_incl: float
    rounds: int


def impact_matrix(layer: ExposureLayer, registry: BankRegistry) -> np.ndarray:
    """Impact of bank i on bank j: exposure over the victim's capital, capped at 1."""
    if layer.n_banks != registry.n_banks:
        raise ValueError(
            f"layer {layer.name!r} is {layer.n_banks}x{layer.n_banks} "
            f"but registry has {registry.n_banks} banks"
        )
    if np.any(registry.equity <= 0):
        bad = int(np.argmin(registry.equity))
        raise ValueError(f"bank {registry.bank_ids[bad]!r} has non-positive equity")
    return np.minimum(1.0, layer.matrix / registry.equity[np.newaxis, :])


def economic_value(layer: ExposureLayer | np.ndarray) -> EconomicValue:
    """Economic value of each bank: its share of total outstanding exposures.

    Bank i's outstanding exposure is the sum of what it stands to lose
    across all counterparties, i.e. the i-th column sum of the matrix.
    Raises on an all-zero matrix, where no economic value is definable.
    """
    matrix = layer.matrix if isinstance(layer, ExposureLayer) else np.asarray(layer)
    outstanding = matrix.sum(axis=0)
    total = outstanding.sum()
    if total <= 0:
        raise ValueError("degenerate layer: all exposures are zero")
    return EconomicValue(outstanding / total, total)


def _prepare_seeds(n: int, seed_set: Iterable[int] | int) -> np.ndarray:
    if isinstance(seed_set, (int, np.integer)):
        seed_set = (int(seed_set),)
    seeds = sorted({int(s) for s in seed_set})
    if not seeds:
        raise ValueError("seed set must be non-empty")
    if seeds[0] < 0 or seeds[-1] >= n:
        raise ValueError(f"seed index out of range for {n} banks: {seeds}")
    return np.array(seeds, dtype=np.intp)


def debtrank_run(
    W: np.ndarray,
    values: EconomicValue,
    seed_set: Iterable[int] | int,
    psi: float = 1.0,
) -> DebtRankResult:
    """Run one cascade with the given seed banks at initial distress ``psi``.

    Parameters
    ----------
    W : (b, b) impact matrix with entries in [0, 1]
    values : economic value weights used to aggregate distress
    seed_set : bank indices initially distressed (non-empty)
    psi : initial distress level; 1 means outright default
    """
    W = np.ascontiguousarray(W, dtype=np.float64)
    b = W.shape[0]
    if not 0.0 <= psi <= 1.0:
        raise ValueError(f"psi must lie in [0, 1], got {psi}")
    seeds = _prepare_seeds(b, seed_set)

    h0 = np.zeros(b)
    h0[seeds] = psi
    distressed0 = np.zeros(b, dtype=np.uint8)
    distressed0[seeds] = 1

    h, states, rounds = kernels.cascade(W, h0, distressed0)
    h = np.asarray(h)
    # the weights sum to 1 only up to rounding; cap the aggregates so the
    # [0, 1] bounds hold exactly while excl stays incl minus the seed term
    incl = min(1.0, float(h @ values.weights))
    excl = incl - min(1.0, float(h0 @ values.weights))
    return DebtRankResult(
        final_distress=h,
        node_states=_STATE_CHARS[np.asarray(states)],
        debtrank_excl=excl,
        debtrank_incl=incl,
        rounds=int(rounds),
    )


def debtrank_all_singletons(
    W: np.ndarray, values: EconomicValue, psi: float = 1.0
) -> list[DebtRankResult]:
    """Cascade once per bank with that bank as the only seed."""
    W = np.ascontiguousarray(W, dtype=np.float64)
    return [debtrank_run(W, values, i, psi) for i in range(W.shape[0])]
