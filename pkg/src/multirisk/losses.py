"""Expected systemic loss and marginal contributions of single exposures.

The exact expected loss enumerates every combination of defaulting and
surviving banks, weighs the set's DebtRank (initial distress included) by
the independent-default Bernoulli probabilities and scales by the
network's total economic value. The first-order approximation replaces
the power set with single-bank defaults, which is accurate for small
default probabilities. Marginal risk of one exposure is the difference in
approximate expected loss with and without that exposure, with economic
values rebuilt on the perturbed network.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .debtrank import (
    EconomicValue,
    debtrank_all_singletons,
    debtrank_run,
    impact_matrix,
)
from .model import BankRegistry, ExposureLayer
from .multilayer import (
    MultiLayerNetwork,
    with_exposure_delta,
    without_exposure,
)

_WEIGHT_TOL = 1e-12
_CHUNK = 1 << 16


class BankLimitError(RuntimeError):
    """Exact enumeration refused: too many banks for a power-set sweep."""


@dataclass(frozen=True)
class ExpectedLossResult:
    """Expected systemic loss in money terms.

    ``terms_evaluated`` is the power-set size for the exact method and the
    bank count for the approximation; ``weight_sum`` records the Bernoulli
    weight total of an exact enumeration (must be 1 up to 1e-12).
    """

    value: float
    method: str
    terms_evaluated: int
    total_value: float
    weight_sum: float | None = None


@dataclass(frozen=True)
class MarginalExposureRecord:
    """Change in expected systemic loss attributable to one exposure."""

    from_bank: str
    to_bank: str
    layer: str
    exposure_size: float
    delta_el: float


def _resolve(network, values: EconomicValue | None):
    """Matrix and economic values for a single layer or a combined network."""
    if isinstance(network, MultiLayerNetwork):
        if values is None:
            values = network.combined_values
        return network.combined.matrix, values
    if isinstance(network, ExposureLayer):
        if values is None:
            total = network.matrix.sum()
            if total > 0:
                outstanding = network.matrix.sum(axis=0)
                values = EconomicValue(outstanding / total, total)
            else:
                values = EconomicValue(np.zeros(network.n_banks), 0.0)
        return network.matrix, values
    raise TypeError(f"expected MultiLayerNetwork or ExposureLayer, got {type(network)}")


def _subset_weights(p: np.ndarray) -> np.ndarray:
    """Bernoulli weight of every subset, indexed by bit mask."""
    b = p.size
    q = 1.0 - p
    weights = np.empty(1 << b)
    exponents = np.arange(b, dtype=np.uint64)
    for start in range(0, 1 << b, _CHUNK):
        masks = np.arange(start, min(start + _CHUNK, 1 << b), dtype=np.uint64)
        bits = (masks[:, None] >> exponents[None, :]) & 1
        weights[start : start + masks.size] = np.where(bits == 1, p, q).prod(axis=1)
    return weights


def expected_loss_exact(
    network: MultiLayerNetwork | ExposureLayer,
    registry: BankRegistry,
    psi: float = 1.0,
    max_banks: int = 16,
    values: EconomicValue | None = None,
) -> ExpectedLossResult:
    """Expected systemic loss from the full power set of default scenarios.

    Refuses to run for more than ``max_banks`` banks (the scenario count is
    2^b); use :func:`expected_loss_approx` beyond that. The empty set
    contributes no loss but its survival weight is part of the total-weight
    check. Terms are accumulated with compensated summation, so the result
    does not depend on enumeration order.
    """
    matrix, vals = _resolve(network, values)
    b = registry.n_banks
    if matrix.shape[0] != b:
        raise ValueError("network does not match registry bank count")
    if b > max_banks:
        raise BankLimitError(
            f"{b} banks would need {1 << b} scenario evaluations "
            f"(limit {max_banks}); use expected_loss_approx"
        )
    layer = network.combined if isinstance(network, MultiLayerNetwork) else network
    W = impact_matrix(layer, registry)
    p = registry.default_probability

    weights = _subset_weights(p)
    weight_sum = math.fsum(weights)
    if abs(weight_sum - 1.0) > _WEIGHT_TOL:
        raise ArithmeticError(
            f"Bernoulli subset weights sum to {weight_sum!r}, expected 1"
        )

    terms = []
    for mask in range(1, 1 << b):
        seeds = [i for i in range(b) if mask >> i & 1]
        r = debtrank_run(W, vals, seeds, psi).debtrank_incl
        terms.append(weights[mask] * r)
    value = vals.total_value * math.fsum(terms)
    return ExpectedLossResult(
        value=value,
        method="exact",
        terms_evaluated=1 << b,
        total_value=vals.total_value,
        weight_sum=weight_sum,
    )


def expected_loss_approx(
    network: MultiLayerNetwork | ExposureLayer,
    registry: BankRegistry,
    psi: float = 1.0,
    values: EconomicValue | None = None,
) -> ExpectedLossResult:
    """First-order expected systemic loss from single-bank defaults only."""
    matrix, vals = _resolve(network, values)
    b = registry.n_banks
    if matrix.shape[0] != b:
        raise ValueError("network does not match registry bank count")
    layer = network.combined if isinstance(network, MultiLayerNetwork) else network
    W = impact_matrix(layer, registry)
    p = registry.default_probability
    results = debtrank_all_singletons(W, vals, psi)
    value = vals.total_value * math.fsum(
        p[i] * results[i].debtrank_incl for i in range(b)
    )
    return ExpectedLossResult(
        value=value,
        method="approximate",
        terms_evaluated=b,
        total_value=vals.total_value,
    )


def marginal_exposure_loss(
    network: MultiLayerNetwork,
    registry: BankRegistry,
    k: str,
    l: str,
    layer: str,
    delta: float,
    psi: float = 1.0,
) -> MarginalExposureRecord:
    """Expected-loss change from adding ``delta`` to exposure (k, l) of a layer.

    Economic values and all single-bank DebtRanks are rebuilt on the
    perturbed network; the result is the difference of the two approximate
    expected losses.
    """
    if delta < 0:
        raise ValueError(f"delta must be nonnegative, got {delta}")
    row = registry.index_of(k)
    col = registry.index_of(l)
    base = expected_loss_approx(network, registry, psi)
    perturbed = with_exposure_delta(network, layer, row, col, delta)
    bumped = expected_loss_approx(perturbed, registry, psi)
    return MarginalExposureRecord(
        from_bank=k,
        to_bank=l,
        layer=layer,
        exposure_size=float(delta),
        delta_el=bumped.value - base.value,
    )


def marginal_scan(
    network: MultiLayerNetwork,
    registry: BankRegistry,
    psi: float = 1.0,
) -> list[MarginalExposureRecord]:
    """Marginal expected-loss record for every nonzero exposure of every layer.

    Each exposure is scored by removing it from the network and re-adding
    it via :func:`marginal_exposure_loss`, so scan entries match individual
    calls exactly. Diagonal entries (the OP layer's self-impact) are
    scanned like any other exposure.
    """
    records = []
    for layer in network.layers:
        rows, cols = np.nonzero(layer.matrix)
        for row, col in zip(rows, cols):
            reduced, size = without_exposure(network, layer.name, row, col)
            records.append(
                marginal_exposure_loss(
                    reduced,
                    registry,
                    registry.bank_ids[row],
                    registry.bank_ids[col],
                    layer.name,
                    size,
                    psi,
                )
            )
    return records
