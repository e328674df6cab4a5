"""Multi-layer exposure networks, normalized DebtRanks and SR-profiles.

Layers (direct exposures, overlapping-portfolio exposures) are combined by
elementwise summation. Per-layer DebtRanks are made comparable by scaling
with the layer's share of the combined economic value; the combined
network's own economic value is the value-weighted blend of the per-layer
values, which reduces to the plain exposure-based definition when all
layers derive their values from their matrices.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .debtrank import (
    EconomicValue,
    debtrank_all_singletons,
    economic_value,
    impact_matrix,
)
from .model import (
    COMBINED_LAYER,
    OP_LAYER,
    BankRegistry,
    ExposureLayer,
    SystemSnapshot,
)
from .projection import (
    absorption_impact,
    indirect_exposures,
    linear_impact,
    op_economic_value,
)

#: Pseudo-layer name selecting all direct layers pre-summed into one.
DIRECT_COMBINED = "direct"

# How a layer's economic value was obtained: recomputed from its matrix on
# perturbation ("matrix") or supplied externally and kept ("external").
_FROM_MATRIX = "matrix"
_EXTERNAL = "external"


@dataclass(frozen=True)
class MultiLayerNetwork:
    """Named exposure layers on one bank index plus their combined sum."""

    layers: tuple[ExposureLayer, ...]
    layer_values: tuple[EconomicValue, ...]
    combined: ExposureLayer
    combined_values: EconomicValue
    value_sources: tuple[str, ...]

    @property
    def layer_names(self) -> tuple[str, ...]:
        return tuple(layer.name for layer in self.layers)

    @property
    def n_banks(self) -> int:
        return self.combined.n_banks

    def layer(self, name: str) -> ExposureLayer:
        for layer in self.layers:
            if layer.name == name:
                return layer
        raise KeyError(f"no layer named {name!r}")

    def values_of(self, name: str) -> EconomicValue:
        if name == COMBINED_LAYER:
            return self.combined_values
        for layer, values in zip(self.layers, self.layer_values):
            if layer.name == name:
                return values
        raise KeyError(f"no layer named {name!r}")


def _values_or_zero(matrix: np.ndarray) -> EconomicValue:
    # All-zero layers carry no economic value instead of erroring, so that
    # empty networks (e.g. after removing the only exposure) price to zero.
    if matrix.sum() <= 0:
        return EconomicValue(np.zeros(matrix.shape[0]), 0.0)
    return economic_value(matrix)


def combine_layers(
    layers: Sequence[ExposureLayer],
    values: Sequence[EconomicValue | None] | None = None,
) -> MultiLayerNetwork:
    """Assemble a multi-layer network from aligned exposure layers.

    ``values[k]`` overrides layer k's economic value (used for the OP
    layer, whose value comes from portfolio holdings rather than from its
    exposure matrix); entries left as None are computed from the matrix.
    """
    layers = tuple(layers)
    if not layers:
        raise ValueError("at least one layer is required")
    b = layers[0].n_banks
    for layer in layers[1:]:
        if layer.n_banks != b:
            raise ValueError(
                f"layer {layer.name!r} has {layer.n_banks} banks, expected {b}"
            )
    if values is None:
        values = [None] * len(layers)
    if len(values) != len(layers):
        raise ValueError("one values entry per layer required")

    layer_values = []
    sources = []
    for layer, val in zip(layers, values):
        if val is None:
            layer_values.append(_values_or_zero(layer.matrix))
            sources.append(_FROM_MATRIX)
        else:
            layer_values.append(val)
            sources.append(_EXTERNAL)

    combined_matrix = np.zeros((b, b))
    for layer in layers:
        combined_matrix = combined_matrix + layer.matrix
    total = sum(val.total_value for val in layer_values)
    if total > 0:
        blended = sum(
            val.total_value * val.weights for val in layer_values
        ) / total
    else:
        blended = np.zeros(b)
    return MultiLayerNetwork(
        layers=layers,
        layer_values=tuple(layer_values),
        combined=ExposureLayer(COMBINED_LAYER, combined_matrix),
        combined_values=EconomicValue(blended, total),
        value_sources=tuple(sources),
    )


def build_network(
    snapshot: SystemSnapshot,
    mode: str = "linear",
    alpha: float | None = None,
    layer_selection: Sequence[str] | None = None,
) -> MultiLayerNetwork:
    """Build the multi-layer network for one snapshot.

    ``layer_selection`` names the layers to include: direct layer names
    from the snapshot, ``"direct"`` for all direct layers pre-summed into
    one, and ``"OP"`` for the overlapping-portfolio projection. The default
    is ``("direct", "OP")``, dropping either side if the snapshot has no
    direct layers or no holdings.

    ``mode`` selects the bank-asset impact ("linear" or "absorption");
    absorption mode requires ``alpha``.
    """
    b = snapshot.registry.n_banks
    if layer_selection is None:
        layer_selection = []
        if snapshot.direct_layers:
            layer_selection.append(DIRECT_COMBINED)
        if snapshot.holdings is not None:
            layer_selection.append(OP_LAYER)
        if not layer_selection:
            raise ValueError("snapshot has neither direct layers nor holdings")

    layers: list[ExposureLayer] = []
    values: list[EconomicValue | None] = []
    for token in layer_selection:
        if token == DIRECT_COMBINED:
            if not snapshot.direct_layers:
                raise ValueError("snapshot has no direct layers")
            summed = np.zeros((b, b))
            for layer in snapshot.direct_layers:
                summed = summed + layer.matrix
            layers.append(ExposureLayer(DIRECT_COMBINED, summed))
            values.append(None)
        elif token == OP_LAYER:
            holdings = snapshot.holdings
            if holdings is None:
                raise ValueError("snapshot has no holdings for the OP layer")
            if mode == "linear":
                impact = linear_impact(holdings)
            elif mode == "absorption":
                if alpha is None:
                    raise ValueError("absorption mode requires alpha")
                impact = absorption_impact(holdings, alpha)
            else:
                raise ValueError(f"unknown impact mode {mode!r}")
            layers.append(indirect_exposures(holdings, impact))
            if holdings.portfolio_values().sum() > 0:
                values.append(op_economic_value(holdings))
            else:
                values.append(EconomicValue(np.zeros(b), 0.0))
        else:
            for layer in snapshot.direct_layers:
                if layer.name == token:
                    layers.append(layer)
                    values.append(None)
                    break
            else:
                raise ValueError(f"snapshot has no direct layer named {token!r}")
    return combine_layers(layers, values)


def with_exposure_delta(
    network: MultiLayerNetwork, layer_name: str, row: int, col: int, delta: float
) -> MultiLayerNetwork:
    """Return a copy of the network with one exposure entry shifted by ``delta``.

    Economic values of matrix-derived layers are recomputed on the
    perturbed exposures; externally supplied values (the OP layer's
    holdings-based value) are carried over unchanged.
    """
    new_layers = []
    new_values: list[EconomicValue | None] = []
    found = False
    for layer, val, source in zip(
        network.layers, network.layer_values, network.value_sources
    ):
        if layer.name == layer_name:
            found = True
            matrix = layer.matrix.copy()
            matrix[row, col] += delta
            layer = ExposureLayer(layer.name, matrix)
            val = val if source == _EXTERNAL else None
        else:
            val = val if source == _EXTERNAL else None
        new_layers.append(layer)
        new_values.append(val)
    if not found:
        raise KeyError(f"no layer named {layer_name!r}")
    return combine_layers(new_layers, new_values)


def without_exposure(
    network: MultiLayerNetwork, layer_name: str, row: int, col: int
) -> tuple[MultiLayerNetwork, float]:
    """Remove one exposure entirely; returns the reduced network and its size."""
    size = float(network.layer(layer_name).matrix[row, col])
    return with_exposure_delta(network, layer_name, row, col, -size), size


def normalized_debtrank(
    layer_results: np.ndarray, layer_total: float, combined_total: float
) -> np.ndarray:
    """Scale one layer's DebtRanks by its share of the combined value."""
    if combined_total <= 0:
        raise ValueError("combined economic value must be positive")
    return np.asarray(layer_results, dtype=float) * (layer_total / combined_total)


def average_debtrank(values) -> float:
    """Arithmetic mean of per-bank DebtRank values."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("cannot average an empty value set")
    return float(values.mean())


@dataclass(frozen=True)
class SRProfile:
    """Per-bank systemic-risk profile, ranked by combined DebtRank.

    Banks are sorted by descending combined DebtRank (ties broken by bank
    id); ``per_layer[name]`` holds the normalized per-layer contributions
    in the same order.
    """

    date: dt.date | None
    bank_ids: tuple[str, ...]
    combined: np.ndarray
    per_layer: dict[str, np.ndarray]


def sr_profile(
    network: MultiLayerNetwork,
    registry: BankRegistry,
    psi: float = 1.0,
    date: dt.date | None = None,
) -> SRProfile:
    """Rank banks by combined DebtRank with per-layer normalized values.

    Runs one single-seed cascade per bank on every layer and on the
    combined network (initial distress included in the DebtRank values).
    """
    if registry.n_banks != network.n_banks:
        raise ValueError("registry does not match network bank count")
    combined_values = network.combined_values
    W_comb = impact_matrix(network.combined, registry)
    r_comb = np.array(
        [
            res.debtrank_incl
            for res in debtrank_all_singletons(W_comb, combined_values, psi)
        ]
    )

    per_layer: dict[str, np.ndarray] = {}
    for layer, values in zip(network.layers, network.layer_values):
        W = impact_matrix(layer, registry)
        r_layer = np.array(
            [res.debtrank_incl for res in debtrank_all_singletons(W, values, psi)]
        )
        per_layer[layer.name] = normalized_debtrank(
            r_layer, values.total_value, combined_values.total_value
        )

    order = sorted(
        range(registry.n_banks), key=lambda i: (-r_comb[i], registry.bank_ids[i])
    )
    return SRProfile(
        date=date,
        bank_ids=tuple(registry.bank_ids[i] for i in order),
        combined=r_comb[order],
        per_layer={name: vals[order] for name, vals in per_layer.items()},
    )
