"""Core data model: banks, holdings, exposure layers and dated snapshots.

Orientation convention, fixed once for the whole package: in every exposure
matrix, entry ``X[i, j]`` is the loss suffered by bank ``j`` if bank ``i``
defaults (bank j is the creditor of / exposed party to bank i). All file
formats, projections and propagation code use this reading and never
re-interpret it.

All money amounts are assumed pre-converted to a single currency unit.
Instances are immutable after construction (arrays are copied and marked
read-only), so they are safe to share across threads.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

#: Canonical direct-exposure layer names.
DIRECT_LAYER_NAMES = ("DL", "deri", "secu", "FX")
#: Name of the overlapping-portfolio (indirect exposure) layer.
OP_LAYER = "OP"
#: Name of the combined (summed) layer.
COMBINED_LAYER = "comb"

# Relative slack for the per-asset holding cap, so that holdings rescaled to
# exactly full ownership do not trip the check on float rounding.
_OVERHOLD_RTOL = 1e-9


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class BankRegistry:
    """Identifiers, capital and default probabilities for a set of banks."""

    bank_ids: tuple[str, ...]
    equity: np.ndarray
    default_probability: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "bank_ids", tuple(self.bank_ids))
        object.__setattr__(self, "equity", _frozen_array(self.equity))
        object.__setattr__(
            self, "default_probability", _frozen_array(self.default_probability)
        )
        n = len(self.bank_ids)
        if self.equity.shape != (n,) or self.default_probability.shape != (n,):
            raise ValueError(
                f"registry arrays must have length {n} "
                f"(got equity {self.equity.shape}, p {self.default_probability.shape})"
            )

    @property
    def n_banks(self) -> int:
        return len(self.bank_ids)

    def index_of(self, bank_id: str) -> int:
        try:
            return self.bank_ids.index(bank_id)
        except ValueError:
            raise KeyError(f"unknown bank id {bank_id!r}") from None


@dataclass(frozen=True)
class HoldingsSnapshot:
    """Bipartite bank-asset holdings for one date.

    ``shares[i, a]`` is the number of shares of asset ``a`` held by bank
    ``i`` (bank order is the registry order of the owning snapshot),
    ``outstanding[a]`` the total shares issued and ``price[a]`` the market
    price per share.
    """

    date: dt.date
    asset_ids: tuple[str, ...]
    shares: np.ndarray
    outstanding: np.ndarray
    price: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "asset_ids", tuple(self.asset_ids))
        object.__setattr__(self, "shares", _frozen_array(self.shares))
        object.__setattr__(self, "outstanding", _frozen_array(self.outstanding))
        object.__setattr__(self, "price", _frozen_array(self.price))
        m = len(self.asset_ids)
        if self.shares.ndim != 2 or self.shares.shape[1] != m:
            raise ValueError(
                f"shares must be (banks, {m}), got {self.shares.shape}"
            )
        if self.outstanding.shape != (m,) or self.price.shape != (m,):
            raise ValueError("outstanding and price must have one entry per asset")

    @property
    def n_banks(self) -> int:
        return self.shares.shape[0]

    @property
    def n_assets(self) -> int:
        return len(self.asset_ids)

    def portfolio_values(self) -> np.ndarray:
        """Market value of each bank's portfolio (sum of price * shares)."""
        return self.shares @ self.price


@dataclass(frozen=True)
class ExposureLayer:
    """One named square exposure matrix on the shared bank index.

    ``matrix[i, j]`` is the loss of bank j on a default of bank i. Direct
    layers carry a zero diagonal; the OP layer may have positive diagonal
    entries (a bank's self-inflicted liquidation loss).
    """

    name: str
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen_array(self.matrix))
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.matrix.shape[1]:
            raise ValueError(f"exposure matrix must be square, got {self.matrix.shape}")

    @property
    def n_banks(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class SystemSnapshot:
    """A dated bundle of registry, holdings and direct exposure layers."""

    date: dt.date
    registry: BankRegistry
    holdings: HoldingsSnapshot | None = None
    direct_layers: tuple[ExposureLayer, ...] = ()
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "direct_layers", tuple(self.direct_layers))
        object.__setattr__(self, "metadata", dict(self.metadata))


@dataclass(frozen=True)
class Violation:
    """One breached invariant, naming the rule and where it failed."""

    invariant: str
    location: str
    message: str

    def __str__(self) -> str:
        return f"[{self.invariant}] at {self.location}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of validate_snapshot: hard violations plus advisory flags."""

    errors: tuple[Violation, ...] = ()
    warnings: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.errors

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        lines = [f"error: {v}" for v in self.errors]
        lines += [f"warning: {v}" for v in self.warnings]
        return "\n".join(lines) if lines else "ok"


def validate_snapshot(snapshot: SystemSnapshot) -> ValidationReport:
    """Check every model invariant; violations are returned, never raised.

    The report is empty (``ok``) iff all hard invariants hold. Assets held
    by no bank are permitted but reported as warnings ("inert").
    """
    errors: list[Violation] = []
    warnings: list[Violation] = []
    reg = snapshot.registry
    b = reg.n_banks

    seen: dict[str, int] = {}
    for k, bank_id in enumerate(reg.bank_ids):
        if not bank_id:
            errors.append(
                Violation("bank_ids non-empty", f"bank #{k}", "empty bank id")
            )
        if bank_id in seen:
            errors.append(
                Violation(
                    "bank_ids unique",
                    f"bank {bank_id!r}",
                    f"duplicate of bank #{seen[bank_id]}",
                )
            )
        else:
            seen[bank_id] = k

    for k, bank_id in enumerate(reg.bank_ids):
        if not reg.equity[k] > 0:
            errors.append(
                Violation(
                    "equity strictly positive",
                    f"bank {bank_id!r}",
                    f"equity = {reg.equity[k]}",
                )
            )
        p = reg.default_probability[k]
        if not (0.0 <= p <= 1.0):
            errors.append(
                Violation(
                    "default_probability in [0,1]",
                    f"bank {bank_id!r}",
                    f"p = {p}",
                )
            )

    if snapshot.holdings is None and not snapshot.direct_layers:
        errors.append(
            Violation(
                "holdings or direct layers present",
                "snapshot",
                "snapshot carries neither holdings nor direct layers",
            )
        )

    hold = snapshot.holdings
    if hold is not None:
        if hold.n_banks != b:
            errors.append(
                Violation(
                    "consistent bank index",
                    "holdings",
                    f"{hold.n_banks} bank rows vs {b} registry banks",
                )
            )
        if np.any(hold.shares < 0):
            i, a = np.argwhere(hold.shares < 0)[0]
            errors.append(
                Violation(
                    "shares nonnegative",
                    f"bank {reg.bank_ids[i] if i < b else i!r}, "
                    f"asset {hold.asset_ids[a]!r}",
                    f"shares = {hold.shares[i, a]}",
                )
            )
        for a, asset_id in enumerate(hold.asset_ids):
            if not hold.outstanding[a] > 0:
                errors.append(
                    Violation(
                        "outstanding positive",
                        f"asset {asset_id!r}",
                        f"outstanding = {hold.outstanding[a]}",
                    )
                )
            if not hold.price[a] > 0:
                errors.append(
                    Violation(
                        "price positive",
                        f"asset {asset_id!r}",
                        f"price = {hold.price[a]}",
                    )
                )
        held = hold.shares.sum(axis=0)
        cap = hold.outstanding * (1.0 + _OVERHOLD_RTOL)
        for a in np.nonzero(held > cap)[0]:
            errors.append(
                Violation(
                    "holdings within outstanding",
                    f"asset {hold.asset_ids[a]!r}",
                    f"banks hold {held[a]} of {hold.outstanding[a]} outstanding",
                )
            )
        for a in np.nonzero(held == 0)[0]:
            warnings.append(
                Violation(
                    "inert asset",
                    f"asset {hold.asset_ids[a]!r}",
                    "held by no bank",
                )
            )

    for layer in snapshot.direct_layers:
        loc = f"layer {layer.name!r}"
        if layer.n_banks != b:
            errors.append(
                Violation(
                    "consistent bank index",
                    loc,
                    f"matrix is {layer.matrix.shape} for {b} banks",
                )
            )
            continue
        if np.any(layer.matrix < 0):
            i, j = np.argwhere(layer.matrix < 0)[0]
            errors.append(
                Violation(
                    "exposures nonnegative",
                    f"{loc}, {reg.bank_ids[i]!r}->{reg.bank_ids[j]!r}",
                    f"amount = {layer.matrix[i, j]}",
                )
            )
        diag = np.diagonal(layer.matrix)
        if np.any(diag != 0):
            i = int(np.nonzero(diag)[0][0])
            errors.append(
                Violation(
                    "direct layers have zero diagonal",
                    f"{loc}, bank {reg.bank_ids[i]!r}",
                    f"diagonal entry = {diag[i]}",
                )
            )

    return ValidationReport(tuple(errors), tuple(warnings))


def align_banks(snapshots: Sequence[SystemSnapshot]) -> list[SystemSnapshot]:
    """Re-index a sequence of snapshots onto one common bank index.

    The common index is the union of all bank ids, ordered by first
    appearance across the sequence. Banks absent from a snapshot get zero
    matrix rows/columns and zero holdings; their equity is filled with 1.0
    (any positive value is inert, since all their exposures are zero) and
    their default probability with 0.0. Added banks are flagged in the
    snapshot metadata under ``"absent_banks"``.

    Raises ValueError if any snapshot contains a duplicate bank id.
    """
    snapshots = list(snapshots)
    if not snapshots:
        return []

    union: list[str] = []
    known: set[str] = set()
    for snap in snapshots:
        ids = snap.registry.bank_ids
        dupes = {x for x in ids if ids.count(x) > 1}
        if dupes:
            raise ValueError(
                f"duplicate bank id {sorted(dupes)[0]!r} in snapshot {snap.date}"
            )
        for bank_id in ids:
            if bank_id not in known:
                known.add(bank_id)
                union.append(bank_id)

    b = len(union)
    aligned = []
    for snap in snapshots:
        old_ids = snap.registry.bank_ids
        if tuple(union) == old_ids:
            aligned.append(snap)
            continue
        old_pos = {bank_id: k for k, bank_id in enumerate(old_ids)}
        rows = np.array([old_pos.get(bank_id, -1) for bank_id in union])
        present = rows >= 0

        equity = np.ones(b)
        p = np.zeros(b)
        equity[present] = snap.registry.equity[rows[present]]
        p[present] = snap.registry.default_probability[rows[present]]
        registry = BankRegistry(tuple(union), equity, p)

        holdings = snap.holdings
        if holdings is not None:
            shares = np.zeros((b, holdings.n_assets))
            shares[present] = holdings.shares[rows[present]]
            holdings = HoldingsSnapshot(
                holdings.date,
                holdings.asset_ids,
                shares,
                holdings.outstanding,
                holdings.price,
            )

        layers = []
        for layer in snap.direct_layers:
            matrix = np.zeros((b, b))
            matrix[np.ix_(present, present)] = layer.matrix[
                np.ix_(rows[present], rows[present])
            ]
            layers.append(ExposureLayer(layer.name, matrix))

        metadata = dict(snap.metadata)
        absent = [bank_id for bank_id, ok in zip(union, present) if not ok]
        if absent:
            metadata["absent_banks"] = ",".join(absent)
        aligned.append(
            SystemSnapshot(snap.date, registry, holdings, tuple(layers), metadata)
        )
    return aligned
