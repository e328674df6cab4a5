"""File formats, ingestion and report writing.

All data files are comma-separated text with a header row, preceded by one
comment line carrying the schema name and version (``# format=...``).
Exposure amounts are written debtor-first: a row ``(date, layer, debtor,
creditor, amount)`` means the creditor loses ``amount`` if the debtor
defaults. Numbers are serialized with shortest round-trip precision, so
``load(write(x)) == x`` bit for bit and repeated runs produce identical
bytes (no timestamps inside data rows).

A dataset is tied together by a JSON manifest listing one file set per
date plus the currency label and the gross/net basis of the exposures.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .losses import MarginalExposureRecord
from .model import (
    BankRegistry,
    ExposureLayer,
    HoldingsSnapshot,
    SystemSnapshot,
    validate_snapshot,
)
from .multilayer import SRProfile

FORMAT_VERSION = 1
_PREFIX = "multirisk"

MANIFEST_NAME = "manifest.json"
FILE_KINDS = ("holdings", "securities", "exposures", "capital", "probabilities")


class ParseError(Exception):
    """A file failed to parse or referenced unknown entities."""

    def __init__(self, path, line: int | None, message: str):
        self.path = str(path)
        self.line = line
        self.message = message
        where = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{where}: {message}")


class SnapshotInvalidError(Exception):
    """A loaded snapshot breaches model invariants."""

    def __init__(self, report):
        self.report = report
        super().__init__(str(report))


@dataclass(frozen=True)
class ManifestEntry:
    """Paths of one date's files, resolved against the manifest location."""

    date: dt.date
    paths: Mapping[str, Path]
    currency: str = ""
    exposure_basis: str = "unspecified"


@dataclass(frozen=True)
class DatasetManifest:
    """A dated list of file sets forming one dataset."""

    entries: tuple[ManifestEntry, ...]
    currency: str = ""
    exposure_basis: str = "unspecified"
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        dates = [e.date for e in self.entries]
        if sorted(set(dates)) != dates:
            raise ValueError("manifest dates must be unique and sorted")


def _fmt(x) -> str:
    """Shortest decimal representation that round-trips the float exactly."""
    return repr(float(x))


def _format_line(kind: str, extras: Mapping[str, str] | None = None) -> str:
    parts = [f"format={_PREFIX}.{kind}.v{FORMAT_VERSION}"]
    if extras:
        parts += [f"{key}={value}" for key, value in extras.items()]
    return "# " + " ".join(parts)


def _read_rows(path: Path, kind: str, columns: Sequence[str]):
    """Parse a data file into (format extras, [(line_number, row_dict)])."""
    extras: dict[str, str] = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ParseError(path, None, f"cannot read file: {exc}") from exc
    if not lines or not lines[0].startswith("# "):
        raise ParseError(path, 1, "missing format comment line")
    for token in lines[0][2:].split():
        key, _, value = token.partition("=")
        extras[key] = value
    expected = f"{_PREFIX}.{kind}.v{FORMAT_VERSION}"
    if extras.get("format") != expected:
        raise ParseError(
            path, 1, f"format is {extras.get('format')!r}, expected {expected!r}"
        )
    if len(lines) < 2:
        raise ParseError(path, 2, "missing header row")
    header = next(csv.reader([lines[1]]))
    if header != list(columns):
        raise ParseError(
            path, 2, f"header is {header}, expected {list(columns)}"
        )

    rows = []
    for lineno, line in enumerate(lines[2:], start=3):
        if not line.strip():
            continue
        fields = next(csv.reader([line]))
        if len(fields) != len(columns):
            raise ParseError(
                path, lineno, f"expected {len(columns)} fields, got {len(fields)}"
            )
        rows.append((lineno, dict(zip(columns, fields))))
    return extras, rows


def _parse_float(path, lineno, column, text) -> float:
    try:
        return float(text)
    except ValueError:
        raise ParseError(
            path, lineno, f"column {column!r}: not a number: {text!r}"
        ) from None


def _parse_date(path, lineno, text) -> dt.date:
    try:
        return dt.date.fromisoformat(text)
    except ValueError:
        raise ParseError(
            path, lineno, f"column 'date': not an ISO date: {text!r}"
        ) from None


def load_manifest(path) -> DatasetManifest:
    """Read a dataset manifest; file paths are resolved relative to it."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ParseError(path, None, f"cannot read manifest: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.lineno, f"invalid JSON: {exc.msg}") from exc
    if raw.get("format_version") != FORMAT_VERSION:
        raise ParseError(
            path, None,
            f"manifest format_version {raw.get('format_version')!r}, "
            f"expected {FORMAT_VERSION}",
        )
    currency = raw.get("currency", "")
    basis = raw.get("exposure_basis", "unspecified")
    entries = []
    for item in raw.get("entries", []):
        try:
            date = dt.date.fromisoformat(item["date"])
        except (KeyError, ValueError):
            raise ParseError(
                path, None, f"entry has a missing or invalid date: {item!r}"
            ) from None
        paths = {
            kind: path.parent / item[kind] for kind in FILE_KINDS if item.get(kind)
        }
        entries.append(ManifestEntry(date, paths, currency, basis))
    try:
        return DatasetManifest(tuple(entries), currency, basis)
    except ValueError as exc:
        raise ParseError(path, None, str(exc)) from None


def load_snapshot(entry: ManifestEntry, validate: bool = True) -> SystemSnapshot:
    """Load one date's snapshot from the files of a manifest entry.

    With ``validate`` (the default), a snapshot that breaches model
    invariants raises :class:`SnapshotInvalidError`.
    """
    if "capital" not in entry.paths:
        raise ParseError("<manifest>", None, f"{entry.date}: no capital file")
    path = entry.paths["capital"]
    _, rows = _read_rows(path, "capital", ("date", "bank_id", "equity"))
    bank_ids: list[str] = []
    equity: list[float] = []
    seen_banks: dict[str, int] = {}
    for lineno, row in rows:
        if _parse_date(path, lineno, row["date"]) != entry.date:
            continue
        bank = row["bank_id"]
        if bank in seen_banks:
            raise ParseError(path, lineno, f"duplicate capital row for bank {bank!r}")
        seen_banks[bank] = len(bank_ids)
        bank_ids.append(bank)
        equity.append(_parse_float(path, lineno, "equity", row["equity"]))
    if not bank_ids:
        raise ParseError(path, None, f"no capital rows for date {entry.date}")

    if "probabilities" not in entry.paths:
        raise ParseError("<manifest>", None, f"{entry.date}: no probabilities file")
    path = entry.paths["probabilities"]
    _, rows = _read_rows(path, "probabilities", ("bank_id", "p"))
    p = np.full(len(bank_ids), np.nan)
    for lineno, row in rows:
        bank = row["bank_id"]
        if bank not in seen_banks:
            raise ParseError(path, lineno, f"unknown bank id {bank!r}")
        if not np.isnan(p[seen_banks[bank]]):
            raise ParseError(path, lineno, f"duplicate probability for bank {bank!r}")
        p[seen_banks[bank]] = _parse_float(path, lineno, "p", row["p"])
    missing = [bank_ids[i] for i in np.nonzero(np.isnan(p))[0]]
    if missing:
        raise ParseError(path, None, f"no default probability for bank {missing[0]!r}")
    registry = BankRegistry(tuple(bank_ids), np.array(equity), p)

    holdings = None
    if "securities" in entry.paths or "holdings" in entry.paths:
        if not ("securities" in entry.paths and "holdings" in entry.paths):
            raise ParseError(
                "<manifest>", None,
                f"{entry.date}: holdings and securities files must come together",
            )
        path = entry.paths["securities"]
        _, rows = _read_rows(
            path, "securities", ("date", "asset_id", "outstanding", "price")
        )
        asset_ids: list[str] = []
        outstanding: list[float] = []
        price: list[float] = []
        seen_assets: dict[str, int] = {}
        for lineno, row in rows:
            if _parse_date(path, lineno, row["date"]) != entry.date:
                continue
            asset = row["asset_id"]
            if asset in seen_assets:
                raise ParseError(path, lineno, f"duplicate security row for {asset!r}")
            seen_assets[asset] = len(asset_ids)
            asset_ids.append(asset)
            outstanding.append(
                _parse_float(path, lineno, "outstanding", row["outstanding"])
            )
            price.append(_parse_float(path, lineno, "price", row["price"]))

        path = entry.paths["holdings"]
        _, rows = _read_rows(path, "holdings", ("date", "bank_id", "asset_id", "shares"))
        shares = np.zeros((len(bank_ids), len(asset_ids)))
        filled: set[tuple[int, int]] = set()
        for lineno, row in rows:
            if _parse_date(path, lineno, row["date"]) != entry.date:
                continue
            bank, asset = row["bank_id"], row["asset_id"]
            if bank not in seen_banks:
                raise ParseError(path, lineno, f"unknown bank id {bank!r}")
            if asset not in seen_assets:
                raise ParseError(path, lineno, f"unknown asset id {asset!r}")
            cell = (seen_banks[bank], seen_assets[asset])
            if cell in filled:
                raise ParseError(
                    path, lineno, f"duplicate holding row for ({bank!r}, {asset!r})"
                )
            filled.add(cell)
            amount = _parse_float(path, lineno, "shares", row["shares"])
            if amount < 0:
                raise ParseError(
                    path, lineno, f"negative shares for ({bank!r}, {asset!r}): {amount}"
                )
            shares[cell] = amount
        holdings = HoldingsSnapshot(
            entry.date, tuple(asset_ids), shares, np.array(outstanding), np.array(price)
        )

    layers: list[ExposureLayer] = []
    if "exposures" in entry.paths:
        path = entry.paths["exposures"]
        extras, rows = _read_rows(
            path, "exposures", ("date", "layer", "debtor_id", "creditor_id", "amount")
        )
        roster = [name for name in extras.get("layers", "").split(",") if name]
        if not roster:
            raise ParseError(path, 1, "format line must list layers=<name,...>")
        matrices = {name: np.zeros((len(bank_ids), len(bank_ids))) for name in roster}
        filled_edges: set[tuple[str, int, int]] = set()
        for lineno, row in rows:
            if _parse_date(path, lineno, row["date"]) != entry.date:
                continue
            layer = row["layer"]
            if layer not in matrices:
                raise ParseError(path, lineno, f"layer {layer!r} not in roster {roster}")
            debtor, creditor = row["debtor_id"], row["creditor_id"]
            for bank in (debtor, creditor):
                if bank not in seen_banks:
                    raise ParseError(path, lineno, f"unknown bank id {bank!r}")
            edge = (layer, seen_banks[debtor], seen_banks[creditor])
            if edge in filled_edges:
                raise ParseError(
                    path, lineno,
                    f"duplicate exposure row {layer}:{debtor!r}->{creditor!r}",
                )
            filled_edges.add(edge)
            amount = _parse_float(path, lineno, "amount", row["amount"])
            if amount < 0:
                raise ParseError(path, lineno, f"negative exposure amount {amount}")
            matrices[layer][seen_banks[debtor], seen_banks[creditor]] = amount
        layers = [ExposureLayer(name, matrices[name]) for name in roster]

    metadata = {"currency": entry.currency, "exposure_basis": entry.exposure_basis}
    snapshot = SystemSnapshot(
        entry.date, registry, holdings, tuple(layers), metadata
    )
    if validate:
        report = validate_snapshot(snapshot)
        if not report.ok:
            raise SnapshotInvalidError(report)
    return snapshot


def load_dataset(manifest_path, validate: bool = True) -> list[SystemSnapshot]:
    """Load every dated snapshot listed in a manifest."""
    manifest = load_manifest(manifest_path)
    return [load_snapshot(entry, validate=validate) for entry in manifest.entries]


# ---------------------------------------------------------------------------
# writers

def _write_csv(path: Path, kind: str, columns, rows, extras=None) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(_format_line(kind, extras) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)


def write_snapshot(snapshot: SystemSnapshot, out_dir, prefix: str = "") -> dict[str, Path]:
    """Write one snapshot's file set; returns the paths keyed by file kind.

    Only nonzero holdings and exposures are emitted; ordering follows the
    registry/asset order, so output bytes are deterministic.
    """
    out_dir = Path(out_dir)
    date = snapshot.date.isoformat()
    reg = snapshot.registry
    paths: dict[str, Path] = {}

    paths["capital"] = out_dir / f"{prefix}capital-{date}.csv"
    _write_csv(
        paths["capital"],
        "capital",
        ("date", "bank_id", "equity"),
        [(date, bank, _fmt(reg.equity[i])) for i, bank in enumerate(reg.bank_ids)],
    )

    paths["probabilities"] = out_dir / f"{prefix}probabilities-{date}.csv"
    _write_csv(
        paths["probabilities"],
        "probabilities",
        ("bank_id", "p"),
        [
            (bank, _fmt(reg.default_probability[i]))
            for i, bank in enumerate(reg.bank_ids)
        ],
    )

    if snapshot.holdings is not None:
        hold = snapshot.holdings
        paths["securities"] = out_dir / f"{prefix}securities-{date}.csv"
        _write_csv(
            paths["securities"],
            "securities",
            ("date", "asset_id", "outstanding", "price"),
            [
                (date, asset, _fmt(hold.outstanding[a]), _fmt(hold.price[a]))
                for a, asset in enumerate(hold.asset_ids)
            ],
        )
        paths["holdings"] = out_dir / f"{prefix}holdings-{date}.csv"
        rows = []
        for i, bank in enumerate(reg.bank_ids):
            for a in np.nonzero(hold.shares[i])[0]:
                rows.append((date, bank, hold.asset_ids[a], _fmt(hold.shares[i, a])))
        _write_csv(
            paths["holdings"], "holdings", ("date", "bank_id", "asset_id", "shares"), rows
        )

    if snapshot.direct_layers:
        paths["exposures"] = out_dir / f"{prefix}exposures-{date}.csv"
        rows = []
        for layer in snapshot.direct_layers:
            debtors, creditors = np.nonzero(layer.matrix)
            for i, j in zip(debtors, creditors):
                rows.append(
                    (
                        date,
                        layer.name,
                        reg.bank_ids[i],
                        reg.bank_ids[j],
                        _fmt(layer.matrix[i, j]),
                    )
                )
        _write_csv(
            paths["exposures"],
            "exposures",
            ("date", "layer", "debtor_id", "creditor_id", "amount"),
            rows,
            extras={"layers": ",".join(l.name for l in snapshot.direct_layers)},
        )
    return paths


def write_manifest(
    entries: Iterable[Mapping[str, str]],
    path,
    currency: str = "",
    exposure_basis: str = "unspecified",
) -> Path:
    """Write a manifest; each entry maps 'date' and file kinds to relative paths."""
    path = Path(path)
    payload = {
        "format_version": FORMAT_VERSION,
        "currency": currency,
        "exposure_basis": exposure_basis,
        "entries": list(entries),
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


@dataclass(frozen=True)
class AverageDebtRankSeries:
    """Average DebtRank per layer and for the combined network, by date."""

    dates: tuple[dt.date, ...]
    layer_names: tuple[str, ...]
    per_layer: Mapping[str, np.ndarray]
    combined: np.ndarray
    psi: float = 1.0


def write_report(results, out_dir) -> Path:
    """Write a result object to its tabular report file; returns the path.

    Accepts an :class:`~multirisk.multilayer.SRProfile` (profile table), an
    :class:`AverageDebtRankSeries` (time-series table) or a list of
    :class:`~multirisk.losses.MarginalExposureRecord` (marginal table).
    """
    out_dir = Path(out_dir)
    if isinstance(results, SRProfile):
        path = out_dir / "profile.csv"
        layer_names = tuple(results.per_layer)
        columns = ("bank_id", "r_comb") + tuple(
            f"rhat_{name}" for name in layer_names
        )
        rows = [
            (bank, _fmt(results.combined[i]))
            + tuple(_fmt(results.per_layer[name][i]) for name in layer_names)
            for i, bank in enumerate(results.bank_ids)
        ]
        _write_csv(path, "profile", columns, rows)
        return path
    if isinstance(results, AverageDebtRankSeries):
        path = out_dir / "timeseries.csv"
        columns = (
            ("date",)
            + tuple(f"rbar_{name}" for name in results.layer_names)
            + ("rbar_comb",)
        )
        rows = [
            (date.isoformat(),)
            + tuple(_fmt(results.per_layer[name][t]) for name in results.layer_names)
            + (_fmt(results.combined[t]),)
            for t, date in enumerate(results.dates)
        ]
        _write_csv(path, "timeseries", columns, rows)
        return path
    if isinstance(results, list) and all(
        isinstance(r, MarginalExposureRecord) for r in results
    ):
        path = out_dir / "marginal.csv"
        columns = ("from_bank", "to_bank", "layer", "exposure_size", "delta_el")
        rows = [
            (r.from_bank, r.to_bank, r.layer, _fmt(r.exposure_size), _fmt(r.delta_el))
            for r in results
        ]
        _write_csv(path, "marginal", columns, rows)
        return path
    raise TypeError(f"no report writer for {type(results)!r}")


def write_run_metadata(metadata: Mapping, out_dir) -> Path:
    """Persist the parameters that reproduce a run (no timestamps)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "run_metadata.json"
    path.write_text(json.dumps(metadata, indent=2, sort_keys=True) + "\n")
    return path
