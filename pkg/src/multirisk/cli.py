"""Batch command-line front end.

Subcommands: ``profile`` (per-bank SR-profile for one date), ``timeseries``
(average DebtRank per layer over all dates), ``marginal`` (expected-loss
contribution of every single exposure), ``generate`` (synthetic dataset)
and ``validate`` (invariant check of a dataset). Identical inputs and
flags produce byte-identical outputs.

Exit codes: 0 success, 2 input or validation error, 3 computation-limit
error (exact expected loss over the bank limit).
"""

from __future__ import annotations

import argparse
import datetime as dt
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dataio import (
    FORMAT_VERSION,
    AverageDebtRankSeries,
    ParseError,
    SnapshotInvalidError,
    load_manifest,
    load_snapshot,
    write_manifest,
    write_report,
    write_run_metadata,
    write_snapshot,
)
from .generator import GeneratorConfig, generate_series
from .losses import BankLimitError, expected_loss_approx, expected_loss_exact, marginal_scan
from .model import align_banks, validate_snapshot
from .multilayer import average_debtrank, build_network, sr_profile
from .projection import calibrate_alpha

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_LIMIT = 3


def _add_common(parser: argparse.ArgumentParser, dated: bool) -> None:
    parser.add_argument("--manifest", required=True, help="dataset manifest path")
    parser.add_argument("--out", required=True, help="output directory")
    if dated:
        parser.add_argument(
            "--date", help="snapshot date (ISO); defaults to the first manifest date"
        )
    parser.add_argument("--psi", type=float, default=1.0, help="initial distress level")
    parser.add_argument(
        "--mode",
        choices=("linear", "absorption"),
        default="linear",
        help="bank-asset impact mode",
    )
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--alpha", type=float, help="absorption impact parameter")
    group.add_argument(
        "--calibrate",
        nargs=2,
        type=float,
        metavar=("SOLD_FRACTION", "PRICE_DROP"),
        help="calibrate alpha from a sold fraction and the induced price drop",
    )
    parser.add_argument(
        "--layers",
        default=None,
        help="comma list of layers: direct layer names, 'direct' (pre-summed), 'OP'",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multirisk",
        description="Systemic-risk analytics on multi-layer exposure networks",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="per-bank SR-profile for one date")
    _add_common(p, dated=True)

    p = sub.add_parser("timeseries", help="average DebtRank per layer over all dates")
    _add_common(p, dated=False)

    p = sub.add_parser("marginal", help="marginal expected loss of every exposure")
    _add_common(p, dated=True)
    p.add_argument(
        "--with-exact-el",
        action="store_true",
        help="also record the exact power-set expected loss in the metadata",
    )
    p.add_argument(
        "--exact-limit",
        type=int,
        default=16,
        help="refuse exact expected loss beyond this many banks",
    )

    p = sub.add_parser("generate", help="write a synthetic dataset")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--banks", type=int, default=20)
    p.add_argument("--assets", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--density", type=float, default=0.25, help="holdings density")
    p.add_argument(
        "--tail-exponent", type=float, default=1.5, help="portfolio size tail exponent"
    )
    p.add_argument(
        "--direct-density",
        type=float,
        default=None,
        help="one density applied to every direct layer (default: per-layer mix)",
    )
    p.add_argument("--dates", type=int, default=1, help="number of snapshot dates")
    p.add_argument("--start-date", default="2013-09-30", help="first date (ISO)")
    p.add_argument("--equity-scale", type=float, default=1e6)
    p.add_argument(
        "--p-range",
        nargs=2,
        type=float,
        default=(0.001, 0.01),
        metavar=("LO", "HI"),
        help="default-probability range",
    )
    p.add_argument("--currency", default="XTS")

    p = sub.add_parser("validate", help="check a dataset against model invariants")
    p.add_argument("--manifest", required=True)
    p.add_argument("--date", help="restrict to one date")

    return parser


def _resolve_alpha(args) -> float | None:
    if args.calibrate is not None:
        return calibrate_alpha(args.calibrate[0], args.calibrate[1])
    return args.alpha


def _layer_selection(args) -> list[str] | None:
    if args.layers is None:
        return None
    tokens = [t.strip() for t in args.layers.split(",") if t.strip()]
    if not tokens:
        raise ValueError("--layers must name at least one layer")
    return tokens


def _pick_entry(manifest, date_text: str | None):
    if date_text is None:
        if not manifest.entries:
            raise ValueError("manifest lists no dates")
        return manifest.entries[0]
    date = dt.date.fromisoformat(date_text)
    for entry in manifest.entries:
        if entry.date == date:
            return entry
    raise ValueError(f"manifest has no entry for date {date}")


def _base_metadata(args, alpha) -> dict:
    return {
        "package_version": __version__,
        "format_version": FORMAT_VERSION,
        "command": args.command,
        "manifest": getattr(args, "manifest", None),
        "psi": args.psi,
        "impact_mode": args.mode,
        "alpha": alpha,
        "layers": args.layers,
    }


def _cmd_profile(args) -> int:
    alpha = _resolve_alpha(args)
    manifest = load_manifest(args.manifest)
    entry = _pick_entry(manifest, args.date)
    snapshot = load_snapshot(entry)
    network = build_network(
        snapshot, mode=args.mode, alpha=alpha, layer_selection=_layer_selection(args)
    )
    profile = sr_profile(network, snapshot.registry, args.psi, date=snapshot.date)
    out = Path(args.out)
    path = write_report(profile, out)
    metadata = _base_metadata(args, alpha)
    metadata.update({"date": snapshot.date.isoformat(), "outputs": [path.name]})
    write_run_metadata(metadata, out)
    return EXIT_OK


def _cmd_timeseries(args) -> int:
    alpha = _resolve_alpha(args)
    manifest = load_manifest(args.manifest)
    if not manifest.entries:
        raise ValueError("manifest lists no dates")
    snapshots = align_banks([load_snapshot(entry) for entry in manifest.entries])
    selection = _layer_selection(args)

    dates = []
    per_layer: dict[str, list[float]] = {}
    combined = []
    layer_names: tuple[str, ...] | None = None
    for snapshot in snapshots:
        network = build_network(
            snapshot, mode=args.mode, alpha=alpha, layer_selection=selection
        )
        if layer_names is None:
            layer_names = network.layer_names
            per_layer = {name: [] for name in layer_names}
        elif network.layer_names != layer_names:
            raise ValueError(
                f"layer set changed across dates: {network.layer_names} "
                f"vs {layer_names}"
            )
        profile = sr_profile(network, snapshot.registry, args.psi, date=snapshot.date)
        dates.append(snapshot.date)
        for name in layer_names:
            per_layer[name].append(average_debtrank(profile.per_layer[name]))
        combined.append(average_debtrank(profile.combined))

    series = AverageDebtRankSeries(
        dates=tuple(dates),
        layer_names=layer_names,
        per_layer={name: np.array(vals) for name, vals in per_layer.items()},
        combined=np.array(combined),
        psi=args.psi,
    )
    out = Path(args.out)
    path = write_report(series, out)
    metadata = _base_metadata(args, alpha)
    metadata.update(
        {"dates": [d.isoformat() for d in dates], "outputs": [path.name]}
    )
    write_run_metadata(metadata, out)
    return EXIT_OK


def _cmd_marginal(args) -> int:
    alpha = _resolve_alpha(args)
    manifest = load_manifest(args.manifest)
    entry = _pick_entry(manifest, args.date)
    snapshot = load_snapshot(entry)
    network = build_network(
        snapshot, mode=args.mode, alpha=alpha, layer_selection=_layer_selection(args)
    )
    records = marginal_scan(network, snapshot.registry, args.psi)
    el_approx = expected_loss_approx(network, snapshot.registry, args.psi)
    metadata = _base_metadata(args, alpha)
    metadata.update(
        {
            "date": snapshot.date.isoformat(),
            "expected_loss_approx": el_approx.value,
            "records": len(records),
        }
    )
    if args.with_exact_el:
        el_exact = expected_loss_exact(
            network, snapshot.registry, args.psi, max_banks=args.exact_limit
        )
        metadata["expected_loss_exact"] = el_exact.value
        metadata["exact_weight_sum"] = el_exact.weight_sum
    out = Path(args.out)
    path = write_report(records, out)
    metadata["outputs"] = [path.name]
    write_run_metadata(metadata, out)
    return EXIT_OK


def _cmd_generate(args) -> int:
    kwargs = dict(
        banks=args.banks,
        assets=args.assets,
        seed=args.seed,
        holdings_density=args.density,
        tail_exponent=args.tail_exponent,
        equity_scale=args.equity_scale,
        default_probability_range=tuple(args.p_range),
        n_dates=args.dates,
        start_date=dt.date.fromisoformat(args.start_date),
        currency=args.currency,
    )
    if args.direct_density is not None:
        kwargs["direct_density"] = {
            name: args.direct_density for name in ("DL", "deri", "secu", "FX")
        }
    config = GeneratorConfig(**kwargs)
    snapshots = generate_series(config)
    out = Path(args.out)
    entries = []
    for snapshot in snapshots:
        paths = write_snapshot(snapshot, out)
        entry = {"date": snapshot.date.isoformat()}
        entry.update({kind: path.name for kind, path in paths.items()})
        entries.append(entry)
    write_manifest(
        entries,
        out / "manifest.json",
        currency=config.currency,
        exposure_basis="gross",
    )
    metadata = {
        "package_version": __version__,
        "format_version": FORMAT_VERSION,
        "command": "generate",
        "banks": config.banks,
        "assets": config.assets,
        "seed": config.seed,
        "holdings_density": config.holdings_density,
        "tail_exponent": config.tail_exponent,
        "direct_density": dict(config.direct_density),
        "equity_scale": config.equity_scale,
        "default_probability_range": list(config.default_probability_range),
        "dates": [s.date.isoformat() for s in snapshots],
        "currency": config.currency,
    }
    write_run_metadata(metadata, out)
    return EXIT_OK


def _cmd_validate(args) -> int:
    manifest = load_manifest(args.manifest)
    entries = manifest.entries
    if args.date is not None:
        entries = (_pick_entry(manifest, args.date),)
    all_ok = True
    for entry in entries:
        snapshot = load_snapshot(entry, validate=False)
        report = validate_snapshot(snapshot)
        status = "ok" if report.ok else "INVALID"
        print(f"{entry.date}: {status}")
        for violation in report.errors:
            print(f"  error: {violation}")
        for violation in report.warnings:
            print(f"  warning: {violation}")
        all_ok = all_ok and report.ok
    return EXIT_OK if all_ok else EXIT_INPUT


_COMMANDS = {
    "profile": _cmd_profile,
    "timeseries": _cmd_timeseries,
    "marginal": _cmd_marginal,
    "generate": _cmd_generate,
    "validate": _cmd_validate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except BankLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except (ParseError, SnapshotInvalidError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
