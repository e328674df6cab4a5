#!/usr/bin/env python3
"""Regenerate the golden fixtures under tests/fixtures/golden/.

Run from the repository root after an intentional change to output
formats, the generator or the cascade semantics, and review the diff; the
golden tests compare these files byte for byte (with the compiled kernel
backend active).
"""

import shutil
import sys
from pathlib import Path

from multirisk import kernels
from multirisk.cli import main

GOLDEN = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "golden"

GENERATE_ARGS = [
    "generate",
    "--out", str(GOLDEN / "dataset"),
    "--banks", "8",
    "--assets", "12",
    "--seed", "20130930",
    "--dates", "2",
    "--density", "0.3",
]


def run(args):
    code = main(args)
    if code != 0:
        raise SystemExit(f"command failed ({code}): {args}")


if __name__ == "__main__":
    if kernels.BACKEND != "compiled":
        sys.exit("goldens must be generated with the compiled kernel backend")
    if GOLDEN.exists():
        shutil.rmtree(GOLDEN)
    run(GENERATE_ARGS)
    manifest = str(GOLDEN / "dataset" / "manifest.json")
    run(["profile", "--manifest", manifest, "--out", str(GOLDEN / "profile")])
    run(["timeseries", "--manifest", manifest, "--out", str(GOLDEN / "timeseries")])
    run(["marginal", "--manifest", manifest, "--out", str(GOLDEN / "marginal"),
         "--with-exact-el"])
    print(f"regenerated goldens under {GOLDEN}")
