#!/usr/bin/env python3
"""Emit the stability-region map data for a few dimensions.

Writes scan CSVs (columns p,q,code) under data/ for N = 10, 11, 13; code 2
marks the region with stable radial solutions.  Plot with any CSV-aware
tool, e.g. a pcolormesh of code over the (p, q) lattice.
"""

from pathlib import Path

from lelab.cli import main

OUT = Path(__file__).resolve().parent.parent / "data"


def run() -> None:
    OUT.mkdir(exist_ok=True)
    for N in (10, 11, 13):
        rc = main([
            "--out", str(OUT), "scan", str(N),
            "--window", "1", "12", "1", "12", "--resolution", "300",
        ])
        if rc != 0:
            raise SystemExit(rc)


if __name__ == "__main__":
    run()
