#!/usr/bin/env python3
"""Compare the transmission data of two metrics channel by channel.

Delta(mu_n^2) of the first metric is set against Delta(mu~_n^2) of the
second after the angular shift is taken out, which is the question of
whether |T| alone tells the metrics apart.  Writes one CSV row per channel.
"""

from __future__ import annotations

import argparse
import csv
import logging
from pathlib import Path
from typing import Iterable

from liouville_scattering.config import load_config, resolve_threads
from liouville_scattering.const import CSV_FLOAT_FORMAT
from liouville_scattering.inverse_harness import FingerprintReport, fingerprint_compare
from liouville_scattering.metric import build_metric

LOGGER = logging.getLogger("transmission_scan")

HEADER = ["n", "mu_sq", "mu_sq_tilde", "abs_delta", "abs_delta_tilde", "deviation"]


def _rows(report: FingerprintReport) -> Iterable[list[str]]:
    for row in report.rows:
        first = complex(*row["Delta"])
        second = complex(*row["Delta_tilde"])
        yield [str(row["n"])] + [
            format(value, CSV_FLOAT_FORMAT)
            for value in (row["mu_sq"], row["mu_sq_tilde"], abs(first), abs(second), row["deviation"])
        ]


def write_csv(report: FingerprintReport, out_path: Path) -> None:
    with out_path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(HEADER)
        writer.writerows(_rows(report))


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("first", type=Path, help="Configuration of the first metric")
    parser.add_argument("second", type=Path, help="Configuration of the second metric")
    parser.add_argument("--tol", type=float, default=1e-6, help="Channel deviation tolerance")
    parser.add_argument("--threads", type=int, help="Worker threads per pipeline")
    parser.add_argument(
        "--out",
        type=Path,
        default=Path("transmission_scan.csv"),
        help="Where to write the CSV (default: transmission_scan.csv)",
    )
    parser.add_argument("--verbose", action="store_true", help="Enable debug logging")
    args = parser.parse_args()
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(message)s")

    first = load_config(args.first)
    second = load_config(args.second)
    report = fingerprint_compare(
        build_metric(first.metric),
        build_metric(second.metric),
        first.lam,
        first.n_channels,
        args.tol,
        quantity="Delta",
        C10=first.C10,
        C11=first.C11,
        threads=resolve_threads(args.threads, first.threads),
    )
    if not report.rows:
        raise SystemExit("No channels compared")

    write_csv(report, args.out)
    LOGGER.info("Compared %d channels, verdict %s, written to %s", len(report.rows), report.verdict, args.out)


if __name__ == "__main__":  # pragma: no cover - script entry point
    main()
