"""Command line interface: ``belyi compute | verify | enumerate``."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from . import pipeline
from .dessin import (DessinError, SearchLimitExceeded, group_order, is_primitive, make_filters,
                     parse_dessin, parse_passport, realizations_of_passport)
from .groups import AMBIENT_GROUPS
from .pipeline import EXIT_OK, EXIT_USAGE, EXIT_VERIFICATION, PipelineConfig, StageError
from .verify import CatalogError, load_catalog, read_entry, run_catalog, verify_entry


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="belyi", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true", help="log stage progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", help="compute and certify the Belyi function of a dessin")
    c.add_argument("dessin", type=Path, help="dessin file (n=, a=, b= lines)")
    c.add_argument("--precision", type=int, default=60, help="seed precision in digits")
    c.add_argument("--target", type=int, default=240, help="Newton target precision in digits")
    c.add_argument("--points", type=int, default=3, help="minimum sample points per boundary arc")
    c.add_argument("--series-n", type=int, default=None, help="initial series truncation (default 4n)")
    c.add_argument("--max-degree", type=int, default=8, help="largest number field degree tried")
    c.add_argument("--delta", type=float, default=0.99, help="LLL parameter")
    c.add_argument("--cache", type=Path, default=None,
                   help=f"cache directory (overridden by ${pipeline.CACHE_ENV})")
    c.add_argument("--label", default=None, help="orbit label written into the result")
    c.add_argument("-o", "--output", type=Path, default=None,
                   help="directory for the result bundle (default: print the result)")

    v = sub.add_parser("verify", help="re-check a stored result or the built-in catalog")
    v.add_argument("result", nargs="?", type=Path, help="result file in catalog-entry format")
    v.add_argument("--catalog", action="store_true", help="sweep the built-in catalog")

    e = sub.add_parser("enumerate", help="list dessins with a given passport")
    e.add_argument("passport", help='e.g. "(3^2|2^2 1^2|5 1)"')
    e.add_argument("--primitive", action="store_true", help="keep primitive monodromy groups only")
    e.add_argument("--order", type=int, default=None, help="keep groups of this order only")
    e.add_argument("--ambient", choices=sorted(AMBIENT_GROUPS), default=None,
                   help="draw permutations from this group (randomized, for large n)")
    e.add_argument("--tries", type=int, default=20000, help="random draws in randomized mode")
    e.add_argument("--seed", type=int, default=0, help="random seed in randomized mode")
    e.add_argument("-o", "--output", type=Path, default=None, help="directory for dessin files")
    return ap


def cmd_compute(args) -> int:
    try:
        config = PipelineConfig(seed_digits=args.precision, target_digits=args.target,
                                series_points_per_arc=args.points, series_N_start=args.series_n,
                                max_field_degree=args.max_degree, lll_delta=args.delta,
                                cache_dir=args.cache)
        d = parse_dessin(args.dessin.read_text())
        pipeline.check_input(d)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    t0 = time.perf_counter()
    try:
        result = pipeline.compute(d, config, label=args.label)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    logging.getLogger(__name__).info("computed in %.1f s", time.perf_counter() - t0)
    if args.output is not None:
        for path in result.write(args.output):
            print(path)
    else:
        sys.stdout.write(result.entry.to_text())
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.catalog == (args.result is not None):
        print("error: give either a result file or --catalog", file=sys.stderr)
        return EXIT_USAGE
    try:
        entries = load_catalog() if args.catalog else [read_entry(args.result)]
    except (OSError, CatalogError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.catalog:
        report = run_catalog(entries)
        sys.stdout.write(report.to_text())
        ok = report.ok and bool(report.rows)
    else:
        row = verify_entry(entries[0])
        print(row.line())
        ok = row.ok
    return EXIT_OK if ok else EXIT_VERIFICATION


def cmd_enumerate(args) -> int:
    try:
        p = parse_passport(args.passport)
        filters = make_filters(genus0=True, primitive=args.primitive, order=args.order)
        ambient = AMBIENT_GROUPS[args.ambient]() if args.ambient else None
        found = realizations_of_passport(p, filters, ambient=ambient, tries=args.tries,
                                         seed=args.seed)
    except (DessinError, SearchLimitExceeded, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not found:
        print(f"error: no dessin with passport {p} passes the filters", file=sys.stderr)
        return EXIT_USAGE
    if args.output is not None:
        args.output.mkdir(parents=True, exist_ok=True)
    for i, d in enumerate(found, 1):
        info = f"class {i}: order={group_order(d)} primitive={'yes' if is_primitive(d) else 'no'}"
        if args.output is not None:
            path = args.output / f"dessin-{i}.txt"
            path.write_text(d.to_text())
            info += f" -> {path}"
        print(info)
        if args.output is None:
            sys.stdout.write(d.to_text())
    return EXIT_OK


COMMANDS = {"compute": cmd_compute, "verify": cmd_verify, "enumerate": cmd_enumerate}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
