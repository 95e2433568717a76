"""Command line pipeline: metrics, degree fits, percolation, scoring, report."""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from hvgrid import __version__
from hvgrid._io import atomic_write
from hvgrid.degree_fit import GAMMA_COLUMNS, degree_pdf, gamma_suite, relative_decrease
from hvgrid.errors import GridError
from hvgrid.graph import CANONICAL_VARIANTS, derive_variant, read_edge_list
from hvgrid.metrics import REPORT_COLUMNS, compute_report
from hvgrid.percolation import (
    CANONICAL_FRACTIONS,
    DEFAULT_RUNS,
    DEFAULT_SEED,
    METRICS,
    canonical_scenarios,
    run_scenarios,
)
from hvgrid.scoring import composite, raw_from_summaries

log = logging.getLogger("hvgrid")

SEED_ENV = "HVGRID_SEED"
DATASET_CODE = re.compile(r"^[A-Z]{2}$")
TABLE_COLUMNS = ("network", *REPORT_COLUMNS, *GAMMA_COLUMNS)


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    inputs: list
    out: Path
    master_seed: int = DEFAULT_SEED
    runs: int = DEFAULT_RUNS
    fractions: tuple = CANONICAL_FRACTIONS
    workers: int = 1
    fmt: str = "csv"

    def __post_init__(self):
        if self.runs < 1:
            raise UsageError("--runs must be at least 1")
        if self.workers < 1:
            raise UsageError("--workers must be at least 1")

    @property
    def scenarios(self):
        return canonical_scenarios(self.runs, self.master_seed, self.fractions)


def network_code(path):
    """Network name from a file name; two-letter stems are country codes."""
    stem = Path(path).stem
    code = stem.upper()
    return code if DATASET_CODE.match(code) else stem


def resolve_seed(flag):
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return DEFAULT_SEED


def _fmt(v):
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


def _table(rows, columns, fmt):
    if fmt == "json":
        return json.dumps([dict(zip(columns, r)) for r in rows], indent=2, allow_nan=True) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def _load(cfg):
    graphs, failures = [], []
    for path in cfg.inputs:
        try:
            graphs.append(read_edge_list(path, name=network_code(path)))
        except (GridError, OSError, UnicodeDecodeError) as exc:
            log.error("%s", exc)
            failures.append(str(path))
    return graphs, failures


def _metrics_one(g):
    report = compute_report(g)
    try:
        suite = gamma_suite(g)
        gammas = [suite[v].gamma for v in CANONICAL_VARIANTS]
        err = None
    except GridError as exc:
        gammas, err = [math.nan] * 4, str(exc)
    return report, gammas, err


def cmd_metrics(cfg: RunConfig) -> int:
    graphs, failures = _load(cfg)
    out = cfg.out / "metrics"
    rows = []
    if cfg.workers > 1 and len(graphs) > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_metrics_one, graphs))
    else:
        results = [_metrics_one(g) for g in graphs]
    for g, (report, gammas, err) in sorted(zip(graphs, results), key=lambda t: t[0].name):
        if err:
            log.error("%s", err)
            failures.append(g.name)
        rows.append([g.name, *report.row(), *gammas])
        atomic_write(out / f"{g.name}.json", json.dumps(
            {**report.to_dict(), **dict(zip(GAMMA_COLUMNS, gammas))}, indent=2, sort_keys=True) + "\n")
        atomic_write(out / "distances" / f"{g.name}.csv", report.distances.to_csv())
    atomic_write(out / f"summary.{cfg.fmt}", _table(rows, TABLE_COLUMNS, cfg.fmt))
    return 1 if failures else 0


def cmd_degree_fit(cfg: RunConfig) -> int:
    graphs, failures = _load(cfg)
    out = cfg.out / "degree_fit"
    rows, dec_rows = [], []
    for g in sorted(graphs, key=lambda g: g.name):
        try:
            suite = gamma_suite(g)
        except GridError as exc:
            log.error("%s", exc)
            failures.append(g.name)
            continue
        for spec in CANONICAL_VARIANTS:
            pdf = degree_pdf(derive_variant(g, spec))
            atomic_write(out / "pdf" / f"{g.name}_{spec.label}.csv", pdf.to_csv())
        fits = [suite[v] for v in CANONICAL_VARIANTS]
        rows.append([g.name, *(f.gamma for f in fits), *(f.r_squared for f in fits)])
        dec_rows.append([g.name, *relative_decrease(suite)])
    cols = ("network", *GAMMA_COLUMNS, *(c.replace("gamma", "r2") for c in GAMMA_COLUMNS))
    atomic_write(out / f"gamma.{cfg.fmt}", _table(rows, cols, cfg.fmt))
    if dec_rows:
        n = len(dec_rows)
        dec_rows.append(["MEAN", sum(r[1] for r in dec_rows) / n, sum(r[2] for r in dec_rows) / n])
    atomic_write(out / f"relative_decrease.{cfg.fmt}",
                 _table(dec_rows, ("network", "hv", "ge220kv"), cfg.fmt))
    return 1 if failures else 0


def cmd_percolate(cfg: RunConfig) -> int:
    graphs, failures = _load(cfg)
    for g in sorted(graphs, key=lambda g: g.name):
        try:
            results = run_scenarios(g, cfg.scenarios, workers=cfg.workers)
        except GridError as exc:
            log.error("%s: %s", g.name, exc)
            failures.append(g.name)
            continue
        base = cfg.out / "percolation" / g.name
        for res in results:
            label = res.scenario.label
            atomic_write(base / f"{label}_records.csv", res.records_csv())
            atomic_write(base / f"{label}_summary.json", res.summary_json())
            for metric, hist in res.histograms.items():
                atomic_write(base / f"{label}_hist_{metric}.csv", hist.to_csv())
        log.info("%s: %d scenarios done", g.name, len(results))
    return 1 if failures else 0


def _networks_for_score(cfg):
    if cfg.inputs:
        return sorted(network_code(p) for p in cfg.inputs)
    root = cfg.out / "percolation"
    if not root.is_dir():
        raise UsageError(f"no percolation results under {root}")
    return sorted(p.name for p in root.iterdir() if p.is_dir())


def cmd_score(cfg: RunConfig) -> int:
    docs = []
    for net in _networks_for_score(cfg):
        for s in cfg.scenarios:
            path = cfg.out / "percolation" / net / f"{s.label}_summary.json"
            if not path.exists():
                raise GridError(f"missing percolation result: network={net} scenario={s.label} ({path})")
            docs.append(json.loads(path.read_text(encoding="utf-8")))
    table = composite(raw_from_summaries(docs), scenarios=[s.label for s in cfg.scenarios])
    out = cfg.out / "score"
    if cfg.fmt == "json":
        atomic_write(out / "composite.json", json.dumps(
            {n: {"node_composite": table.node_composite[n], "edge_composite": table.edge_composite[n],
                 "composite": table.composite[n], "group": table.group.get(n, "")}
             for n in table.networks}, indent=2, sort_keys=True, allow_nan=True) + "\n")
    else:
        atomic_write(out / "composite.csv", table.composite_csv())
    atomic_write(out / "z_table.csv", table.z_csv())
    atomic_write(out / "scatter.csv", table.scatter_csv())
    return 0


def cmd_report(cfg: RunConfig) -> int:
    codes = [cmd_metrics(cfg), cmd_degree_fit(cfg), cmd_percolate(cfg)]
    try:
        codes.append(cmd_score(cfg))
    except GridError as exc:
        log.error("%s", exc)
        codes.append(1)
    return max(codes)


COMMANDS = {
    "metrics": cmd_metrics,
    "degree-fit": cmd_degree_fit,
    "percolate": cmd_percolate,
    "score": cmd_score,
    "report": cmd_report,
}


def _fractions(text):
    try:
        vals = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad fraction list {text!r}") from None
    if not vals or any(not 0 < v < 1 for v in vals):
        raise argparse.ArgumentTypeError("fractions must lie in (0, 1)")
    return vals


def build_parser():
    p = argparse.ArgumentParser(prog="hvgrid", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--input-dir", type=Path, help="directory of <CODE>.csv edge lists")
        s.add_argument("--out", type=Path, default=Path("out"))
        s.add_argument("--seed", type=int, default=None, help=f"master seed (else ${SEED_ENV}, else {DEFAULT_SEED})")
        s.add_argument("--runs", type=int, default=DEFAULT_RUNS)
        s.add_argument("--fractions", type=_fractions, default=CANONICAL_FRACTIONS)
        s.add_argument("--workers", type=int, default=1)
        s.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        inputs = []
        if args.input_dir is not None:
            if not args.input_dir.is_dir():
                raise UsageError(f"--input-dir {args.input_dir} is not a directory")
            inputs = sorted(args.input_dir.glob("*.csv"))
            if not inputs:
                raise UsageError(f"no .csv files in {args.input_dir}")
        elif args.command != "score":
            raise UsageError("--input-dir is required")
        cfg = RunConfig(inputs, args.out, resolve_seed(args.seed), args.runs,
                        args.fractions, args.workers, args.fmt)
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"hvgrid: error: {exc}", file=sys.stderr)
        return 2
    except GridError as exc:
        print(f"hvgrid: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
