"""Command-line entry point ``dprl``.

Subcommands::

    dprl ingest --csv PATH --schema FILE
    dprl sweep  --config FILE --out DIR [--workers N]
    dprl radius --mechanism gaussian --epsilon E --delta D --px PX --py PY
                [--lower L --upper U --n N --beta B --c1 C1 --c2 C2 --a A]
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .ambiguity import ConcentrationConfig, radius
from .data import FeatureBounds
from .exceptions import DprlError, SchemaError
from .mechanisms import PrivacyBudget, sensitivity

# experiment/report pull in pandas; imported per command so `radius` starts fast

SCHEMA_KEYS = ("output_column", "drop_columns", "categorical_columns", "scale_to_unit")


def _cmd_ingest(args) -> int:
    from .experiment import SchemaConfig, read_table

    schema = SchemaConfig.from_file(args.schema)
    data, dropped = read_table(args.csv, schema)
    print(json.dumps({
        "rows": data.n, "dropped": dropped, "p_x": data.p_x, "p_y": data.p_y,
        "bounds": [data.bounds.lower, data.bounds.upper],
        "features": list(data.feature_names), "output": list(data.output_names),
    }, indent=2))
    return 0


def load_sweep(config_path):
    """Dataset, schema and sweep settings described by a sweep config file.

    ``csv`` and ``schema`` paths are resolved relative to the config file.
    Without ``csv`` the synthetic Gaussian surrogate is used
    (``surrogate_n``, ``surrogate_px``, ``surrogate_seed``).
    """
    from .experiment import (SchemaConfig, SweepConfig, gaussian_surrogate, read_config,
                             read_table)

    cfg = read_config(config_path)
    base = Path(config_path).resolve().parent
    schema = None
    if "schema" in cfg:
        schema = SchemaConfig.from_file(base / cfg["schema"])
    elif "output_column" in cfg:
        schema = SchemaConfig.from_mapping({k: cfg[k] for k in SCHEMA_KEYS if k in cfg})
    if "csv" in cfg:
        if schema is None:
            raise SchemaError("a csv source needs a schema or an output_column")
        data, dropped = read_table(base / cfg["csv"], schema)
        source = f"{cfg['csv']} ({data.n} rows, {dropped} dropped)"
    else:
        data = gaussian_surrogate(int(cfg.get("surrogate_n", 2000)),
                                  int(cfg.get("surrogate_px", 10)),
                                  int(cfg.get("surrogate_seed", 0)))
        source = f"gaussian surrogate ({data.n} rows, p_x={data.p_x})"
    return data, schema, SweepConfig.from_mapping(cfg), source


def _cmd_sweep(args) -> int:
    from .experiment import run_sweep
    from .report import emit_report

    data, schema, sweep, source = load_sweep(args.config)
    print(f"data: {source}")
    table = run_sweep(data, sweep, schema, workers=args.workers)
    csv_path, svg_path = emit_report(table, args.out, title=source)
    failed = sum(not r.ok for r in table.rows)
    print(f"{len(table)} rows ({failed} failed), {len(sweep.seeds)} seeds per point")
    for method, curve in table.mean_test_loss().items():
        print(f"  {method:13s} " + " ".join(f"{v:.6g}" for v in curve.values()))
    print(f"wrote {csv_path} and {svg_path}")
    return 0


def _cmd_radius(args) -> int:
    bounds = FeatureBounds(args.lower, args.upper)
    sens = sensitivity(bounds, args.px)
    budget = PrivacyBudget(args.epsilon, args.delta)
    big_data = args.n is None
    conc = ConcentrationConfig(args.c1, args.c2, args.a, big_data)
    r = radius(args.mechanism, budget, args.px + args.py, sens, args.beta, args.n, conc)
    print(json.dumps({
        "rho": r.rho, "zeta_part": r.zeta_part, "privacy_part": r.privacy_part,
        "sensitivity": sens, "p": args.px + args.py, "big_data": big_data,
    }, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dprl", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load a CSV file and report what was kept")
    p.add_argument("--csv", required=True)
    p.add_argument("--schema", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("sweep", help="run the privacy sweep and write a report")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("radius", help="Wasserstein ambiguity radius")
    p.add_argument("--mechanism", choices=["gaussian", "laplace"], required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--px", type=int, required=True)
    p.add_argument("--py", type=int, default=1)
    p.add_argument("--lower", type=float, default=0.0)
    p.add_argument("--upper", type=float, default=1.0)
    p.add_argument("--n", type=int, default=None,
                   help="sample size; omit for the large-sample radius")
    p.add_argument("--beta", type=float, default=0.05)
    p.add_argument("--c1", type=float, default=1.0)
    p.add_argument("--c2", type=float, default=1.0)
    p.add_argument("--a", type=float, default=2.0)
    p.set_defaults(func=_cmd_radius)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (DprlError, OSError) as exc:
        print(f"dprl {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
