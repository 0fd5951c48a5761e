"""Command line: render one figure from simulator CSV artifacts.

    plots render --kind growth --in traj_mpc.csv --in traj_ref.csv --out fig.svg

Exit codes: 0 on success, 2 when an input file does not match the
expected column schema (every missing column is named), 1 for other
input problems such as a file with no data rows.
"""

import argparse
import sys

from report_plots.figures import KINDS, PlotSpec, render
from report_plots.schema import EmptyInputError, SchemaError


def _parser():
    ap = argparse.ArgumentParser(
        prog="plots", description="figure generation from simulation CSVs")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("render", help="render one figure")
    r.add_argument("--kind", required=True, choices=KINDS,
                   help="figure kind")
    r.add_argument("--in", dest="inputs", metavar="CSV", action="append",
                   required=True, help="input CSV (repeatable)")
    r.add_argument("--out", required=True, metavar="IMG",
                   help="output image path (.svg, .png or .pdf)")
    r.add_argument("--title", default=None, help="figure title override")
    r.add_argument("--xlabel", default=None, help="x axis label override")
    r.add_argument("--ylabel", default=None, help="y axis label override")
    return ap


def main(argv=None):
    args = _parser().parse_args(argv)
    spec = PlotSpec(kind=args.kind, inputs=tuple(args.inputs), out=args.out,
                    title=args.title, xlabel=args.xlabel, ylabel=args.ylabel)
    try:
        render(spec)
    except SchemaError as exc:
        print(f"schema error in {exc.path}: "
              f"missing column(s): {', '.join(exc.missing)}", file=sys.stderr)
        return 2
    except (EmptyInputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
