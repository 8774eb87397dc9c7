"""CLI: one figure per invocation, driven by flags."""

import argparse

from .figures import FigureSpec, render


def _parse_selector(text):
    out = {}
    for part in text.split(","):
        if "=" not in part:
            raise SystemExit(f"selector expects col=value pairs, got {part!r}")
        col, val = part.split("=", 1)
        try:
            out[col.strip()] = int(val)
        except ValueError:
            out[col.strip()] = val.strip()
    return out


def build_parser():
    parser = argparse.ArgumentParser(prog="mmwfigs",
                                     description="figures from mmwsched CSVs")
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind, help_text in (("curves", "metric vs x, one line per series"),
                            ("improvement", "percent improvement over a baseline series"),
                            ("overlay", "feasible and upper-bound metric together")):
        p = sub.add_parser(kind, help=help_text)
        p.add_argument("csv", nargs="+", help="aggregate campaign CSV(s)")
        p.add_argument("--x", default="n_bs_rf")
        p.add_argument("--y", default="gm_bar")
        p.add_argument("--series", default="rf_per_stream_bs,rf_per_stream_ue",
                       help="comma-separated grouping columns ('' for one series)")
        p.add_argument("--output", default=f"{kind}.png")
        p.add_argument("--title", default="")
        if kind == "improvement":
            p.add_argument("--baseline", required=True,
                           help="col=value[,col=value...] selecting the baseline series")
        if kind == "overlay":
            p.add_argument("--y2", default="gmr_bar")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    series = tuple(s for s in args.series.split(",") if s)
    spec = FigureSpec(
        csv_paths=tuple(args.csv),
        x=args.x,
        y=args.y,
        series_by=series,
        baseline=_parse_selector(args.baseline) if args.kind == "improvement" else None,
        output=args.output,
        kind=args.kind,
        y2=getattr(args, "y2", "gmr_bar"),
        title=args.title,
    )
    path = render(spec)
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
