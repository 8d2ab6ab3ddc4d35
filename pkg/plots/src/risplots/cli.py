"""Render figures from sweep report CSVs.

Without --group: NMSE-vs-epoch convergence curves, one line per swept
value.  With --group snr|r_t: final NMSE vs antenna-domain rate, one line
per group value (multiple --in files merge into one figure).

Exit codes: 0 success, 2 bad input or report contract violation.
"""

from __future__ import annotations

import argparse
import sys

from .figures import GROUP_KEYS, line_count, plot_epoch_curves, plot_rate_curves, save_figure
from .report import ReportError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="risplot", description=__doc__)
    parser.add_argument("--in", dest="inputs", action="append", required=True,
                        metavar="CSV", help="sweep report CSV (repeatable)")
    parser.add_argument("--out", required=True, help="output image path (.svg default)")
    parser.add_argument("--group", choices=GROUP_KEYS, default=None,
                        help="render final-NMSE rate curves grouped by this key")
    args = parser.parse_args(argv)

    try:
        if args.group is None:
            if len(args.inputs) != 1:
                parser.error("epoch curves take exactly one --in CSV")
            fig = plot_epoch_curves(args.inputs[0])
        else:
            fig = plot_rate_curves(args.inputs, args.group)
        out = save_figure(fig, args.out)
    except (ReportError, OSError) as exc:
        print(f"risplot: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out} ({line_count(fig)} lines)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
