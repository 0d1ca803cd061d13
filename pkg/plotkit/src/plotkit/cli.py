"""Command-line entry points.

    plot-ledger  --csv ledger.csv  --out figures/ [--kind timeseries|residuals] [--logy]
    plot-regimes --csv regimes.csv --out figures/ [--dispersion]

Both print the paths written plus a `checksum=` line recomputed from the
parsed CSV; compare it with the producer's output to confirm the figures
show exactly the data the simulation wrote.  Exit codes mirror the
producer: 0 success, 2 schema/usage error, 3 unexpected failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from .checksum import ledger_checksum, regime_checksum
from .figures import FigureSpec, render
from .schema import SchemaError, read_ledger, read_regimes


def _fail(msg: str, code: int) -> int:
    sys.stderr.write(f"error={msg}\n")
    return code


def plot_ledger_main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="plot-ledger", description=__doc__.splitlines()[0])
    ap.add_argument("--csv", required=True, help="ledger CSV from a simulation run")
    ap.add_argument("--out", required=True, help="output directory for the figures")
    ap.add_argument("--kind", choices=("timeseries", "residuals"), default="timeseries")
    ap.add_argument("--logy", action="store_true", help="log scale on the value axis")
    args = ap.parse_args(argv)
    try:
        table = read_ledger(args.csv)
        spec = FigureSpec(
            inputs=(args.csv,),
            kind=args.kind,
            output=os.path.join(args.out, f"ledger_{args.kind}"),
            scales={"y": "log"} if args.logy else {},
        )
        written = render(spec)
    except SchemaError as exc:
        return _fail(str(exc), 2)
    except Exception as exc:  # pragma: no cover - defensive
        return _fail(f"{type(exc).__name__}: {exc}", 3)
    print("rows=%d" % table.rows.shape[0])
    for path in written:
        print("wrote=%s" % path)
    print("checksum=%s" % ledger_checksum(table))
    return 0


def plot_regimes_main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="plot-regimes", description=__doc__.splitlines()[0])
    ap.add_argument("--csv", required=True, help="regime sweep CSV")
    ap.add_argument("--out", required=True, help="output directory for the figures")
    ap.add_argument("--dispersion", action="store_true", help="also render dispersion curves")
    args = ap.parse_args(argv)
    try:
        table = read_regimes(args.csv)
        written = render(
            FigureSpec(inputs=(args.csv,), kind="regime_map", output=os.path.join(args.out, "regime_map"))
        )
        if args.dispersion:
            written += render(
                FigureSpec(inputs=(args.csv,), kind="dispersion", output=os.path.join(args.out, "dispersion"))
            )
    except SchemaError as exc:
        return _fail(str(exc), 2)
    except Exception as exc:  # pragma: no cover - defensive
        return _fail(f"{type(exc).__name__}: {exc}", 3)
    print("rows=%d" % table.rows.shape[0])
    for path in written:
        print("wrote=%s" % path)
    print("checksum=%s" % regime_checksum(table))
    return 0
