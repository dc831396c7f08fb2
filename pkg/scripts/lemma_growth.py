"""Growth of ``c(q)`` over periodic points near a base point, as the period cap rises.

Writes a CSV table and an SVG plot.

    python3 scripts/lemma_growth.py --center 0.3 0.7 --radius 0.05 --cap 9
"""

import argparse
import sys
from pathlib import Path

from cocyclelab.lab import gallery, plots
from cocyclelab.lab.config import LabConfig
from cocyclelab.lab.io import write_csv


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--center", nargs=2, type=float, default=[0.3, 0.7])
    ap.add_argument("--radius", type=float, default=0.05)
    ap.add_argument("--cap", type=int, default=9, help="largest period searched (memory grows like 5.8^cap)")
    ap.add_argument("--beta", type=float, default=1.0)
    ap.add_argument("--a", type=float, default=0.4)
    ap.add_argument("--out", default="lab-out/lemma")
    args = ap.parse_args(argv)
    cfg = LabConfig()
    cfg.gallery.beta, cfg.gallery.a = args.beta, args.a
    cfg.validate()
    ex = gallery.build("7.3", cfg).references["series"]
    rows = ex.lemma_search(args.center, args.radius, args.cap)
    out = Path(args.out)
    keys = list(rows[0])
    write_csv(out / "lemma_growth.csv", keys, [[r[k] for k in keys] for r in rows])
    plots.lemma_growth(rows, out / "lemma_growth.svg")
    for r in rows:
        print("  ".join(f"{k}={r[k]}" for k in keys))
    return 0


if __name__ == "__main__":
    sys.exit(main())
