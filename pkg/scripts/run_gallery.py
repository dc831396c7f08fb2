"""Run every gallery entry's checks and write one JSON report per entry.

    python3 scripts/run_gallery.py --out lab-out/gallery
"""

import argparse
import sys
import time
from pathlib import Path

from cocyclelab.lab import gallery
from cocyclelab.lab.config import LabConfig
from cocyclelab.lab.io import write_json


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="TOML configuration file")
    ap.add_argument("--out", default="lab-out/gallery")
    ap.add_argument("ids", nargs="*", default=list(gallery.GALLERY_IDS))
    args = ap.parse_args(argv)
    cfg = LabConfig.load(args.config) if args.config else LabConfig()
    failed = 0
    for gid in args.ids:
        t0 = time.perf_counter()
        entry = gallery.build(gid, cfg)
        checks = gallery.run_checks(entry, cfg)
        elapsed = time.perf_counter() - t0
        print(f"{gid} ({elapsed:.1f} s)")
        for c in checks:
            print("  " + c.line())
        failed += sum(not c.passed for c in checks)
        body = entry.to_json()
        body["checks"] = [c.to_json() for c in checks]
        write_json(Path(args.out) / f"{gid}.json", "gallery", body)
    print(f"{failed} failed checks")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
