"""Timing of the Fourier solver and of the periodic scan against support size.

    python3 scripts/livsic_timing.py --boxes 1 2 3 5 8 --repeats 20
"""

import argparse
import sys
import time

import numpy as np

from cocyclelab import livsic as lv
from cocyclelab.fields import TrigPoly
from cocyclelab.torus import LatticeAutomorphism

CAT = ((5, 2), (2, 1))


def random_poly(rng, box, terms):
    coeffs = {}
    for _ in range(terms):
        k = tuple(int(v) for v in rng.integers(-box, box + 1, size=2))
        if k != (0, 0):
            coeffs[k] = complex(rng.normal(), rng.normal())
    return TrigPoly(coeffs)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--boxes", nargs="+", type=int, default=[1, 2, 3, 5, 8])
    ap.add_argument("--repeats", type=int, default=20)
    ap.add_argument("--n-max", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    f = LatticeAutomorphism(CAT)
    rng = np.random.default_rng(args.seed)
    print("box  terms  solve_ms  scan_ms  worst_err")
    for box in args.boxes:
        terms = (2 * box + 1) ** 2 // 2
        phis = [random_poly(rng, box, terms) for _ in range(args.repeats)]
        alphas = [p.compose(CAT) - p for p in phis]
        t0 = time.perf_counter()
        sols = [lv.solve_fourier(a, f) for a in alphas]
        solve = (time.perf_counter() - t0) / args.repeats
        t0 = time.perf_counter()
        lv.scan_additive_batch(alphas, f, args.n_max)
        scan = (time.perf_counter() - t0) / args.repeats
        err = max(max((abs(c) for c in (s.certificate.phi - p).coeffs.values()), default=0.0) for s, p in zip(sols, phis))
        print(f"{box:3d}  {terms:5d}  {1e3 * solve:8.2f}  {1e3 * scan:7.2f}  {err:.2e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
