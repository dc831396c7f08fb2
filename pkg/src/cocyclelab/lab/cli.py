"""``lab`` command line: every subcommand writes JSON/CSV/SVG artifacts and prints a summary.

Exit codes: 0 success, 2 honest "undetermined", 1 error (bad input, failed check).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .. import cohomology as ch
from .. import fields as fl
from .. import livsic as lv
from .. import structures as st
from ..cocycle import (
    Cocycle,
    check_conjugate_periodic_data,
    check_one_exponent,
    classify_periodic,
)
from ..torus import RationalPoint, TorusError, periodic_points
from . import gallery, plots
from .config import ConfigError, LabConfig
from .io import write_csv, write_json

EXIT_OK, EXIT_ERROR, EXIT_UNDETERMINED = 0, 1, 2


class UsageError(Exception):
    pass


def _pair(text: str, kind=float) -> tuple:
    try:
        a, b = (kind(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two comma-separated values, got {text!r}") from None
    return a, b


def _text(arg: str) -> str:
    """DSL text from a ``.dsl`` file path or inline."""
    p = Path(arg)
    if p.suffix == ".dsl" or (len(arg) < 256 and p.is_file()):
        return p.read_text()
    return arg


def _cover(args, cfg):
    return tuple(args.cover) if getattr(args, "cover", None) else tuple(cfg.cover)


def _cocycle(arg, args, cfg, name=None) -> Cocycle:
    if arg is None:
        raise UsageError("a cocycle is required (--cocycle FILE.dsl or DSL text)")
    text = _text(arg)
    return Cocycle.from_text(cfg.F, text, _cover(args, cfg), name=name or arg)


def _field(arg, args, cfg):
    return fl.parse(_text(arg), cover=_cover(args, cfg), F=cfg.F)


def _out(cfg, name) -> Path:
    return Path(cfg.output_dir) / name


def _orbit(o) -> dict:
    return {"period": o.period, "point": [f"{o.base.a}/{o.base.d}", f"{o.base.b}/{o.base.d}"]}


# subcommands -------------------------------------------------------------------------------


def cmd_periodic_points(args, cfg) -> int:
    f = cfg.base(_cover(args, cfg))
    pts = periodic_points(f, args.n)
    a, b, D = pts.arrays()
    rows = []
    for x, y in zip(a.tolist(), b.tolist()):
        n0 = f.least_period(RationalPoint.make(x, y, D, f.cover), args.n)
        rows.append([f"{x}/{D}", f"{y}/{D}", x / D, y / D, n0])
    path = write_csv(_out(cfg, f"periodic_points_n{args.n}.csv"), ["x1", "x2", "x1_float", "x2_float", "least_period"], rows)
    print(f"{len(rows)} fixed points of f^{args.n} (expected |tr F^n - 2| on the base torus) -> {path}")
    return EXIT_OK


def cmd_periodic_data(args, cfg) -> int:
    A = _cocycle(args.cocycle, args, cfg)
    scan = A.periodic_scan(args.n)
    csv_path = _out(cfg, "periodic_data.csv")
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.write_text(scan.to_csv(cfg.tolerances))
    pc = classify_periodic(A, args.n, cfg.tolerances)
    body = {"cocycle": A.name, "n_max": args.n, "orbits": len(scan), "kind": pc.kind, "counts": pc.counts,
            "min_margin": pc.min_margin, "witnesses": {k: _orbit(o) for k, o in pc.witnesses.items()}}
    write_json(_out(cfg, "periodic_data.json"), "periodic-data", body)
    print(f"{len(scan)} orbits up to period {args.n}: {pc.kind} {pc.counts} (min margin {pc.min_margin:.3g}) -> {csv_path}")
    return EXIT_OK


def cmd_check_condition(args, cfg) -> int:
    A = _cocycle(args.cocycle, args, cfg)
    if args.other:
        B = _cocycle(args.other, args, cfg)
        rep = check_conjugate_periodic_data(A, B, args.n, cfg.tol_eig, cfg.tolerances)
    else:
        rep = check_one_exponent(A, args.n, cfg.tol_eig, cfg.tolerances)
    write_json(_out(cfg, "condition.json"), "check-condition", rep.to_json())
    w = f" witness {rep.witness.base} (period {rep.witness.period})" if rep.witness is not None and not rep.verdict else ""
    print(f"{rep.condition}: {'holds' if rep.verdict else 'fails'} on {rep.orbits_checked} orbits, "
          f"worst {rep.worst:.3g} vs tol {rep.tol:.3g}{w}")
    return EXIT_OK


def _classify_cfg(cfg) -> ch.ClassifyConfig:
    return ch.ClassifyConfig(cfg.n_max, cfg.grid, cfg.obstruction_tol, cfg.solve_tol, tols=cfg.tolerances)


def cmd_classify(args, cfg) -> int:
    A = _cocycle(args.cocycle, args, cfg)
    c = ch.classify_full(A, _classify_cfg(cfg))
    write_json(_out(cfg, "classify.json"), "classify", c.to_json())
    extra = f", obstruction {c.obstruction:.6g} at {c.witness.base} (period {c.witness.period})" if c.obstruction is not None and c.witness is not None else ""
    res = f", reduction residual {c.reduction.residual:.3g}" if c.reduction is not None else ""
    print(f"type {c.type} (periodic data {c.periodic_kind}{extra}{res})")
    for n in c.notes:
        print(f"  note: {n}")
    return EXIT_OK if c.determined else EXIT_UNDETERMINED


def _scan(args, cfg, fld):
    f = cfg.base(_cover(args, cfg))
    if args.kind == "additive":
        return lv.scan_additive(fld, f, args.n, cfg.obstruction_tol)
    if args.kind == "multiplicative":
        return lv.scan_multiplicative(fld, f, args.n, cfg.obstruction_tol)
    return lv.scan_circle(fld, f, args.n, args.modulus, cfg.obstruction_tol)


def cmd_livsic_scan(args, cfg) -> int:
    rep = _scan(args, cfg, _field(args.field, args, cfg))
    p = _out(cfg, "livsic_scan.csv")
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(rep.to_csv())
    write_json(_out(cfg, "livsic_scan.json"), "livsic-scan", rep.to_json())
    margin = rep.max_abs / rep.tol
    state = "all obstructions vanish" if rep.verdict else f"witness {rep.witness.base} (period {rep.witness.period})"
    print(f"{rep.kind} scan over {len(rep.values)} orbits: max |obstruction| {rep.max_abs:.3g} "
          f"({margin:.3g} x tol); {state}")
    return EXIT_OK


def cmd_livsic_solve(args, cfg) -> int:
    f = cfg.base(_cover(args, cfg))
    fld = _field(args.field, args, cfg)
    try:
        poly = fl.to_trigpoly(fld, f.cover)
        sol = lv.solve_fourier(poly, f, cert_tol=cfg.solve_tol)
    except (fl.NotRepresentableError, fl.FieldError):
        sol = lv.solve_spectral(fld, f, tol=cfg.solve_tol)
    body = {"success": sol.success}
    if sol.success:
        cert = sol.certificate
        body.update(residual=cert.residual, tol=cert.tol, representation=cert.representation, valid=cert.valid)
        print(f"coboundary: residual {cert.residual:.3g} ({cert.representation}), certificate "
              f"{'valid' if cert.valid else 'NOT valid'} at tol {cert.tol:.3g}")
        code = EXIT_OK if cert.valid else EXIT_UNDETERMINED
    else:
        w = sol.witness
        body.update(obstruction=abs(w.value) if w is not None else None)
        print(f"not a coboundary: Fourier orbit obstruction {abs(w.value):.3g}" if w is not None else "solver failed")
        code = EXIT_OK if w is not None else EXIT_UNDETERMINED
    write_json(_out(cfg, "livsic_solve.json"), "livsic-solve", body)
    return code


def cmd_reduce(args, cfg) -> int:
    A = _cocycle(args.cocycle, args, cfg)
    try:
        if args.kind == "triangular":
            L = st.find_line(A, cfg.grid)
            _out(cfg, "line_field.csv").parent.mkdir(parents=True, exist_ok=True)
            _out(cfg, "line_field.csv").write_text(L.to_csv())
            red = ch.reduce_triangular(A, L, cfg.n_max, cfg.obstruction_tol, cfg.solve_tol)
        elif args.kind == "conformal":
            S = st.find_conformal(A, cfg.grid)
            red = ch.reduce_conformal(A, S)
        else:
            Lp = st.find_line(A, cfg.grid, direction="forward")
            Lm = st.find_line(A, cfg.grid, direction="backward")
            red = ch.reduce_diagonal(A, Lp, Lm)
    except (ch.ReductionError, st.StructureError) as exc:
        print(f"reduction undetermined: {exc}")
        write_json(_out(cfg, "reduce.json"), "reduce", {"kind": args.kind, "error": str(exc)})
        return EXIT_UNDETERMINED
    write_json(_out(cfg, "reduce.json"), "reduce", red.to_json())
    print(f"{args.kind} reduction: residual {red.residual:.3g}, cover {red.cover}" +
          (f", conformality defect {red.dev:.3g}" if args.kind == "conformal" else ""))
    return EXIT_OK


def _model(kind, k, alpha, args, cfg):
    kf = _field(k, args, cfg)
    if kind == "scalar":
        return ch.scalar(kf)
    if alpha is None:
        raise UsageError(f"{kind} models need an alpha field")
    return ch.Model(kind, kf, _field(alpha, args, cfg))


def cmd_test_cohomology(args, cfg) -> int:
    f = cfg.base(_cover(args, cfg))
    Ap = _model(args.model, args.a_k, args.a_alpha, args, cfg)
    Bp = _model(args.model, args.b_k, args.b_alpha, args, cfg)
    v = ch.test_models(Ap, Bp, f, n_max=cfg.n_max, tol=cfg.obstruction_tol, solve_tol=cfg.solve_tol)
    write_json(_out(cfg, "test_cohomology.json"), "test-cohomology", v.to_json())
    line = f"{v.kind}: {v.verdict}"
    if v.verdict == "cohomologous":
        line += f" (c = {v.c}, branch {v.branch or 'n/a'}, certificate residual {v.residual:.3g})"
    for o, val in v.witnesses:
        line += f"\n  witness {o.base} period {o.period}: {val:.6g} ({abs(val) / cfg.obstruction_tol:.3g} x tol)"
    print(line)
    for n in v.notes:
        print(f"  note: {n}")
    return EXIT_UNDETERMINED if v.verdict == "undetermined" else EXIT_OK


def cmd_conjugator_table(args, cfg) -> int:
    A = _cocycle(args.cocycle, args, cfg)
    B = _cocycle(args.other, args, cfg)
    rep = ch.periodic_conjugator_analysis(A, B, args.n, args.probe, args.radius, tols=cfg.tolerances)
    rows = [[r["period"], " ".join(r["point"]), r["jordan_type"], *np.ravel(r["C"]), r["norm"], r["feature"]] for r in rep.rows]
    write_csv(_out(cfg, "conjugators.csv"), ["period", "point", "jordan_type", "C11", "C12", "C21", "C22", "norm", "feature"], rows)
    write_json(_out(cfg, "conjugators.json"), "conjugator-table", rep.to_json())
    print(f"{len(rep.rows)} orbits; sup |C(p)| = {rep.sup_norm:.6g}; probe at {rep.probe_center} r = {rep.probe_radius}: "
          f"{rep.probe_count} points, dispersion {rep.dispersion:.3g} -> {rep.flag}")
    return EXIT_OK


def cmd_gallery(args, cfg) -> int:
    entry = gallery.build(args.id, cfg)
    body = entry.to_json()
    code = EXIT_OK
    if args.check:
        checks = gallery.run_checks(entry, cfg)
        body["checks"] = [c.to_json() for c in checks]
        for c in checks:
            print(c.line())
        if not all(c.passed for c in checks):
            code = EXIT_ERROR
    else:
        print(f"{entry.id}: expected {entry.expected}")
        for k, A in entry.cocycles.items():
            print(f"  {k}: {A.name} over cover {A.cover}")
    write_json(_out(cfg, f"gallery_{args.id}.json"), "gallery", body)
    return code


def cmd_plot(args, cfg) -> int:
    out = _out(cfg, f"{args.what}.svg") if args.output is None else Path(args.output)
    if args.what == "line-field":
        A = _cocycle(args.cocycle, args, cfg)
        L = st.find_line(A, cfg.grid, direction=args.direction)
        plots.line_field(L, out)
    elif args.what == "obstructions":
        if args.field is None:
            raise UsageError("plot obstructions needs --field")
        plots.obstructions(_scan(args, cfg, _field(args.field, args, cfg)), out)
    elif args.what == "lemma":
        g = cfg.gallery
        ex = gallery.build("7.3", cfg).references["series"]
        plots.lemma_growth(ex.lemma_search(g.lemma_center, g.lemma_radius, g.lemma_cap), out)
    else:
        entry = gallery.build("2.6", cfg)
        f = entry.cocycles["A"].base
        table, a = lv.periodic_sums(entry.references["alpha"], f, args.n)
        _, b = lv.periodic_sums(entry.references["beta"], f, args.n)
        plots.ratios(table.periods, a / b, out)
    print(f"wrote {out}")
    return EXIT_OK


# parser ------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lab", description="Cocycle cohomology lab over hyperbolic toral automorphisms.")
    p.add_argument("--config", help="TOML configuration file")
    p.add_argument("--out", help="output directory (overrides the config)")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, cocycle=False, n=True):
        s = sub.add_parser(name, help=help_)
        s.set_defaults(func=fn)
        s.add_argument("--cover", type=lambda t: _pair(t, int), help="cover multiplicities q1,q2")
        if cocycle:
            s.add_argument("--cocycle", help="DSL file (.dsl) or inline DSL text")
        if n:
            s.add_argument("-n", type=int, default=None, help="period bound")
        return s

    s = add("periodic-points", cmd_periodic_points, "fixed points of f^n")
    add("periodic-data", cmd_periodic_data, "periodic products and their Jordan types", cocycle=True)
    s = add("check-condition", cmd_check_condition, "one-exponent or conjugate periodic data", cocycle=True)
    s.add_argument("--other", help="second cocycle: check conjugate periodic data instead")
    add("classify", cmd_classify, "type I, I', II, II' or III", cocycle=True, n=False)
    for name, fn in (("livsic-scan", cmd_livsic_scan), ("livsic-solve", cmd_livsic_solve)):
        s = add(name, fn, "periodic obstructions" if name == "livsic-scan" else "solve alpha = phi o f - phi")
        s.add_argument("--field", required=True, help="scalar DSL file or text")
        if name == "livsic-scan":
            s.add_argument("--kind", choices=["additive", "multiplicative", "circle"], default="additive")
            s.add_argument("--modulus", type=float, default=2 * np.pi)
    s = add("reduce", cmd_reduce, "reduce to a model cocycle", cocycle=True, n=False)
    s.add_argument("--kind", choices=["triangular", "conformal", "diagonal"], required=True)
    s = add("test-cohomology", cmd_test_cohomology, "compare two model cocycles", n=False)
    s.add_argument("--model", choices=["triangular", "scalar", "conformal", "diagonal"], required=True)
    for side in ("a", "b"):
        s.add_argument(f"--{side}-k", required=True, help="k (diagonal: first entry)")
        s.add_argument(f"--{side}-alpha", help="alpha (diagonal: second entry)")
    s = add("conjugator-table", cmd_conjugator_table, "canonical periodic conjugators", cocycle=True)
    s.add_argument("--other", required=True, help="second cocycle")
    s.add_argument("--probe", type=_pair, default=(0.25, 0.25))
    s.add_argument("--radius", type=float, default=0.1)
    s = add("gallery", cmd_gallery, "build a worked example", n=False)
    s.add_argument("id", choices=gallery.GALLERY_IDS)
    s.add_argument("--check", action="store_true", help="evaluate the entry's expectations")
    s = add("plot", cmd_plot, "SVG figures", cocycle=True)
    s.add_argument("what", choices=["line-field", "obstructions", "lemma", "ratios"])
    s.add_argument("--direction", choices=["forward", "backward"], default="forward")
    s.add_argument("--field", help="scalar field for the obstruction plot")
    s.add_argument("--kind", choices=["additive", "multiplicative", "circle"], default="additive")
    s.add_argument("--modulus", type=float, default=2 * np.pi)
    s.add_argument("--output")
    return p


def run_cli(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = LabConfig.load(args.config) if args.config else LabConfig()
        if args.out:
            cfg.output_dir = args.out
        if getattr(args, "n", "absent") is None:
            args.n = cfg.n_max
        return args.func(args, cfg)
    except (UsageError, ConfigError, TorusError, fl.FieldError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main():
    sys.exit(run_cli())
