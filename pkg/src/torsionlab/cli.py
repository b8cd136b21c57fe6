"""Command-line front end.

Subcommands: fr, family-torsion, circle-bundle, charclass, tube, front,
suite.  Every run writes a versioned JSON report (plus CSV/SVG with
--emit-plots) into --out; exit codes are 0 ok, 2 validation, 3 numerical,
4 io.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

import numpy as np

from . import basegrid, chainkit, charclass, famtor, genfront, report, tubefun
from .errors import IoFailure, TorsionLabError, ValidationError


def _configure_threads(threads):
    n = threads if threads is not None else os.environ.get("TORSIONLAB_THREADS")
    if n is None:
        return None
    n = int(n)
    try:
        from threadpoolctl import threadpool_limits

        threadpool_limits(limits=n)
    except ImportError:
        pass  # results are parallelism-invariant either way
    return n


def _parse_root(text: str) -> complex:
    try:
        frac = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"--root expects a fraction p/q, got {text!r}") from exc
    return complex(np.exp(2j * np.pi * float(frac)))


def _out_path(args, name):
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


# -- subcommand handlers --------------------------------------------------


def cmd_fr(args):
    if not args.input:
        raise ValidationError("fr requires --input pointing to a complex file")
    c = chainkit.BasedComplex.load(args.input)
    acyclic, cert = chainkit.is_acyclic(c)
    payload = {
        "subcommand": "fr",
        "input": os.path.basename(args.input),
        "acyclic": acyclic,
        "certificate": cert if np.isfinite(cert) else None,
    }
    if acyclic:
        payload["log_torsion"] = chainkit.fr_torsion(c)
        payload["laplacian_route"] = chainkit.laplacian_torsion(c)
    return payload, None


def _resolve_family(args):
    if args.input:
        return famtor.ChainFamily.load(args.input)
    if args.preset == "zero-section":
        atlas = basegrid.build_base("sphere2", args.resolution)
        tpl = chainkit.BasedComplex((1, 1), (np.array([[2.0]]),))
        return famtor.zero_section_family(atlas, tpl)
    raise ValidationError(
        "family-torsion requires --input or --preset zero-section"
    )


def cmd_family_torsion(args):
    fam = _resolve_family(args)
    res = famtor.torsion_form(fam, args.degree)
    payload = {
        "subcommand": "family-torsion",
        "k": args.degree,
        "form_degree": res.degree,
        "integral": res.integral,
        "closedness_residual": res.closedness_residual,
        "normalization": res.normalization,
        "resolution": fam.atlas.resolution,
        "max_norm": res.form.max_norm(),
    }
    plots = [("form.csv", lambda p: report.write_form_csv(res.form, p))]
    return payload, plots


def cmd_circle_bundle(args):
    u = _parse_root(args.root)
    fam = famtor.circle_bundle_family(args.euler, u, args.resolution)
    res = famtor.torsion_form(fam, args.degree)
    il2 = float(np.imag(charclass.dilog(u)))
    ratio = res.integral / (args.euler * il2) if abs(il2) > 1e-12 else None
    payload = {
        "subcommand": "circle-bundle",
        "euler": args.euler,
        "root": args.root,
        "k": args.degree,
        "form_degree": res.degree,
        "resolution": args.resolution,
        "integral": res.integral,
        "im_dilog": il2,
        "ratio_to_calibration": ratio,
        "closedness_residual": res.closedness_residual,
        "normalization": res.normalization,
    }
    plots = [("form.csv", lambda p: report.write_form_csv(res.form, p))]
    return payload, plots


def cmd_charclass(args):
    preset = args.preset or "special-values"
    plots = []
    if preset == "special-values":
        rows = []
        for s in (2.0, 3.0, 5.0, 7.0):
            rows.append((f"zeta({s:g})", f"{charclass.zeta(s):.15g}", "1e-12"))
        for p, q in ((1, 3), (1, 2), (1, 6), (2, 3)):
            z = np.exp(2j * np.pi * p / q)
            v = charclass.dilog(z)
            rows.append((f"dilog(e^(2*pi*i*{p}/{q}))",
                         f"{v.real:.15g}{v.imag:+.15g}j", "1e-12"))
        payload = {
            "subcommand": "charclass", "preset": preset,
            "values": {r[0]: r[1] for r in rows},
        }
        plots.append(("special_values.csv",
                      lambda p, rows=rows: report.write_triples_csv(rows, p)))
        return payload, plots
    if preset == "bott-s2":
        atlas = basegrid.build_base("sphere2", args.resolution)
        form = charclass.chern_character_form(charclass.bott_projector(atlas), 1)
        val = basegrid.integrate_form(form)
        return {"subcommand": "charclass", "preset": preset,
                "ch1_integral": val, "resolution": args.resolution}, None
    if preset == "clifford-s4":
        resolution = min(args.resolution, basegrid.SPHERE4_DEFAULT_RESOLUTION)
        atlas = basegrid.build_base("sphere4", resolution)
        form = charclass.chern_character_form(charclass.clifford_projector(atlas), 2)
        val = basegrid.integrate_form(form)
        return {"subcommand": "charclass", "preset": preset,
                "ch2_integral": val, "resolution": resolution}, None
    if preset == "pontryagin-s4":
        resolution = min(args.resolution, basegrid.SPHERE4_DEFAULT_RESOLUTION)
        atlas = basegrid.build_base("sphere4", resolution)
        P = tubefun.stable_bundle(tubefun.preset_clifford_rigid(atlas))
        val = basegrid.integrate_form(charclass.pontryagin_character(P, 1))
        ch2 = basegrid.integrate_form(charclass.chern_character_form(P, 2))
        return {"subcommand": "charclass", "preset": preset,
                "p1_integral": val, "ch2_integral": ch2,
                "half_zeta3": 0.5 * charclass.zeta(3.0),
                "resolution": resolution}, None
    raise ValidationError(f"unknown charclass preset {preset!r}")


def cmd_tube(args):
    if args.preset not in tubefun.PRESETS:
        raise ValidationError(
            f"unknown tube preset {args.preset!r}; choose from {sorted(tubefun.PRESETS)}"
        )
    kind = {
        "standard-quadratic": "circle",
        "bott-rigid-s2": "sphere2",
        "clifford-rigid-s4": "sphere4",
        "moebius-circle": "circle",
    }[args.preset]
    resolution = args.resolution
    if kind == "sphere4":
        resolution = min(resolution, basegrid.SPHERE4_DEFAULT_RESOLUTION)
    atlas = basegrid.build_base(kind, resolution)
    q = tubefun.PRESETS[args.preset](atlas)
    f = tubefun.asymptotic_quadratic(q.as_tube_function())
    rep = tubefun.verify_tube_type(f)
    payload = {
        "subcommand": "tube",
        "preset": args.preset,
        "fiber_dim": q.fiber_dim,
        "index": q.index,
        "verification": {
            "homogeneity_residual": rep.homogeneity_residual,
            "regular_value_margin": rep.regular_value_margin,
            "condition3": rep.condition3,
            "conditions": list(rep.conditions_certified),
        },
        "orientable": tubefun.check_orientable(q),
    }
    if kind in ("sphere2", "sphere4"):
        P = tubefun.stable_bundle(q)
        k = 1 if kind == "sphere2" else 2
        payload["stable_bundle_ch_integral"] = basegrid.integrate_form(
            charclass.chern_character_form(P, k)
        )
    return payload, None


def cmd_front(args):
    if args.preset not in genfront.PRESETS:
        raise ValidationError(
            f"unknown front preset {args.preset!r}; choose from {sorted(genfront.PRESETS)}"
        )
    gf = genfront.PRESETS[args.preset]()
    front = genfront.find_cusps(gf, genfront.fiberwise_critical_locus(gf))
    lift = genfront.legendrian_lift(front)
    payload = {
        "subcommand": "front",
        "preset": args.preset,
        "sheet_points": len(front.points),
        "cusps": len(front.cusps),
        "immersed_only": lift["immersed_only"],
        "admissible": genfront.check_admissible(gf)["admissible"]
        if args.preset != "wrinkle" else None,
        "index_histogram": {
            str(i): sum(1 for sp in front.points if sp.index == i)
            for i in sorted({sp.index for sp in front.points})
        },
    }
    plots = [("front.csv", lambda p: genfront.export_cerf_csv(front, p))]
    if gf.base.dim == 1:
        plots.append(("cerf.svg", lambda p: genfront.export_cerf_svg(front, p)))
    return payload, plots


def cmd_suite(args):
    from . import suite

    rows = suite.full_matrix(resolution=args.resolution)
    for row in rows:
        status = "PASS" if row["passed"] else "FAIL"
        print(f"[{status}] {row['name']}: {row['detail']}")
    payload = {
        "subcommand": "suite",
        "rows": rows,
        "all_passed": all(r["passed"] for r in rows),
    }
    return payload, None


# -- driver ---------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="torsionlab",
        description="Higher torsion of chain-complex families and generating functions",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    handlers = {
        "fr": cmd_fr,
        "family-torsion": cmd_family_torsion,
        "circle-bundle": cmd_circle_bundle,
        "charclass": cmd_charclass,
        "tube": cmd_tube,
        "front": cmd_front,
        "suite": cmd_suite,
    }
    for name in handlers:
        p = sub.add_parser(name)
        p.add_argument("--resolution", type=int, default=64)
        p.add_argument("--degree", type=int, default=1)
        p.add_argument("--euler", type=int, default=3)
        p.add_argument("--root", type=str, default="1/3",
                       help="root of unity e^(2*pi*i*p/q) as a fraction p/q")
        p.add_argument("--preset", type=str, default=None)
        p.add_argument("--input", type=str, default=None)
        p.add_argument("--out", type=str, default="reports")
        p.add_argument("--emit-plots", action="store_true")
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--seed", type=int, default=0)
        p.set_defaults(handler=handlers[name])
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _configure_threads(args.threads)
        if args.resolution < 8:
            raise ValidationError(f"resolution {args.resolution} < 8")
        if args.degree < 0:
            raise ValidationError("degree must be nonnegative")
        payload, plots = args.handler(args)
        payload["config"] = {
            "resolution": args.resolution,
            "degree": args.degree,
            "seed": args.seed,
        }
        files = [report.write_json(payload, _out_path(args, f"{args.subcommand}.json"))]
        if args.emit_plots and plots:
            for name, writer in plots:
                files.append(writer(_out_path(args, name)))
        print(json.dumps({"report": files[0], "extra": files[1:]}))
        if args.subcommand == "suite" and not payload["all_passed"]:
            return 1
        return 0
    except TorsionLabError as exc:
        record = {
            "error": type(exc).__name__,
            "message": str(exc),
            "exit_code": exc.exit_code,
        }
        print(json.dumps(record), file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(json.dumps({"error": "IoFailure", "message": str(exc),
                          "exit_code": IoFailure.exit_code}), file=sys.stderr)
        return IoFailure.exit_code


if __name__ == "__main__":
    sys.exit(main())
