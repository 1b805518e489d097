"""``hillspec`` command line: spectra, classification, disks, certificates, sweeps.

Exit codes: 0 success, 2 validation mismatch (cross-validation or disk
containment), 3 certificate failure, 64 usage error.  Output is JSON (or
CSV where offered) on stdout with fixed key order and number formatting;
logs go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from typing import Sequence


from . import certificates as cert
from .errors import CrossValidationError, HillSpecError
from .localization import localize, threshold_report
from .monodromy import PotentialParams, hill_discriminant
from .recurrence import family_spectrum
from .spectra import (
    MATCH_TOL,
    RESIDUAL_TOL,
    BoundaryCondition,
    _UNIONS,
    cross_validate,
    default_region,
    locate_eigenvalues,
)
from .sweep import (
    DEFAULT_WINDOW,
    Ray,
    SweepGrid,
    families_of,
    find_degeneracies,
    track_trajectories,
)

SCHEMA_VERSION = "1.0"
EXIT_OK, EXIT_MISMATCH, EXIT_CERTIFICATE, EXIT_USAGE = 0, 2, 3, 64
SPECTRUM_CSV_HEADER = ["re_lambda", "im_lambda", "bc", "s", "u", "v", "class",
                       "residual", "abs_self_orth", "source"]

log = logging.getLogger("hillspec")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _num(x: float):
    """JSON-stable float: finite values as-is, others as strings."""
    x = float(x)
    return x if math.isfinite(x) else str(x)


def _cplx(z) -> list:
    z = complex(z)
    return [_num(z.real), _num(z.imag)]


def _emit(command: str, inputs: dict, results, diagnostics: dict) -> None:
    record = {"schema_version": SCHEMA_VERSION, "command": command, "inputs": inputs,
              "results": results, "diagnostics": diagnostics}
    sys.stdout.write(json.dumps(record, sort_keys=True, indent=2) + "\n")


def _add_a(p: argparse.ArgumentParser, required: bool = True, pair: bool = True) -> None:
    p.add_argument("--a-re", type=float, required=required)
    p.add_argument("--a-im", type=float, required=required)
    if pair:
        p.add_argument("--b-re", type=float)
        p.add_argument("--b-im", type=float)


def _params(args) -> PotentialParams:
    a = complex(args.a_re, args.a_im)
    b_re, b_im = getattr(args, "b_re", None), getattr(args, "b_im", None)
    if b_re is None and b_im is None:
        return PotentialParams(a)
    if b_re is None or b_im is None:
        raise UsageError("give both --b-re and --b-im")
    return PotentialParams(a, complex(b_re, b_im))


def _param_inputs(p: PotentialParams) -> dict:
    return {"a": _cplx(p.a), "b": _cplx(p.b)}


def _point_record(pt) -> dict:
    return {"lambda": _cplx(pt.lam), "bc": pt.bc.value, "s": pt.multiplicity,
            "u": pt.dirichlet_order, "v": pt.neumann_order,
            "class": pt.spectral_class.value, "residual": _num(pt.residual),
            "abs_self_orth": None if pt.self_orth is None else _num(abs(pt.self_orth))}


def _points_csv(rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SPECTRUM_CSV_HEADER)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(x) -> str:
    return "" if x is None else f"{float(x):.15g}"


# ---------------------------------------------------------------- commands

def cmd_spectrum(args) -> int:
    p = _params(args)
    bc = BoundaryCondition.parse(args.bc)
    inputs = dict(_param_inputs(p), bc=bc.value, re_max=args.re_max, method=args.method)
    results: dict = {}
    diagnostics = {"residual_tol": RESIDUAL_TOL, "match_tol": MATCH_TOL}
    rows = []
    code = EXIT_OK
    region = default_region(p, args.re_max)
    if args.method in ("shooting", "both"):
        spec = locate_eigenvalues(p, bc, region)
        pts = [pt for pt in spec if pt.lam.real <= args.re_max]
        results["shooting"] = [_point_record(pt) for pt in pts]
        diagnostics["region"] = list(spec.region.as_tuple())
        diagnostics["winding"] = spec.winding
        rows += [[_fmt(pt.lam.real), _fmt(pt.lam.imag), bc.value, pt.multiplicity,
                  pt.dirichlet_order, pt.neumann_order, pt.spectral_class.value,
                  _fmt(pt.residual), _fmt(None if pt.self_orth is None else abs(pt.self_orth)),
                  "shooting"] for pt in pts]
    if args.method in ("recurrence", "both"):
        if not p.is_even:
            raise UsageError("--method recurrence/both needs an even potential (b = a)")
        fams = _UNIONS.get(bc) or tuple(f for pair in _UNIONS.values() for f in pair)
        fams = tuple(dict.fromkeys(fams))
        vals = []
        for f in fams:
            w = family_spectrum(f, p.a, args.re_max)
            vals += [(complex(z), f.value) for z in w if region.contains(z)]
        vals.sort(key=lambda t: (round(t[0].real, 12), round(t[0].imag, 12), t[1]))
        results["recurrence"] = [{"lambda": _cplx(z), "family": f} for z, f in vals]
        rows += [[_fmt(z.real), _fmt(z.imag), bc.value, "", "", "", f, "", "", "recurrence"]
                 for z, f in vals]
    if args.method == "both":
        fams = _UNIONS.get(bc) or tuple(f for pair in _UNIONS.values() for f in pair)
        try:
            rep = cross_validate(p, region, families=fams)
        except CrossValidationError as exc:
            rep = exc.report
            code = EXIT_MISMATCH
            log.error("%s", exc)
        results["cross_validation"] = {
            "ok": rep.ok,
            "pa_separation": _num(rep.pa_separation),
            "boundaries": [{"bc": b.bc.value, "families": [f.value for f in b.families],
                            "matched": len(b.matches), "max_deviation": _num(b.max_deviation),
                            "orphans_shooting": [_cplx(z) for z in b.orphans_shooting],
                            "orphans_recurrence": [_cplx(z) for z in b.orphans_recurrence]}
                           for b in rep.boundaries],
        }
    if args.format == "csv":
        sys.stdout.write(_points_csv(rows))
    else:
        _emit("spectrum", inputs, results, diagnostics)
    return code


def cmd_classify(args) -> int:
    p = _params(args)
    if not p.is_even:
        raise UsageError("classification needs an even potential (b = a)")
    bc = BoundaryCondition.parse(args.bc)
    spec = locate_eigenvalues(p, bc, re_max=args.re_max)
    pts = [pt for pt in spec if pt.lam.real <= args.re_max]
    if args.format == "csv":
        sys.stdout.write(_points_csv([[_fmt(pt.lam.real), _fmt(pt.lam.imag), bc.value,
                                       pt.multiplicity, pt.dirichlet_order, pt.neumann_order,
                                       pt.spectral_class.value, _fmt(pt.residual),
                                       _fmt(None if pt.self_orth is None else abs(pt.self_orth)),
                                       "shooting"] for pt in pts]))
    else:
        _emit("classify", dict(_param_inputs(p), bc=bc.value, re_max=args.re_max),
              [_point_record(pt) for pt in pts],
              {"residual_tol": RESIDUAL_TOL, "region": list(spec.region.as_tuple())})
    return EXIT_OK


def cmd_localize(args) -> int:
    p = _params(args)
    bc = BoundaryCondition.parse(args.bc)
    res = localize(p, bc, args.re_max)
    rep = res.report
    coverage = [{"lambda": _cplx(c.lam), "disk": None if c.disk is None else c.disk.label,
                 "margin": _num(c.margin)} for c in rep.coverage]
    _emit("localize", dict(_param_inputs(p), bc=bc.value, re_max=args.re_max),
          {"ok": rep.ok, "coverage": coverage,
           "thresholds": threshold_report(p.a, None if p.is_even else p.b).guarantees,
           "disks": [{"label": d.label, "center": _cplx(d.center), "radius": _num(d.radius)}
                     for d in res.disks]},
          {"containment_slack": rep.slack, "residual_tol": RESIDUAL_TOL})
    return EXIT_OK if rep.ok else EXIT_MISMATCH


def cmd_certify(args) -> int:
    if args.all:
        certs = cert.certify_all()
    else:
        if args.id not in cert.ALL_IDS:
            raise UsageError(f"unknown certificate id {args.id!r}")
        if args.id in cert.CHAINS:
            deps = {d: cert.certify_estimation(d) for d in cert.CHAIN_DEPENDENCIES[args.id]}
            certs = {args.id: cert.certify_chain(args.id, deps)}
        else:
            certs = {args.id: cert.certify_estimation(args.id)}
    _emit("certify", {"ids": list(certs)}, [c.to_dict() for c in certs.values()],
          {"arithmetic": "exact rational",
           "surd_enclosure_width": cert._rational_record(cert.ENCLOSURE_WIDTH)})
    return EXIT_OK if all(c.verdict for c in certs.values()) else EXIT_CERTIFICATE


def cmd_sweep(args) -> int:
    if args.angle:
        angles = list(args.angle)
    else:
        angles = [2 * math.pi * k / args.angles for k in range(args.angles)]
    try:
        families = families_of(args.family)
    except ValueError:
        raise UsageError(f"unknown family {args.family!r}") from None
    if args.format == "csv":
        out = []
        for f in families:
            grid = SweepGrid(Ray(angles[0], 0.0, args.r_max), args.steps, f, DEFAULT_WINDOW)
            out.append(track_trajectories(grid).to_csv())
        header, *_ = out[0].splitlines(keepends=True)
        sys.stdout.write(header + "".join(o.split("\n", 1)[1] for o in out))
        return EXIT_OK
    events = find_degeneracies(args.family, angles, args.r_max, threads=args.threads)
    _emit("sweep", {"family": args.family, "angles": angles, "r_max": args.r_max},
          {"events": [e.to_dict() for e in events],
           "minimal": events[0].to_dict() if events else None},
          {"lambda_window": list(DEFAULT_WINDOW.as_tuple()), "refinement_tolerance": 1e-6})
    return EXIT_OK


def cmd_discriminant(args) -> int:
    p = _params(args)
    lam = complex(args.lambda_re, args.lambda_im)
    F = hill_discriminant(p, lam)
    _emit("discriminant", dict(_param_inputs(p), **{"lambda": _cplx(lam)}),
          {"F": _cplx(F), "ab": _cplx(p.a * p.b)}, {"absolute_error_target": 1e-11})
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hillspec", description=__doc__.splitlines()[0])
    parser.add_argument("--threads", type=int,
                        default=int(os.environ.get("HILLSPEC_THREADS", os.cpu_count() or 1)))
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    bcs = [b.value for b in BoundaryCondition]

    sp = sub.add_parser("spectrum", help="eigenvalues of one boundary problem")
    _add_a(sp)
    sp.add_argument("--bc", choices=bcs, required=True)
    sp.add_argument("--re-max", type=float, required=True)
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.add_argument("--method", choices=("shooting", "recurrence", "both"), default="shooting")
    sp.set_defaults(func=cmd_spectrum)

    cp = sub.add_parser("classify", help="PD/PN/AD/AN classes of P or A eigenvalues")
    _add_a(cp)
    cp.add_argument("--bc", choices=bcs, required=True)
    cp.add_argument("--re-max", type=float, required=True)
    cp.add_argument("--format", choices=("json", "csv"), default="json")
    cp.set_defaults(func=cmd_classify)

    lp = sub.add_parser("localize", help="disk containment of one spectrum")
    _add_a(lp)
    lp.add_argument("--bc", choices=bcs[:4], required=True)
    lp.add_argument("--re-max", type=float, required=True)
    lp.set_defaults(func=cmd_localize)

    ce = sub.add_parser("certify", help="exact estimation and chain certificates")
    g = ce.add_mutually_exclusive_group(required=True)
    g.add_argument("--id")
    g.add_argument("--all", action="store_true")
    ce.set_defaults(func=cmd_certify)

    sw = sub.add_parser("sweep", help="first collisions along rays in the a-plane")
    sw.add_argument("--family", required=True, help="PN, PD, AN, AD, an operator P/A/D/N, or P+N")
    ag = sw.add_mutually_exclusive_group(required=True)
    ag.add_argument("--angle", type=float, action="append", help="ray angle in radians")
    ag.add_argument("--angles", type=int, help="number of equally spaced rays")
    sw.add_argument("--r-max", type=float, required=True)
    sw.add_argument("--steps", type=int, default=240)
    sw.add_argument("--format", choices=("json", "csv"), default="json")
    sw.set_defaults(func=cmd_sweep)

    dp = sub.add_parser("discriminant", help="Hill discriminant F(lambda)")
    _add_a(dp)
    dp.add_argument("--lambda-re", type=float, required=True)
    dp.add_argument("--lambda-im", type=float, required=True)
    dp.set_defaults(func=cmd_discriminant)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:       # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"hillspec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (HillSpecError, ValueError) as exc:
        log.error("%s", exc)
        return 1


def main_entry() -> None:
    raise SystemExit(main())
