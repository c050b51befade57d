"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 strong ellipticity required but
violated, 4 numerical failure. Errors are written to stderr as one JSON
object.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .bhalf import a0, a_half, bhalf
from .boundary import BoundarySetup, validate_setup
from .ellipticity import check_strong_ellipticity, natural_spectrum
from .errors import GSBVPError, InvalidSetup, NotElliptic, NumericalError, ValidationError
from .gauge import (
    BUILTIN_MODELS,
    builtin_model,
    gauge_ellipticity,
    induced_boundary_setup,
    validate_gauge,
)
from .io import (
    boundary_from_payload,
    csv_number,
    dumps,
    gauge_from_payload,
    load_document,
    matrix_to_json,
    mesh_from_payload,
)
from .oracle import oracle_bhalf
from .profile import heat_diagonal, phi, psi, trace_profile_j

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NOT_ELLIPTIC = 3
EXIT_NUMERICAL = 4


class UsageError(ValidationError):
    pass


# ------------------------------------------------------------- summaries

def setup_json(s: BoundarySetup) -> dict:
    return {
        "m": s.m,
        "dim_v": s.dim_v,
        "label": s.label,
        "pi": matrix_to_json(s.pi),
        "gamma": [matrix_to_json(g) for g in s.gamma],
    }


def ellipticity_json(rep) -> dict:
    return {
        "classification": rep.classification,
        "min_margin": rep.min_margin,
        "worst_direction": rep.worst_direction,
        "samples_used": rep.samples_used,
        "band": rep.band,
        "coverage": rep.coverage,
    }


def spectrum_json(sp) -> dict:
    return {
        "zero_mult": sp.zero_mult,
        "branches": [{"nu": b.nu, "mult": b.mult} for b in sp.branches],
        "isotropic": sp.isotropic,
    }


def bhalf_json(res) -> dict:
    return {
        "method": res.method,
        "trace": res.trace,
        "err_estimate": res.err_estimate,
        "value": matrix_to_json(res.value),
    }


def error_json(exc: Exception) -> dict:
    out = {"type": type(exc).__name__, "message": str(exc), "exit_code": exit_code_for(exc)}
    if isinstance(exc, NotElliptic) and exc.margin is not None:
        out["margin"] = exc.margin
    violations = getattr(exc, "violations", None)
    if violations:
        out["violations"] = [{"name": v.name, "residual": v.residual} for v in violations]
    return out


def exit_code_for(exc: Exception) -> int:
    if isinstance(exc, NotElliptic):
        return EXIT_NOT_ELLIPTIC
    if isinstance(exc, NumericalError):
        return EXIT_NUMERICAL
    if isinstance(exc, ValidationError):
        return EXIT_VALIDATION
    return EXIT_NUMERICAL


def _attempt(fn):
    """Run one report section, recording a library error instead of raising."""
    try:
        return fn()
    except GSBVPError as exc:
        return {"error": error_json(exc)}


def parse_range(text: str) -> np.ndarray:
    """'a:b:n' -> n equispaced points from a to b inclusive."""
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError as exc:
        raise UsageError(f"expected a:b:n, got {text!r}") from exc
    if n < 1:
        raise UsageError("range needs n >= 1")
    return np.linspace(a, b, n)


def _grid_param(g) -> np.ndarray:
    return np.linspace(float(g[0]), float(g[1]), int(g[2]))


# ------------------------------------------------------------ commands

def _doc_setup(doc) -> BoundarySetup:
    if doc["kind"] == "boundary":
        return boundary_from_payload(doc["payload"])
    if doc["kind"] == "gauge":
        return induced_boundary_setup(gauge_from_payload(doc["payload"]))
    raise UsageError(f"command needs a boundary or gauge problem, got kind {doc['kind']!r}")


def cmd_check(args) -> dict:
    doc = load_document(args.file)
    params = doc.get("parameters", {})
    n_samples = params.get("n_samples", 512)
    if doc["kind"] == "mesh":
        mesh = mesh_from_payload(doc["payload"])
        cells = []
        for setup, area in mesh.cells:
            bad = validate_setup(setup)
            entry = {"area": area, "violations": [{"name": v.name, "residual": v.residual} for v in bad]}
            if not bad:
                entry["ellipticity"] = ellipticity_json(check_strong_ellipticity(setup, n_samples))
            cells.append(entry)
        return {"kind": "mesh", "cells": cells}
    if doc["kind"] == "gauge":
        sym = gauge_from_payload(doc["payload"])
        val = validate_gauge(sym)
        out = {"kind": "gauge", "violations": [{"name": v.name, "residual": v.residual} for v in val.violations]}
        if val.ok:
            out.update(_gauge_section(sym, n_samples))
        return out
    setup = boundary_from_payload(doc["payload"])
    bad = validate_setup(setup)
    out = {"kind": "boundary", "violations": [{"name": v.name, "residual": v.residual} for v in bad]}
    if not bad:
        out["ellipticity"] = ellipticity_json(check_strong_ellipticity(setup, n_samples))
        out["natural_spectrum"] = spectrum_json(natural_spectrum(setup))
    return out


def cmd_bhalf(args) -> dict:
    doc = load_document(args.file)
    params = doc.get("parameters", {})
    method = args.method or params.get("method", "auto")
    order = args.order or params.get("order", 40)
    n_max = params.get("n_max", 4)
    if doc["kind"] == "mesh":
        mesh = mesh_from_payload(doc["payload"])
        out = {"a_half": a_half(mesh, method, order), "total_area": mesh.total_area}
        vol = doc["payload"].get("volume")
        if vol is not None:
            out["a0"] = a0(vol, mesh.cells[0][0].dim_v)
        return out
    setup = _doc_setup(doc)
    return bhalf_json(bhalf(setup, method, order, n_max))


def _profile_rows(setup, zs, with_j):
    spec = natural_spectrum(setup) if with_j else None
    rows = []
    for z in zs:
        ps, ph = psi(setup, z), phi(setup, z)
        j = trace_profile_j(spec, setup.m, z) if with_j else None
        rows.append((z, ps, ph, j))
    return rows


def _matrix_headers(prefix, d):
    return [f"{prefix}_{part}_{i}_{j}" for i in range(d) for j in range(d) for part in ("re", "im")]


def _matrix_cells(a):
    out = []
    for x in np.asarray(a).ravel():
        out += [csv_number(x.real), csv_number(x.imag)]
    return out


def cmd_profile(args) -> str:
    doc = load_document(args.file)
    setup = _doc_setup(doc)
    zs = parse_range(args.z)
    d = setup.dim_v
    header = ["z"] + _matrix_headers("psi", d) + _matrix_headers("phi", d) + (["j"] if args.with_j else [])
    lines = [",".join(header)]
    for z, ps, ph, j in _profile_rows(setup, zs, args.with_j):
        cells = [csv_number(z)] + _matrix_cells(ps) + _matrix_cells(ph)
        if args.with_j:
            cells.append(csv_number(j))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def cmd_diag(args) -> str:
    doc = load_document(args.file)
    setup = _doc_setup(doc)
    rs = parse_range(args.r)
    header = ["r"] + _matrix_headers("bracket", setup.dim_v)
    lines = [",".join(header)]
    for r in rs:
        hd = heat_diagonal(setup, args.t, float(r))
        lines.append(",".join([csv_number(r)] + _matrix_cells(hd.bracket)))
    return "\n".join(lines) + "\n"


def cmd_oracle(args) -> dict:
    doc = load_document(args.file)
    setup = _doc_setup(doc)
    params = doc.get("parameters", {})
    if args.t_sweep:
        try:
            ts = [float(x) for x in args.t_sweep.split(",")]
        except ValueError as exc:
            raise UsageError(f"bad --t-sweep {args.t_sweep!r}") from exc
    elif "t_sweep" in params:
        ts = params["t_sweep"]
    else:
        raise UsageError("oracle needs --t-sweep or parameters.t_sweep")
    grid = args.grid or params.get("grid", 2000)
    length = args.length or params.get("length")
    fit = oracle_bhalf(setup, ts, grid, length)
    return {"t_sweep": ts, "estimate": fit.estimate, "fit_residual": fit.fit_residual, "intercept": fit.intercept}


def _gauge_section(sym, n_samples=512) -> dict:
    rep = gauge_ellipticity(sym, n_samples)
    return {
        "dim_v": sym.dim_v,
        "dim_g": sym.dim_g,
        "m": sym.m,
        "induced": setup_json(rep.induced),
        "ellipticity": ellipticity_json(rep.report),
        "condition_85_margin": rep.condition_85_margin,
        "natural_spectrum": spectrum_json(natural_spectrum(rep.induced)),
    }


def cmd_gauge(args) -> dict:
    if os.path.isfile(args.model):
        doc = load_document(args.model)
        if doc["kind"] != "gauge":
            raise UsageError("gauge command needs a gauge problem")
        sym = gauge_from_payload(doc["payload"])
    else:
        if args.model not in BUILTIN_MODELS:
            raise UsageError(f"{args.model!r} is neither a file nor one of {BUILTIN_MODELS}")
        if args.m is None:
            raise UsageError("built-in gauge models need --m")
        params = {} if args.lam is None else {"lambda": args.lam}
        sym = builtin_model(args.model, args.m, params)
    val = validate_gauge(sym)
    if not val.ok:
        raise InvalidSetup("invalid gauge symbol: " + "; ".join(map(str, val.violations)), val.violations)
    return {"model": sym.label} | _gauge_section(sym)


def build_report(doc: dict) -> dict:
    """Every analysis that applies to the problem, as one document."""
    params = doc.get("parameters", {})
    n_samples = params.get("n_samples", 512)
    method = params.get("method", "auto")
    order = params.get("order", 40)
    out = {"problem": doc, "gsbvp_version": __version__}
    if doc["kind"] == "mesh":
        mesh = mesh_from_payload(doc["payload"])
        out["cells"] = [
            {
                "area": area,
                "setup": setup_json(s),
                "ellipticity": _attempt(lambda s=s: ellipticity_json(check_strong_ellipticity(s, n_samples))),
            }
            for s, area in mesh.cells
        ]
        out["a_half"] = _attempt(lambda: a_half(mesh, method, order))
        if "volume" in doc["payload"]:
            out["a0"] = a0(doc["payload"]["volume"], mesh.cells[0][0].dim_v)
        return out

    if doc["kind"] == "gauge":
        sym = gauge_from_payload(doc["payload"])
        val = validate_gauge(sym)
        out["gauge_violations"] = [{"name": v.name, "residual": v.residual} for v in val.violations]
        if not val.ok:
            return out
        out["gauge"] = _gauge_section(sym, n_samples)
    setup = _doc_setup(doc)
    bad = validate_setup(setup)
    out["setup"] = setup_json(setup)
    out["violations"] = [{"name": v.name, "residual": v.residual} for v in bad]
    if bad:
        return out
    rep = check_strong_ellipticity(setup, n_samples)
    out["ellipticity"] = ellipticity_json(rep)
    spec = natural_spectrum(setup)
    out["natural_spectrum"] = spectrum_json(spec)
    out["a0_density"] = float(setup.dim_v)
    out["bhalf"] = _attempt(lambda: bhalf_json(bhalf(setup, method, order, params.get("n_max", 4))))
    if "z_grid" in params:
        with_j = params.get("with_j", False)

        def prof():
            return [
                {"z": z, "psi": matrix_to_json(ps), "phi": matrix_to_json(ph), "j": j}
                for z, ps, ph, j in _profile_rows(setup, _grid_param(params["z_grid"]), with_j)
            ]

        out["profile"] = _attempt(prof)
    if "t" in params and "r_grid" in params:
        out["diag"] = _attempt(lambda: [
            {"r": r, "bracket": matrix_to_json(heat_diagonal(setup, params["t"], float(r)).bracket)}
            for r in _grid_param(params["r_grid"])
        ])
    if "t_sweep" in params and setup.m == 2:
        def orc():
            fit = oracle_bhalf(setup, params["t_sweep"], params.get("grid", 2000), params.get("length"))
            return {"estimate": fit.estimate, "fit_residual": fit.fit_residual, "intercept": fit.intercept}

        out["oracle"] = _attempt(orc)
    return out


def cmd_report(args) -> dict:
    return build_report(load_document(args.file))


# ---------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gsbvp", description="Oblique boundary problems: ellipticity, b_1/2, profiles")
    p.add_argument("--version", action="version", version=f"gsbvp {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", help="validation and ellipticity report")
    c.add_argument("file")
    c.set_defaults(func=cmd_check)

    c = sub.add_parser("bhalf", help="boundary coefficient b_1/2 (or A_1/2 for a mesh)")
    c.add_argument("file")
    c.add_argument("--method", choices=["auto", "quad", "tensor", "series", "closed"])
    c.add_argument("--order", type=int)
    c.set_defaults(func=cmd_bhalf)

    c = sub.add_parser("profile", help="CSV of Psi, Phi (and J) over a z grid")
    c.add_argument("file")
    c.add_argument("--z", required=True, metavar="A:B:N")
    c.add_argument("--with-j", action="store_true")
    c.set_defaults(func=cmd_profile)

    c = sub.add_parser("diag", help="CSV of the heat-kernel diagonal bracket over r")
    c.add_argument("file")
    c.add_argument("--t", type=float, required=True)
    c.add_argument("--r", required=True, metavar="A:B:N")
    c.set_defaults(func=cmd_diag)

    c = sub.add_parser("oracle", help="finite-difference estimate of tr b_1/2 (m = 2)")
    c.add_argument("file")
    c.add_argument("--t-sweep", metavar="T1,T2,...")
    c.add_argument("--grid", type=int)
    c.add_argument("--length", type=float)
    c.set_defaults(func=cmd_oracle)

    c = sub.add_parser("gauge", help="induced boundary problem of a gauge model")
    c.add_argument("model", help="abelian-vector, graviton, or a gauge problem file")
    c.add_argument("--m", type=int)
    c.add_argument("--lambda", dest="lam", type=float)
    c.set_defaults(func=cmd_gauge)

    c = sub.add_parser("report", help="every applicable analysis as one JSON document")
    c.add_argument("file")
    c.set_defaults(func=cmd_report)
    return p


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    try:
        args = build_parser().parse_args(argv)
        result = args.func(args)
    except GSBVPError as exc:
        stderr.write(dumps({"error": error_json(exc)}))
        return exit_code_for(exc)
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        stderr.write(dumps({"error": {"type": type(exc).__name__, "message": str(exc), "exit_code": EXIT_NUMERICAL}}))
        return EXIT_NUMERICAL
    stdout.write(result if isinstance(result, str) else dumps(result))
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
