"""JSON command-line front end.

Every subcommand reads one JSON document (``--input``, default stdin) and
writes one JSON document (``--output``, default stdout).  Complex numbers
travel as ``[re, im]`` pairs; polynomials as
``{"exponents": [[i, j, k], ...], "coeffs": [[re, im], ...]}``.

Exit codes: 0 success, 1 malformed input, 2 mathematical domain error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import characters as ch
from . import cubic_surface as cs
from . import trace_map as tm
from .algebra import AffineCubicPoly, ProjectiveCubic, Tolerance, substitute
from .errors import DomainError, InputError
from .selftest import LEVELS, selftest

SCHEMA = "tritangent-cv/1"

EXIT_OK, EXIT_INPUT, EXIT_DOMAIN = 0, 1, 2


# ---------------------------------------------------------------------------
# canonical JSON output
# ---------------------------------------------------------------------------

def _num(x):
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("non-finite number in output")
    if x == 0:
        return "0"
    return format(x, ".17g")


def dumps(obj, pretty=False, _level=0):
    """Serialize with sorted keys and 17 significant digits per float."""
    nl = "\n" + "  " * (_level + 1) if pretty else ""
    end = "\n" + "  " * _level if pretty else ""
    sep = "," if pretty else ","
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{json.dumps(str(k))}:{' ' if pretty else ''}{dumps(obj[k], pretty, _level + 1)}"
                 for k in sorted(obj)]
        return "{" + nl + (sep + nl).join(items) + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        # keep short numeric pairs on one line when pretty-printing
        if pretty and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[" + nl + (sep + nl).join(dumps(v, pretty, _level + 1) for v in obj) + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def enc(value):
    """Convert library values into JSON-ready structures."""
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.ndarray):
        return [enc(v) for v in value.tolist()] if value.ndim else enc(value.item())
    if isinstance(value, (list, tuple)):
        return [enc(v) for v in value]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    return value


def enc_poly(f):
    terms = f.sorted_terms()
    return {"exponents": [list(e) for e, _ in terms], "coeffs": [enc(c) for _, c in terms]}


# ---------------------------------------------------------------------------
# input validation
# ---------------------------------------------------------------------------

def _is_num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def get_complex(v, where):
    if not (isinstance(v, list) and len(v) == 2 and all(_is_num(u) for u in v)):
        raise InputError(f"{where}: expected a complex number [re, im]")
    return complex(v[0], v[1])


def get_cvec(v, n, where):
    if not (isinstance(v, list) and len(v) == n):
        raise InputError(f"{where}: expected {n} complex numbers")
    return [get_complex(u, f"{where}[{i}]") for i, u in enumerate(v)]


def get_real(v, where, minimum=None):
    if not _is_num(v) or (minimum is not None and v < minimum):
        raise InputError(f"{where}: expected a finite number" + (f" >= {minimum}" if minimum is not None else ""))
    return float(v)


def get_int(v, where, minimum=None):
    if not isinstance(v, int) or isinstance(v, bool) or (minimum is not None and v < minimum):
        raise InputError(f"{where}: expected an integer" + (f" >= {minimum}" if minimum is not None else ""))
    return v


def get_poly(v, nvars, where):
    if not (isinstance(v, dict) and isinstance(v.get("exponents"), list) and isinstance(v.get("coeffs"), list)):
        raise InputError(f"{where}: expected {{'exponents': [...], 'coeffs': [...]}}")
    if len(v["exponents"]) != len(v["coeffs"]):
        raise InputError(f"{where}: exponents and coeffs differ in length")
    terms = {}
    for i, (e, c) in enumerate(zip(v["exponents"], v["coeffs"])):
        if not (isinstance(e, list) and len(e) == nvars and all(isinstance(k, int) and k >= 0 for k in e)):
            raise InputError(f"{where}.exponents[{i}]: expected {nvars} nonnegative integers")
        key = tuple(e)
        terms[key] = terms.get(key, 0j) + get_complex(c, f"{where}.coeffs[{i}]")
    return terms


def need(doc, *keys):
    for k in keys:
        if k in doc:
            return doc[k], k
    raise InputError(f"missing field {' or '.join(repr(k) for k in keys)}")


# ---------------------------------------------------------------------------
# subcommands: each returns (result, residuals, warnings)
# ---------------------------------------------------------------------------

def _maxres(values):
    return max((float(v) for v in values), default=0.0)


def cmd_phi(doc, tol, seed):
    if "points" in doc:
        pts = doc["points"]
        if not isinstance(pts, list):
            raise InputError("points: expected a list")
        batch = [tm.phi(get_cvec(t, 4, f"points[{i}]")) for i, t in enumerate(pts)]
        return {"params_list": enc(batch)}, {}, []
    t = get_cvec(need(doc, "traces")[0], 4, "traces")
    return {"params": enc(tm.phi(t))}, {}, []


def cmd_jacobian(doc, tol, seed):
    t = get_cvec(need(doc, "traces")[0], 4, "traces")
    return {"det": enc(tm.phi_jacobian_det(t)), "matrix": enc(tm.phi_jacobian(t))}, {}, []


def _target(doc):
    val, key = need(doc, "target", "params")
    return get_cvec(val, 4, key)


def cmd_fiber(doc, tol, seed):
    sol = tm.fiber(_target(doc), tol, seed)
    result = {"points": enc(sol.points), "count": len(sol.points), "method": sol.method}
    return result, {"forward": sol.residuals, "max_forward": _maxres(sol.residuals)}, sol.warnings


def cmd_fiber_count(doc, tol, seed):
    trials = get_int(doc.get("trials", 3), "trials", 1)
    fc = tm.fiber_count(_target(doc), trials=trials, seed=seed, tol=tol)
    target = _target(doc)
    res = [tm.forward_residual(t, target) for t in fc.points]
    warnings = ["non-generic: some preimage has a vanishing Jacobian"] if fc.non_generic else []
    if not fc.saturated:
        warnings.append("not saturated: the last Newton round still found new preimages")
    result = {"count": fc.count, "saturated": fc.saturated, "non_generic": fc.non_generic,
              "points": enc(fc.points), "trials": trials}
    return result, {"max_forward": _maxres(res)}, warnings


def cmd_classify(doc, tol, seed):
    t = get_cvec(need(doc, "traces")[0], 4, "traces")
    eps = get_real(doc.get("tol", 1e-12), "tol", 0)
    params = tm.phi(t)
    return {"family": tm.classify_pqr_zero(t, eps), "params": enc(params)}, {}, []


def cmd_normalize(doc, tol, seed):
    terms = get_poly(need(doc, "poly")[0], 3, "poly")
    try:
        f = AffineCubicPoly(terms)
    except ValueError as exc:
        raise InputError(f"poly: {exc}") from exc
    params, change = cs.normalize(f, tol, seed)
    result = {
        "params": enc(params),
        "change": {"L": enc(change.L), "v": enc(change.v), "divisor": enc(change.divisor)},
        "normalized_poly": enc_poly(substitute(f, change)),
    }
    return result, {"normal_form": cs.normal_form_residual(f, params, change)}, []


def cmd_tritangent(doc, tol, seed):
    terms = get_poly(need(doc, "surface")[0], 4, "surface")
    try:
        S = ProjectiveCubic(terms)
    except ValueError as exc:
        raise InputError(f"surface: {exc}") from exc
    plane = get_cvec(need(doc, "plane")[0], 4, "plane")
    if not any(plane):
        raise InputError("plane: all coefficients are zero")
    out = cs.verify_tritangent(S, plane, tol, seed)
    result = {"kind": out.kind, "point": enc(out.point) if out.point is not None else None}
    return result, {}, []


def cmd_singular(doc, tol, seed):
    val, key = need(doc, "params", "target")
    reps = cs.singular_points(get_cvec(val, 4, key), tol)
    result = {"points": [{"location": enc(r.location), "hessian_rank": r.hessian_rank, "label": r.label}
                         for r in reps]}
    residuals = {"gradient": [r.gradient_residual for r in reps], "surface": [r.surface_residual for r in reps]}
    return result, residuals, []


def cmd_solve_z(doc, tol, seed):
    params = get_cvec(need(doc, "params")[0], 4, "params")
    x = get_complex(need(doc, "x")[0], "x")
    y = get_complex(need(doc, "y")[0], "y")
    zs = cs.solve_for_z(params, x, y, tol)
    return {"z": enc(zs)}, {"on_surface": [cs.on_surface(params, (x, y, z)) for z in zs]}, []


def _enc_mats(rep, names):
    return {n: enc(M) for n, M in zip(names, rep)}


def cmd_rep4(doc, tol, seed):
    t = get_cvec(need(doc, "traces")[0], 4, "traces")
    pt = get_cvec(need(doc, "point")[0], 3, "point")
    rep = ch.build_rep_4holed(t, pt, tol)
    t2, pt2 = ch.traces_of_rep(rep)
    err = max(abs(u - v) for u, v in zip(list(t2) + list(pt2), t + pt))
    return _enc_mats(rep, "ABCD"), {"trace_roundtrip": err}, []


def cmd_torus_char(doc, tol, seed):
    pt = get_cvec(need(doc, "point")[0], 3, "point")
    return {"kappa": enc(ch.torus_char(pt))}, {}, []


def cmd_torus_rep(doc, tol, seed):
    pt = get_cvec(need(doc, "point")[0], 3, "point")
    rep = ch.build_rep_torus(pt, tol)
    A, B = rep
    got = (ch.tr(A), ch.tr(B), ch.tr(A @ B))
    err = max(abs(u - v) for u, v in zip(got, pt))
    comm = ch.commutator_trace(rep)
    return ({**_enc_mats(rep, "AB"), "commutator_trace": enc(comm)},
            {"trace_roundtrip": err, "commutator": abs(comm - ch.torus_char(pt))}, [])


def cmd_delta(doc, tol, seed):
    params = get_cvec(need(doc, "params")[0], 4, "params")
    invariant, orbit = ch.delta_orbit(params, tol)
    return {"invariant": invariant, "orbit": enc(orbit)}, {}, []


def cmd_torus_map(doc, tol, seed):
    s = get_complex(need(doc, "s")[0], "s")
    corr = ch.torus_correspondence(s)
    oracle, pt = ch.torus_oracle_trace(s, seed, tol)
    result = {
        "kappa": enc(corr.kappa),
        "published_value": enc(corr.published_value),
        "agrees_with_published": corr.agrees,
        "oracle_commutator_trace": enc(oracle),
        "oracle_point": enc(pt),
    }
    warnings = []
    if not corr.agrees:
        warnings.append("published boundary trace s + 2 disagrees with the representation oracle, "
                        "which gives s - 2")
    return result, {"oracle_vs_kappa": abs(oracle - corr.kappa)}, warnings


def cmd_sphere_min(doc, tol, seed):
    R = get_real(need(doc, "R")[0], "R", 0)
    samples = get_int(doc.get("samples", 10_000), "samples", 1)
    return {"min": tm.min_image_on_sphere(R, samples, seed), "R": R, "samples": samples}, {}, []


COMMANDS = {
    "phi": cmd_phi,
    "jacobian": cmd_jacobian,
    "fiber": cmd_fiber,
    "fiber-count": cmd_fiber_count,
    "classify-pqr": cmd_classify,
    "normalize": cmd_normalize,
    "tritangent": cmd_tritangent,
    "singular": cmd_singular,
    "solve-z": cmd_solve_z,
    "rep4": cmd_rep4,
    "torus-char": cmd_torus_char,
    "torus-rep": cmd_torus_rep,
    "delta": cmd_delta,
    "torus-map": cmd_torus_map,
    "sphere-min": cmd_sphere_min,
}


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=1e-9, help="residual tolerance")
    common.add_argument("--pretty", action="store_true")
    common.add_argument("--input", default="-", help='input JSON path, or "-" for stdin')
    common.add_argument("--output", default="-", help='output path, or "-" for stdout')
    parser = _Parser(prog="tritangent-cv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    st = sub.add_parser("selftest", parents=[common])
    st.add_argument("--level", choices=sorted(LEVELS), default="quick")
    return parser


def load_input(path):
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as exc:
        raise InputError(f"cannot read input: {exc}") from exc

    def reject(const):
        raise InputError(f"non-finite number {const} in input")

    try:
        doc = json.loads(text, parse_constant=reject)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InputError("input must be a JSON object")
    if "schema" in doc and doc["schema"] != SCHEMA:
        raise InputError(f"unsupported schema {doc['schema']!r}")
    # accept a previous command's output document as input
    if isinstance(doc.get("result"), dict):
        doc = doc["result"]
    return doc


def run(command, doc, seed=0, tol=1e-9):
    """Execute one subcommand on a parsed input document.

    Returns ``(document, exit_code)``.
    """
    base = {"schema": SCHEMA, "subcommand": command, "seed": seed}
    try:
        tolerance = Tolerance(eps_residual=tol)
    except ValueError as exc:
        return {**base, "error_kind": InputError.kind, "message": str(exc)}, EXIT_INPUT
    base["tolerance"] = {"eps_residual": tolerance.eps_residual, "eps_equal": tolerance.eps_equal}
    if command not in COMMANDS:
        return {**base, "error_kind": InputError.kind, "message": f"unknown subcommand {command!r}"}, EXIT_INPUT
    try:
        result, residuals, warnings = COMMANDS[command](doc, tolerance, seed)
    except InputError as exc:
        return {**base, "error_kind": exc.kind, "message": str(exc)}, EXIT_INPUT
    except DomainError as exc:
        return ({**base, "error_kind": exc.kind, "message": str(exc), "details": enc(exc.details)},
                EXIT_DOMAIN)
    except ValueError as exc:
        return {**base, "error_kind": InputError.kind, "message": str(exc)}, EXIT_INPUT
    return {**base, "result": result, "residuals": residuals, "warnings": warnings}, EXIT_OK


def _emit(doc, path, pretty):
    text = dumps(doc, pretty) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise InputError("a subcommand is required")
    except InputError as exc:
        _emit({"schema": SCHEMA, "error_kind": exc.kind, "message": str(exc)}, "-", False)
        return EXIT_INPUT

    if args.command == "selftest":
        report = selftest(args.level, args.seed)
        for s in report["suites"]:
            print(f"{s['name']}: {s['passed']} passed, {s['failed']} failed", file=sys.stderr)
        doc = {"schema": SCHEMA, "subcommand": "selftest", "seed": args.seed, "result": report,
               "residuals": {}, "tolerance": {"eps_residual": args.tol}, "warnings": []}
        _emit(doc, args.output, args.pretty)
        return EXIT_OK if report["ok"] else EXIT_DOMAIN

    try:
        doc = load_input(args.input)
    except InputError as exc:
        out, code = {"schema": SCHEMA, "subcommand": args.command, "error_kind": exc.kind,
                     "message": str(exc), "seed": args.seed}, EXIT_INPUT
    else:
        out, code = run(args.command, doc, args.seed, args.tol)
    _emit(out, args.output, args.pretty)
    return code


if __name__ == "__main__":
    sys.exit(main())
