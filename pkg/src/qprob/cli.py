"""Batch command line front end.

One subcommand per analysis, JSON in, JSON out (CSV for tabular data).
Every report embeds the full run configuration, and identical
configurations produce byte-identical reports in exact mode (float mode
rounds to 12 significant digits before serialization).

Exit codes: 0 success, 2 validation error, 3 infeasible or outside verdict
(the report is still written), 64 unknown subcommand, 65 malformed input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

import numpy as np

from . import __version__, core, gamble, lattice, polytope, projgeom, witness
from .errors import InfeasibleError, InputFormatError, QprobError
from .exactlp import frac

SCHEMA_VERSION = 1

COMMANDS = (
    "lattice-check", "harmonic", "soler-check", "gamble-solve", "indeterminacy",
    "frame-bound", "wonder-iterate", "extend-state", "fit-state",
    "polytope-vertices", "polytope-facets", "polytope-member", "quantum-point",
    "ch-value", "maximize-violation", "witness-estimate", "conjecture-run",
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3
EXIT_UNKNOWN_COMMAND = 64
EXIT_BAD_INPUT = 65


# -- serialization helpers --------------------------------------------------

def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise InputFormatError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputFormatError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}") from exc


def _field(data: dict, name: str, path: str):
    if name not in data:
        raise InputFormatError(f"{path}: missing field {name!r}")
    return data[name]


def _parse_scalar(c):
    if isinstance(c, (list, tuple)):
        if len(c) != 2:
            raise InputFormatError("complex scalars are [re, im] pairs")
        return complex(c[0], c[1])
    return float(c)


def _parse_vector(v):
    return [_parse_scalar(c) for c in v]


def _parse_rational(text):
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise InputFormatError(f"bad rational literal {text!r}") from exc


def parse_objective(text: str) -> dict:
    """Linear expressions: [coef "*"] label joined by "+" and "-"."""
    out: dict = {}
    s = text.replace(" ", "")
    if not s:
        raise InputFormatError("empty objective")
    i = 0
    sign = Fraction(1)
    if s[0] in "+-":
        sign = Fraction(-1) if s[0] == "-" else Fraction(1)
        i = 1
    while i < len(s):
        j = i
        while j < len(s) and s[j] not in "+-":
            j += 1
        term = s[i:j]
        if not term:
            raise InputFormatError(f"empty term in objective {text!r}")
        if "*" in term:
            coef_text, label = term.split("*", 1)
            coef = _parse_rational(coef_text)
        else:
            coef, label = Fraction(1), term
        if not label:
            raise InputFormatError(f"missing label in objective term {term!r}")
        out[label] = out.get(label, Fraction(0)) + sign * coef
        if j < len(s):
            sign = Fraction(-1) if s[j] == "-" else Fraction(1)
        i = j + 1
    return out


def parse_fixes(items) -> dict:
    out = {}
    for item in items or []:
        for piece in item.split(","):
            if not piece:
                continue
            if "=" not in piece:
                raise InputFormatError(f"fix {piece!r} is not of the form node=p/q")
            node, val = piece.split("=", 1)
            out[node.strip()] = _parse_rational(val)
    return out


def _rat_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _render(value, mode: str):
    """Recursively render a result tree for stable serialization."""
    if isinstance(value, Fraction):
        return {"rational": _rat_str(value), "float": _round12(float(value))}
    if isinstance(value, float):
        return _round12(value)
    if isinstance(value, complex):
        return [_round12(value.real), _round12(value.imag)]
    if isinstance(value, np.ndarray):
        return _render(value.tolist(), mode)
    if isinstance(value, dict):
        return {str(k): _render(v, mode) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_render(v, mode) for v in value]
    if isinstance(value, (np.floating,)):
        return _round12(float(value))
    if isinstance(value, (np.integer,)):
        return int(value)
    return value


def _round12(x: float) -> float:
    return float(f"{x:.12g}")


def _matrix_out(m: np.ndarray):
    if np.iscomplexobj(m):
        return [[[_round12(float(np.real(c))), _round12(float(np.imag(c)))]
                 for c in row] for row in m]
    return [[_round12(float(c)) for c in row] for row in m]


def _ray_from_json(vec) -> core.Ray:
    return core.Ray(_parse_vector(vec))


# -- command handlers --------------------------------------------------------

def cmd_lattice_check(args):
    lat = lattice.FiniteOrtholattice.from_dict(_load_json(args.lattice))
    reports = lattice.check_all(lat)
    return {"axioms": [r.to_dict() for r in reports]}, EXIT_OK


def cmd_harmonic(args):
    data = _load_json(args.points)
    x = _ray_from_json(_field(data, "x", args.points))
    y = _ray_from_json(_field(data, "y", args.points))
    z = _ray_from_json(_field(data, "z", args.points))
    u = _ray_from_json(data["u"]) if "u" in data else None
    v = _ray_from_json(data["v"]) if "v" in data else None
    w = projgeom.harmonic_conjugate(z, x, y, u=u, v=v, seed=args.seed)
    cr = projgeom.cross_ratio(x, y, z, w)
    return {"conjugate": list(w.vector), "cross_ratio": cr}, EXIT_OK


def cmd_soler_check(args):
    data = _load_json(args.points)
    x = _ray_from_json(_field(data, "x", args.points))
    y = _ray_from_json(_field(data, "y", args.points))
    z, holds = projgeom.check_soler_pair(x, y, seed=args.seed)
    return {"bisector": list(z.vector), "holds": bool(holds)}, EXIT_OK


def _load_graph(path) -> gamble.OrthoGraph:
    return gamble.OrthoGraph.from_dict(_load_json(path))


def cmd_gamble_solve(args):
    g = _load_graph(args.graph)
    objective = parse_objective(args.objective)
    fixes = parse_fixes(args.fix)
    extra_eq = []
    extra_le = []
    if args.problem:
        prob = _load_json(args.problem)
        for row in prob.get("equalities", []):
            extra_eq.append(({k: _parse_rational(v) for k, v in row["coeffs"].items()},
                             _parse_rational(row["rhs"])))
        for row in prob.get("inequalities", []):
            extra_le.append(({k: _parse_rational(v) for k, v in row["coeffs"].items()},
                             _parse_rational(row["rhs"])))
    try:
        sol = gamble.state_lp(g, objective, extra_eq=extra_eq, extra_le=extra_le,
                              fixes=fixes, sense=args.sense)
    except InfeasibleError as exc:
        return {"status": "infeasible",
                "certificate": _certificate_out(exc.certificate)}, EXIT_INFEASIBLE
    return {
        "status": "optimal",
        "optimum": sol.value,
        "assignment": sol.assignment.to_dict(),
    }, EXIT_OK


def cmd_indeterminacy(args):
    g = _load_graph(args.graph)
    fixes = parse_fixes(args.fix)
    if len(fixes) != 1:
        raise QprobError("indeterminacy needs exactly one --fix node=1")
    (x, val), = fixes.items()
    if val != 1:
        raise QprobError("the conditioning fix must equal 1")
    objective = parse_objective(args.objective)
    if len(objective) != 1:
        raise QprobError("the objective must be a single node label")
    (y, _), = objective.items()
    try:
        lo, hi = gamble.indeterminacy_range(g, x, y)
    except InfeasibleError as exc:
        return {"status": "infeasible",
                "certificate": _certificate_out(exc.certificate)}, EXIT_INFEASIBLE
    return {"status": "ok", "low": lo, "high": hi}, EXIT_OK


def cmd_frame_bound(args):
    g = _load_graph(args.graph)
    objective = parse_objective(args.objective)
    if len(objective) != 1:
        raise QprobError("the target must be a single node label")
    (target, _), = objective.items()
    fixes = parse_fixes(args.fix)
    zero_nodes = tuple(n for n, v in fixes.items() if v == 0)
    problem = gamble.FrameProblem(g, zero_nodes, target)
    fb = gamble.frame_lp(problem)
    return {
        "bound": fb.bound,
        "upper": fb.upper,
        "lower": fb.lower,
        "maximizer": {n: v for n, v in fb.maximizer.items()},
    }, EXIT_OK


def cmd_wonder_iterate(args):
    rep = gamble.wonder_iterate(gamble.demo_wonder_builder, args.objective, args.depth)
    return {
        "target": rep.target,
        "stages": [{"k": k, "nodes": n, "bound": b} for k, n, b in rep.stages],
    }, EXIT_OK


def cmd_extend_state(args):
    g0 = _load_graph(args.graph)
    g = _load_graph(args.supergraph)
    raw = _load_json(args.assignment)
    values = {k: _parse_rational(v) if isinstance(v, str) else float(v)
              for k, v in raw.items()}
    p0 = gamble.StateAssignment(values)
    ext, cert = gamble.extend_state(g0, p0, g)
    if ext is None:
        return {"status": "infeasible",
                "certificate": _certificate_out(cert)}, EXIT_INFEASIBLE
    return {"status": "extended", "assignment": ext.to_dict()}, EXIT_OK


def cmd_fit_state(args):
    g = _load_graph(args.graph)
    raw = _load_json(args.assignment)
    values = {k: _parse_rational(v) if isinstance(v, str) else float(v)
              for k, v in raw.items()}
    w, dev = gamble.fit_quantum_state(g, gamble.StateAssignment(values), seed=args.seed)
    return {"state_matrix": _matrix_out(w.matrix), "max_deviation": dev}, EXIT_OK


def cmd_polytope_vertices(args):
    scheme = polytope.EventScheme.from_dict(_load_json(args.scheme))
    poly = polytope.vertices(scheme)
    return {"count": len(poly.vertices),
            "vertices": [list(v) for v in poly.vertices]}, EXIT_OK


def cmd_polytope_facets(args):
    scheme = polytope.EventScheme.from_dict(_load_json(args.scheme))
    poly = polytope.vertices(scheme)
    fs = polytope.facets(poly)
    return {"count": len(fs), "facets": [f.to_dict() for f in fs]}, EXIT_OK


def cmd_polytope_member(args):
    scheme = polytope.EventScheme.from_dict(_load_json(args.scheme))
    point = [_parse_rational(x) if isinstance(x, str) else frac(x)
             for x in _load_json(args.point)]
    verdict = polytope.membership(point, polytope.vertices(scheme))
    if verdict.inside:
        return {"verdict": "inside"}, EXIT_OK
    return {"verdict": "outside",
            "separator": verdict.separator.to_dict()}, EXIT_INFEASIBLE


def _setup_from_json(data, path):
    rays = [
        _ray_from_json(_field(data, k, path)) for k in ("a1", "a2", "b1", "b2")
    ]
    wm = np.array([[_parse_scalar(c) for c in row]
                   for row in _field(data, "state", path)])
    w = core.DensityOperator(wm)
    return polytope.QuantumSetup(rays[0], rays[1], rays[2], rays[3], w)


def cmd_quantum_point(args):
    setup = _setup_from_json(_load_json(args.setup), args.setup)
    pt = polytope.quantum_point(setup)
    return {"point": pt, "ch_value": polytope.ch_value(pt)}, EXIT_OK


def cmd_ch_value(args):
    point = _parse_vector(_load_json(args.point))
    return {"ch_value": polytope.ch_value(point)}, EXIT_OK


def cmd_maximize_violation(args):
    setup, val = polytope.maximize_violation(
        product_state=args.template == "product",
        restarts=args.restarts, seed=args.seed)
    pt = polytope.quantum_point(setup)
    verdict = polytope.membership([frac(x) for x in pt], polytope.vertices(polytope.CH_SCHEME))
    out = {
        "best_value": val,
        "point": pt,
        "inside_classical_polytope": verdict.inside,
    }
    if not verdict.inside:
        out["separator"] = verdict.separator.to_dict()
    return out, EXIT_OK


def cmd_witness_estimate(args):
    if args.ghz is not None:
        x = witness.ghz(args.ghz)
    else:
        data = _load_json(args.state)
        n = int(_field(data, "n", args.state))
        x = witness.NQubitRay(_ray_from_json(_field(data, "vector", args.state)), n)
    est = witness.entanglement_estimate(x, seed=args.seed)
    return {"estimate": est.value, "contributions": est.contributions,
            "note": "lower bound over the certified witness family"}, EXIT_OK


def cmd_conjecture_run(args):
    lo, hi = args.n_range.split("..")
    rep = witness.conjecture_experiment(
        range(int(lo), int(hi) + 1), args.constant_C, args.samples, seed=args.seed)
    return {"report": rep.to_dict(), "csv": rep.to_csv()}, EXIT_OK


def _certificate_out(cert):
    if cert is None:
        return None
    out = {
        "multipliers": [_rat_str(m) for m in cert.multipliers],
        "combined_rhs": _rat_str(cert.combined_rhs),
        "bound_value": _rat_str(cert.bound_value),
        "row_kinds": cert.row_kinds,
    }
    if hasattr(cert, "row_labels"):
        out["rows"] = [{"kind": k, "members": list(m)} for k, m in cert.row_labels]
    return out


HANDLERS = {
    "lattice-check": cmd_lattice_check,
    "harmonic": cmd_harmonic,
    "soler-check": cmd_soler_check,
    "gamble-solve": cmd_gamble_solve,
    "indeterminacy": cmd_indeterminacy,
    "frame-bound": cmd_frame_bound,
    "wonder-iterate": cmd_wonder_iterate,
    "extend-state": cmd_extend_state,
    "fit-state": cmd_fit_state,
    "polytope-vertices": cmd_polytope_vertices,
    "polytope-facets": cmd_polytope_facets,
    "polytope-member": cmd_polytope_member,
    "quantum-point": cmd_quantum_point,
    "ch-value": cmd_ch_value,
    "maximize-violation": cmd_maximize_violation,
    "witness-estimate": cmd_witness_estimate,
    "conjecture-run": cmd_conjecture_run,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qprob", description=__doc__)
    sub = parser.add_subparsers(dest="command")
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--graph")
        p.add_argument("--supergraph")
        p.add_argument("--assignment")
        p.add_argument("--scheme")
        p.add_argument("--lattice")
        p.add_argument("--points")
        p.add_argument("--point")
        p.add_argument("--setup")
        p.add_argument("--state")
        p.add_argument("--ghz", type=int)
        p.add_argument("--problem")
        p.add_argument("--objective")
        p.add_argument("--fix", action="append")
        p.add_argument("--sense", choices=("max", "min"), default="max")
        p.add_argument("--depth", type=int, default=1)
        p.add_argument("--restarts", type=int, default=64)
        p.add_argument("--template", choices=("full", "product"), default="full")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--samples", type=int, default=1000)
        p.add_argument("--constant-C", dest="constant_C", type=float, default=1.0)
        p.add_argument("--n-range", dest="n_range", default="2..4")
        p.add_argument("--out")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--mode", choices=("exact", "float"), default="exact")
    return parser


def _config_echo(args) -> dict:
    skip = {"command", "out"}  # the analysis is what it is wherever it lands
    return {k: v for k, v in sorted(vars(args).items())
            if k not in skip and v is not None}


def run(argv) -> int:
    argv = list(argv)
    if not argv:
        sys.stderr.write("usage: qprob <command> [flags]; commands: "
                         + ", ".join(COMMANDS) + "\n")
        return EXIT_UNKNOWN_COMMAND
    if argv[0] in ("-h", "--help"):
        build_parser().print_help()
        return EXIT_OK
    if argv[0] not in COMMANDS:
        sys.stderr.write(f"unknown subcommand: {argv[0]}\n")
        return EXIT_UNKNOWN_COMMAND
    parser = build_parser()
    args = parser.parse_args(argv)
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": args.command,
        "config": _config_echo(args),
        "module_versions": {"qprob": __version__},
    }
    try:
        result, code = HANDLERS[args.command](args)
    except InputFormatError as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_BAD_INPUT
    except InfeasibleError as exc:
        result, code = {"status": "infeasible",
                        "certificate": _certificate_out(exc.certificate)}, EXIT_INFEASIBLE
    except QprobError as exc:
        sys.stderr.write(f"validation error: {exc}\n")
        return EXIT_VALIDATION
    report["result"] = _render(result, args.mode)
    if args.format == "csv" and isinstance(result.get("csv"), str):
        text = result["csv"]
    else:
        report["result"].pop("csv", None)
        text = json.dumps(report, sort_keys=True, separators=(",", ":")) + "\n"
    out_path = args.out
    if out_path is None and os.environ.get("QPROB_OUT_DIR"):
        out_path = os.path.join(os.environ["QPROB_OUT_DIR"], f"{args.command}.{args.format}")
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
