"""Command-line front end: JSON in, JSON out.

Exit codes: 0 success, 1 usage, 2 bad input, 3 mathematical precondition
violated, 4 a requested check failed.
"""

from __future__ import annotations

import argparse
import itertools
import json
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import cgp, compare, plumbing, qarith, repcat, zhat

EXIT_USAGE, EXIT_INPUT, EXIT_MATH, EXIT_CHECK = 1, 2, 3, 4

# every precondition failure raised by the inner modules
MATH_ERRORS = (
    qarith.ExcludedRootError,
    qarith.ConductorError,
    repcat.NotRibbonError,
    repcat.AtypicalWeightError,
    repcat.ExactBackendError,
    cgp.InadmissibleColourError,
    cgp.VerlindePoleError,
    compare.FamilyNotCoveredError,
    cgp.NonGenericOmegaError,
    zhat.ConvergenceError,
)


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _cjson(z: complex) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}


def _frac(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _need(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required for this command")


def _params(args) -> qarith.RootParams:
    _need(args, "r")
    return qarith.root_params(args.r)


def _graph(args) -> plumbing.PlumbingGraph:
    _need(args, "graph")
    try:
        text = Path(args.graph).read_text()
    except OSError as exc:
        raise InputError(f"cannot read graph: {exc}") from exc
    return plumbing.load_graph(text)


def _omegas(args, params, graph) -> list[cgp.OmegaClass]:
    """--omega file: {"alpha": ["p/q", ...]} or {"cycle": [k, ...]}; default all admissible classes."""
    if args.omega is None:
        oms = compare.generic_omegas(params, graph)
        if not oms:
            raise cgp.InadmissibleColourError("colour in X: no admissible omega for this graph and r")
        return oms
    try:
        data = json.loads(Path(args.omega).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read omega: {exc}") from exc
    m = cgp.colour_modulus(params)
    try:
        if "cycle" in data:
            om = cgp.OmegaClass.from_cycle(graph, [int(k) for k in data["cycle"]], m)
        else:
            om = cgp.OmegaClass.from_values(data["alpha"], int(data.get("modulus", m)))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad omega entry: {exc}") from exc
    return [om]


def _labels(graph, args):
    data = plumbing.enumerate_spin_spinc(graph.B)
    labels = data.spinc_labels
    if args.spinc is not None:
        if not 0 <= args.spinc < len(labels):
            raise InputError(f"--spinc must lie in [0, {len(labels)})")
        labels = [labels[args.spinc]]
    return labels


# ---------------------------------------------------------------------------
# Commands


def cmd_repdata(args) -> tuple[dict, bool]:
    params = _params(args)
    md = repcat.modular_data(params)
    out = {
        "r": params.r,
        "rbar": params.rbar,
        "t": params.t,
        "eps": params.eps,
        "rdot": params.rdot,
        "zeta": md.zeta,
        "kirby_index_set": md.kirby_index_set,
        "delta_plus": {**_cjson(md.delta_plus.to_complex()), "exact": md.delta_plus.dump()},
        "delta_minus": {**_cjson(md.delta_minus.to_complex()), "exact": md.delta_minus.dump()},
        "zeta_equals_product": md.delta_plus * md.delta_minus == md.ctx.rational(md.zeta),
        "brute_force_agrees": md.brute_force_agrees,
    }
    return out, True


def cmd_zhat(args) -> tuple[dict, bool]:
    graph = _graph(args)
    order = qarith.as_fraction(args.order if args.order is not None else "10")
    series = []
    for b, s in _labels(graph, args):
        entry = {"b": list(b), "s": list(s), "series": zhat.zhat_series(args.algebra, graph, (b, s), order).to_json_obj()}
        if args.r is not None:
            z = zhat.zhat_root_eval(graph, (b, s), args.algebra, args.r, strategy=args.strategy)
            entry["root_eval"] = _cjson(z)
        series.append(entry)
    return {"algebra": args.algebra, "order": _frac(order), "spinc": series}, True


def cmd_cgp(args) -> tuple[dict, bool]:
    params = _params(args)
    graph = _graph(args)
    results = []
    for om in _omegas(args, params, graph):
        val = cgp.cgp_invariant(params, graph, om, backend=args.backend, threads=args.threads)
        entry = {"omega": om.to_json_obj()}
        if args.backend == "exact":
            entry["invariant"] = _cjson(val.to_complex())
            entry["exact"] = val.dump()
        else:
            entry["invariant"] = _cjson(val)
        results.append(entry)
    return {"r": params.r, "backend": args.backend, "results": results}, True


def cmd_verlinde(args) -> tuple[dict, bool]:
    params = _params(args)
    if args.lambda_bar is None:
        rep = cgp.verlinde_limit_check(params, args.genus, tolerance=args.tolerance or 1e-6)
        return rep, rep["pass"]
    marked = []
    if args.marked is not None:
        try:
            marked = [(qarith.as_fraction(m), int(p)) for m, p in json.loads(args.marked)]
        except (json.JSONDecodeError, TypeError, ValueError) as exc:
            raise InputError(f"bad --marked: {exc}") from exc
    lam = qarith.as_fraction(args.lambda_bar)
    val = cgp.verlinde_value(params, args.genus, marked, lam)
    return {"r": params.r, "genus": args.genus, "lambda_bar": _frac(lam), "value": _cjson(val)}, True


def check_identities(args=None) -> dict:
    pascal = all(all(qarith.super_pascal_holds(n, k)) for n in range(1, 41) for k in range(1, n + 1))
    vansum = qarith.vanishing_sum(0) == qarith.LaurentPolynomial.constant(1) and all(
        qarith.vanishing_sum(n).is_zero() for n in range(1, 41)
    )
    rbar = all(qarith.rbar_for(r) == qarith.minimal_vanishing_index(r) for r in range(3, 65) if r != 4)
    modular = {}
    for r in range(5, 17):
        if r % 8 == 4:
            continue
        md = repcat.modular_data(qarith.root_params(r))
        modular[str(r)] = md.brute_force_agrees and md.delta_plus * md.delta_minus == md.ctx.rational(md.zeta)
    verl = {}
    for r, g in itertools.product((5, 6, 7, 8, 16), (1, 2, 3)):
        verl[f"{r},{g}"] = cgp.verlinde_limit_check(qarith.root_params(r), g)["pass"]
    ok = pascal and vansum and rbar and all(modular.values()) and all(verl.values())
    return {
        "super_pascal": pascal,
        "vanishing_sum": vansum,
        "rbar_table": rbar,
        "modular_data": modular,
        "verlinde": verl,
        "pass": ok,
    }


def _symmetric_matrices(max_dim: int, bound: int = 4, max_det: int = 8):
    for n in range(1, max_dim + 1):
        idx = [(i, j) for i in range(n) for j in range(i, n)]
        for vals in itertools.product(range(-bound, bound + 1), repeat=len(idx)):
            B = [[0] * n for _ in range(n)]
            for (i, j), v in zip(idx, vals):
                B[i][j] = B[j][i] = v
            d = plumbing.determinant(B)
            if d != 0 and abs(d) <= max_det:
                yield B


def check_gauss(args) -> dict:
    rs = [args.r] if args.r is not None else [4, 6, 8, 10, 12, 14, 16]
    max_dim = args.max_dim or 2
    failures, count = [], 0
    for r in rs:
        for B in _symmetric_matrices(max_dim):
            n = len(B)
            for p in ([0] * n, [1] * n, list(range(1, n + 1))):
                rep = compare.gauss_reciprocity_check(B, p, r)
                count += 1
                if not rep["pass"]:
                    failures.append({"B": B, "p": p, "r": r, "abs_error": rep["abs_error"]})
    return {"cases": count, "failures": failures, "pass": not failures}


def _check_graphs(args) -> list[tuple[str, plumbing.PlumbingGraph]]:
    if args is not None and args.graph is not None:
        return [(args.graph, _graph(args))]
    return None


def check_sltwo_osp(args) -> dict:
    graphs = _check_graphs(args) or [(n, compare.corpus_graph(n)) for n in ("lens5", "chain23", "chain322", "star2223")]
    order = int(args.order) if args is not None and args.order is not None else 50
    reports = []
    for name, g in graphs:
        for label in plumbing.enumerate_spin_spinc(g.B).spinc_labels:
            rep = compare.sltwo_osp_relation_check(g, label, order)
            reports.append({"graph": name, "label": rep["label"], "constant": rep["constant"], "pass": rep["pass"]})
    return {"order": order, "reports": reports, "pass": all(x["pass"] for x in reports)}


def check_factorization(args) -> dict:
    graphs = _check_graphs(args) or [(n, compare.corpus_graph(n)) for n in ("lens5", "chain23", "chain322", "star2235")]
    rs = [args.r] if args is not None and args.r is not None else [6, 7, 9, 10]
    reports = []
    for r in rs:
        params = qarith.root_params(r)
        for name, g in graphs:
            oms = _omegas(args, params, g) if args is not None and args.omega else compare.generic_omegas(params, g)[:2]
            for om in oms:
                rep = compare.factorization_check(params, g, om)
                reports.append({
                    "graph": name,
                    "r": r,
                    "omega": om.to_json_obj(),
                    "abs_error": rep["abs_error"],
                    "simplified_A": rep.get("simplified_A"),
                    "pass": rep["pass"],
                })
    return {"reports": reports, "pass": bool(reports) and all(x["pass"] for x in reports)}


def check_cgp_vs_zhat(args) -> dict:
    graphs = _check_graphs(args) or [(n, compare.corpus_graph(n)) for n in ("lens5", "chain23")]
    rs = [args.r] if args is not None and args.r is not None else [7, 9, 6, 10]
    strategy = args.strategy if args is not None else "abel"
    tol = args.tolerance if args is not None and args.tolerance is not None else 1e-5
    reports = []
    for r in rs:
        params = qarith.root_params(r)
        for name, g in graphs:
            oms = _omegas(args, params, g) if args is not None and args.omega else compare.generic_omegas(params, g)[:2]
            for om in oms:
                rep = compare.cgp_vs_zhat_check(params, g, om, strategy=strategy, tolerance=tol)
                rep["graph"] = name
                reports.append(rep)
    return {"reports": reports, "pass": bool(reports) and all(x["pass"] for x in reports)}


def check_representation(args) -> dict:
    """Relations, braiding linearity, hexagons, qdim, twists on random typical Vermas."""
    rs = [args.r] if args is not None and args.r is not None else [5, 6, 7, 8, 9, 10, 16]
    rng = random.Random(2024)
    per_r = {}
    for r in rs:
        p = qarith.root_params(r)
        lams = repcat.random_typical_weights(p, 5, rng)
        ctx = repcat.context_for(p, lams + [sum(lams[:3])], extra=[2 * r])
        mods = [repcat.verma(p, lam, 0, ctx) for lam in lams]
        per_r[str(r)] = {
            "weights": [_frac(x) for x in lams],
            "relations": all(repcat.check_relations(m) for m in mods),
            "braiding_linear": all(repcat.naturality_check(mods[i], mods[(i + 1) % 5]) for i in range(5)),
            "hexagons": all(repcat.hexagon_check(mods[0], mods[1], mods[2])),
            "qdim_zero": all(repcat.quantum_dimension(m, p.rbar).is_zero() for m in mods),
            "twist": all(repcat.twist_matrix(m).scalar_value() == repcat.twist_value(p, lam, ctx) for m, lam in zip(mods, lams)),
            "ribbon": repcat.ribbon_check(p),
        }
    ribbon_12 = repcat.ribbon_check(qarith.root_params(12))
    ok = all(all(v for k, v in d.items() if k != "weights") for d in per_r.values()) and not ribbon_12
    return {"per_r": per_r, "ribbon_r12": ribbon_12, "pass": ok}


FSERIES_GRAPHS = ("s3", "lens5", "chain23", "chain322", "star2223")


def check_fseries(args) -> dict:
    L = int(args.order) if args is not None and args.order is not None else 20
    reports = {}
    for name in FSERIES_GRAPHS:
        g = compare.corpus_graph(name)
        parity = all(zhat.parity_support_holds(zhat.FCoefficientTable.for_graph(g, a), L) for a in ("sl2", "osp"))
        reports[name] = {"parity": parity, "plus_minus": zhat.plus_minus_relation_holds(g.degrees, L)}
    return {"box": L, "reports": reports, "pass": all(all(v.values()) for v in reports.values())}


S3_EXPECTED = {
    "sl2": {"delta": "-1/2", "coeffs": [["0/1", "-2/1"], ["1/1", "2/1"]]},
    "osp": {"delta": "-1/2", "coeffs": [["0/1", "2/1"], ["1/1", "2/1"]]},
}


def check_s3_examples(args=None) -> dict:
    g = compare.corpus_graph("s3")
    label = plumbing.enumerate_spin_spinc(g.B).spinc_labels[0]
    got = {a: zhat.zhat_series(a, g, label, Fraction(10)).to_json_obj() for a in S3_EXPECTED}
    return {"series": got, "pass": got == S3_EXPECTED}


def check_negative(args=None) -> dict:
    """r = 3 mod 8 is refused; the r = 0 mod 8 diagnostic exhibits its lift-dependent term."""
    g = compare.corpus_graph("chain23")
    p11 = qarith.root_params(11)
    try:
        compare.cgp_vs_zhat_check(p11, g, compare.generic_omegas(p11, g)[0])
        refusal = None
    except compare.FamilyNotCoveredError as exc:
        refusal = str(exc)
    p8 = qarith.root_params(8)
    diag = compare.zero_mod_eight_diagnostic(p8, g, compare.generic_omegas(p8, g)[0])
    ok = refusal is not None and diag["factorization_holds"] and diag["non_topological"]
    return {"refusal_r11": refusal, "zero_mod_eight": diag, "pass": ok}


def check_all(args) -> dict:
    parts = {
        "identities": check_identities(),
        "representation": check_representation(None),
        "fseries": check_fseries(None),
        "s3-examples": check_s3_examples(),
        "negative-controls": check_negative(),
        "gauss": check_gauss(argparse.Namespace(r=None, max_dim=2)),
        "sltwo-osp": check_sltwo_osp(None),
        "factorization": check_factorization(None),
        "cgp-vs-zhat": check_cgp_vs_zhat(None),
    }
    return {"checks": {k: v["pass"] for k, v in parts.items()}, "details": parts, "pass": all(v["pass"] for v in parts.values())}


CHECKS = {
    "identities": check_identities,
    "gauss": check_gauss,
    "sltwo-osp": check_sltwo_osp,
    "factorization": check_factorization,
    "representation": check_representation,
    "fseries": check_fseries,
    "s3-examples": check_s3_examples,
    "negative-controls": check_negative,
    "cgp-vs-zhat": check_cgp_vs_zhat,
    "all": check_all,
}


def cmd_check(args) -> tuple[dict, bool]:
    rep = CHECKS[args.name](args)
    return {"check": args.name, **rep}, rep["pass"]


# ---------------------------------------------------------------------------
# Entry point


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--r", type=int)
    common.add_argument("--graph")
    common.add_argument("--omega")
    common.add_argument("--order")
    common.add_argument("--algebra", choices=["sl2", "osp"], default="osp")
    common.add_argument("--strategy", choices=["abel", "gauss"], default="abel")
    common.add_argument("--backend", choices=["exact", "float"], default="exact")
    common.add_argument("--tolerance", type=float)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--output")
    common.add_argument("--max-dim", type=int, dest="max_dim")
    common.add_argument("--spinc", type=int, help="index into the Spin^c labels")

    parser = _Parser(prog="qtop", description="Quantum invariants of plumbed 3-manifolds at roots of unity.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.add_parser("repdata", parents=[common], help="root data, Delta+-, zeta, I_r")
    sub.add_parser("zhat", parents=[common], help="Zhat series per Spin^c label")
    sub.add_parser("cgp", parents=[common], help="CGP invariant N_r(M, omega)")
    p = sub.add_parser("verlinde", parents=[common], help="Verlinde values or limits")
    p.add_argument("--genus", type=int, default=2)
    p.add_argument("--lambda", dest="lambda_bar")
    p.add_argument("--marked", help='JSON list of [mu, parity] pairs')
    p = sub.add_parser("check", parents=[common], help="run a named verification")
    p.add_argument("name", choices=sorted(CHECKS))
    return parser


COMMANDS = {"repdata": cmd_repdata, "zhat": cmd_zhat, "cgp": cmd_cgp, "verlinde": cmd_verlinde, "check": cmd_check}


def run(argv: list[str] | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required")
        payload, ok = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InputError, plumbing.GraphError, cgp.OmegaFormatError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MATH_ERRORS as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_MATH
    text = json.dumps(payload, sort_keys=True, indent=2)
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text, file=stdout)
    return 0 if ok else EXIT_CHECK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
