"""Command-line interface.

Exit codes: 0 success, 2 validation error, 3 resource cap, 4 internal invariant breach.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

import numpy as np

from . import bounds, crypto, formats, graph, randomness, report, simulate, task as taskmod, witnesses
from .errors import CtxCommError, InvariantBreach, ValidationError
from .formats import num, rat


# -- helpers -----------------------------------------------------------------


def _emit(args, obj, rows: list[dict] | None = None) -> None:
    """JSON by default; ``--format csv`` writes ``rows`` (or flattened ``obj``)."""
    out = sys.stdout
    if args.format == "csv":
        rows = rows if rows is not None else [_flatten(obj)]
        if rows:
            writer = csv.DictWriter(out, fieldnames=list(rows[0]), lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
        return
    out.write(formats.dumps(obj))


def _flatten(obj, prefix: str = "") -> dict:
    flat = {}
    if isinstance(obj, dict):
        for k, v in obj.items():
            flat.update(_flatten(v, f"{prefix}{k}."))
    elif isinstance(obj, list):
        flat[prefix[:-1]] = " ".join(map(str, obj))
    else:
        flat[prefix[:-1]] = obj
    return flat


def _write(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _rounds(text: str) -> int:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if value < 1 or value != int(value):
        raise argparse.ArgumentTypeError(f"rounds must be a positive integer, got {text!r}")
    return int(value)


def _load_task(path: str):
    task, ew = formats.load_task(path)
    if ew is None:
        raise ValidationError("task file carries no vectors; rebuild it with `task build`")
    return task, ew


def _graph_from_args(args) -> tuple[graph.WeightedGraph, witnesses.NamedWitness | None]:
    if getattr(args, "graph", None):
        return formats.load_graph(args.graph), None
    if getattr(args, "witness", None):
        w = witnesses.get_witness(args.witness)
        return w.graph, w
    raise ValidationError("give --graph FILE or --witness NAME")


# -- commands ----------------------------------------------------------------


def cmd_witness(args) -> None:
    if args.action == "list":
        rows = []
        for name in witnesses.witness_names():
            w = witnesses.get_witness(name)
            rows.append({"name": name, "n": w.n, "d": w.d, "edges": len(w.graph.edges),
                         "state_independent": w.state_independent})
        _emit(args, {"witnesses": rows}, rows)
        return
    if not args.name:
        raise ValidationError("witness export needs a NAME")
    w = witnesses.get_witness(args.name)
    obj = {"name": w.name, "graph": formats.graph_to_json(w.graph),
           "vectors": formats.vectors_to_json(w.vectors), "mode": w.realization.mode}
    if args.dimacs:
        _write(args.out, formats.to_dimacs(w.graph))
    else:
        _write(args.out, formats.dumps(obj))


def cmd_graph(args) -> None:
    g, _ = _graph_from_args(args)
    alpha, mwis = graph.max_weight_independent_set(g)
    out = {"n": g.n, "edges": len(g.edges), "alpha": num(alpha),
           "independent_set": [v + 1 for v in mwis], "omega": graph.clique_number(g),
           "chi": graph.chromatic_number(g), "chi_f": num(graph.fractional_chromatic(g))}
    if args.d:
        delta, col = graph.min_improper(g, args.d)
        out["delta"] = {"d": args.d, "value": delta, "coloring": list(col.assignment)}
    _emit(args, out)


def cmd_task(args) -> None:
    if args.preset:
        ew = taskmod.extend_preset(args.preset, witnesses.get_witness(args.witness) if args.witness else None)
    elif args.witness:
        w = witnesses.get_witness(args.witness)
        ew = taskmod.extend(w, args.d or w.d)
    else:
        raise ValidationError("give --witness NAME and/or --preset NAME")
    t = taskmod.build_task(ew, args.normalization)
    _write(args.out, formats.dumps(formats.task_to_json(t, ew)))


def _bounds_report(t, ew, args) -> dict:
    alpha, delta = bounds.task_alpha_delta(t)
    sc = bounds.classical_bound(t, alpha, delta)
    sb = bounds.s_beta(ew, t)
    qs = bounds.canonical_strategy(ew)
    cert = bounds.certify(t, qs, args.tolerance, alpha=alpha)
    out = {"schema": formats.REPORT_SCHEMA, "task": t.name, "n": t.n, "k": t.k, "d": t.d,
           "N": num(t.N), "alpha": num(alpha), "delta": delta, "S_c": num(sc),
           "S_beta": num(sb.value), "beta": num(sb.beta), "lambda_min": num(sb.lambda_min),
           "quantum_value_canonical": num(bounds.quantum_value(t, qs)),
           "certification": {"certified": cert.certified, "reasons": cert.reasons,
                             "witness_value": cert.witness_value,
                             "exceeds_alpha": cert.witness_exceeds_alpha}}
    if args.bruteforce:
        val, strat, _ = bounds.classical_bruteforce(t)
        if val != sc:
            raise InvariantBreach(f"brute force {rat(val)} disagrees with the classical bound {rat(sc)}")
        enc = np.argmax(strat.encodings[0], axis=1)
        out["bruteforce"] = {"value": num(val), "encoding": enc.tolist()}
    return out


def cmd_bounds(args) -> None:
    t, ew = _load_task(args.task)
    _emit(args, _bounds_report(t, ew, args))


def cmd_qkd(args) -> None:
    t, ew = _load_task(args.task)
    if args.action == "analyze":
        m = crypto.task_metrics(t, ew)
        kr = crypto.key_rates(m)
        out = {"P_s": num(kr.P_s), "P_0": num(kr.P_0), "P_1": num(kr.P_1), "E": num(kr.E),
               "rate": num(kr.rate), "secure_rate": num(kr.secure_rate),
               "secure_rate_table": num(kr.secure_rate_table),
               "S_c": num(m.S_c), "S_beta": num(m.S_beta), "mu": args.mu,
               "noisy_value": num(crypto.noisy_value(m, args.mu))}
        if m.S_beta > float(m.S_c):
            out["mu_c"] = num(crypto.mu_critical(m))
            out["advantage"] = crypto.noisy_value(m, args.mu) > float(m.S_c)
        _emit(args, out)
        return
    s = simulate.qkd_session(t, bounds.canonical_strategy(ew), args.rounds, args.test_fraction,
                             args.seed, args.mu)
    if args.log:
        Path(args.log).write_bytes(s.log.to_bytes())
    _emit(args, {"rounds": args.rounds, "seed": args.seed, "mu": args.mu,
                 "test_rounds": int(len(s.test_rounds)), "estimate": s.estimate.value,
                 "stderr": s.estimate.stderr, "threshold": s.threshold, "aborted": s.aborted,
                 "key_bits": int(len(s.alice_key)), "agreement": s.agreement,
                 "raw_key_fraction": s.raw_key_fraction, "empirical_key_rate": s.empirical_key_rate})


def cmd_simulate(args) -> None:
    t, ew = _load_task(args.task)
    if args.strategy == "canonical":
        qs = bounds.canonical_strategy(ew)
        if args.mu != 1.0:
            qs = qs.with_noise(args.mu)
        est, log = simulate.simulate_quantum(t, qs, args.rounds, args.seed)
        exact = bounds.quantum_value(t, qs)
    else:
        val, cs, _ = bounds.classical_bruteforce(t)
        est, log = simulate.simulate_classical(t, cs, args.rounds, args.seed)
        exact = float(val)
    if args.log:
        Path(args.log).write_bytes(log.to_bytes())
    _emit(args, {"strategy": args.strategy, "rounds": args.rounds, "seed": args.seed,
                 "estimate": est.value, "stderr": est.stderr, "exact": exact,
                 "within_3sigma": est.within(exact), "covered": est.covered})


def cmd_randomness(args) -> None:
    t, ew = _load_task(args.task)
    curve = randomness.randomness_curve(t, ew, args.points, args.y_range, args.restarts,
                                        args.seed, threads=args.threads)
    rows = [{"S_o": f"{s:.9f}", "p_guess": f"{p:.9f}", "H_min": f"{h:.9f}"} for s, p, h in curve.points]
    if args.format == "json":
        _emit(args, {"label": curve.label, "y_range": curve.y_range, "restarts": curve.restarts,
                     "seed": curve.seed, "points": rows})
        return
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=["S_o", "p_guess", "H_min"], lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    sys.stdout.write(buf.getvalue())


def cmd_product(args) -> None:
    if args.variant == "newman":
        if not args.d_min:
            raise ValidationError("newman variant needs --d-min")
        value = bounds.ratio_bound_log2("newman", d_min=args.d_min)
        _emit(args, {"variant": "newman", "d": args.d_min, "log2": value, "status": "formula-level"})
        return
    g, w = _graph_from_args(args)
    d_min = args.d_min or (w.d if w else None)
    if not d_min:
        raise ValidationError("--d-min is required for a graph without a realization")
    value = bounds.ratio_bounds(g, d_min, args.m, args.variant)
    _emit(args, {"variant": args.variant, "m": args.m, "d_min": d_min, "log2": value, "ratio": 2 ** value})


def cmd_report(args) -> None:
    opts = report.ReportOptions(normalization=args.normalization, bruteforce=args.bruteforce,
                                ratio_m=args.m, tolerance=args.tolerance)
    _emit(args, report.run_report(args.witness, args.preset, opts))


def _load_state(spec: str, w: witnesses.NamedWitness) -> np.ndarray:
    d = w.d
    if spec == "mixed":
        return np.eye(d * d, dtype=complex) / (d * d)
    if spec == "optimal-product":
        if w.optimal_state is None:
            raise ValidationError(f"witness {w.name} has no stored optimal state")
        return np.kron(w.optimal_state, w.optimal_state)
    obj = formats._loads(Path(spec).read_text())
    if "psi" in obj:
        psi = np.array([formats._entry(e) for e in obj["psi"]], dtype=complex)
        return np.outer(psi, psi.conj()) / np.vdot(psi, psi).real
    if "rho" in obj:
        return np.array([[formats._entry(e) for e in row] for row in obj["rho"]], dtype=complex)
    raise ValidationError("state file needs 'psi' or 'rho'")


def cmd_monogamy(args) -> None:
    w = witnesses.get_witness(args.witness)
    rho = _load_state(args.state, w)
    alpha = graph.independence_number(w.graph)
    audit = crypto.monogamy_audit(w.realization, w.realization, w.graph.weights, rho, alpha)
    _emit(args, {"witness": w.name, "lhs": audit.lhs, "bound": audit.bound, "violated": audit.violated,
                 "note": "reported, not asserted"})


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    def global_flags(parser: argparse.ArgumentParser, top: bool) -> None:
        # on subcommands the defaults are suppressed so flags given before the verb survive
        dflt = (lambda v: v) if top else (lambda v: argparse.SUPPRESS)
        parser.add_argument("--seed", type=int, default=dflt(0))
        parser.add_argument("--threads", type=int, default=dflt(1))
        parser.add_argument("--format", choices=("json", "csv"), default=dflt(None))
        parser.add_argument("--tolerance", type=float, default=dflt(1e-9))

    common = argparse.ArgumentParser(add_help=False)
    global_flags(common, top=False)
    p = argparse.ArgumentParser(prog="ctxcomm",
                                description="Contextuality witnesses, communication tasks and SDI-QKD figures.")
    global_flags(p, top=True)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("witness", parents=[common], help="list or export built-in witnesses")
    s.add_argument("action", choices=("list", "export"))
    s.add_argument("name", nargs="?")
    s.add_argument("--out")
    s.add_argument("--dimacs", action="store_true", help="export the graph as a DIMACS edge list")
    s.set_defaults(func=cmd_witness)

    s = sub.add_parser("graph", parents=[common], help="exact graph invariants")
    s.add_argument("action", choices=("invariants",))
    s.add_argument("--graph")
    s.add_argument("--witness")
    s.add_argument("--d", type=int, help="also compute the improper-coloring defect for d colors")
    s.set_defaults(func=cmd_graph)

    s = sub.add_parser("task", parents=[common], help="build a task bundle")
    s.add_argument("action", choices=("build",))
    s.add_argument("--witness")
    s.add_argument("--preset", choices=taskmod.preset_names())
    s.add_argument("--d", type=int)
    s.add_argument("--normalization", choices=(taskmod.WEIGHTED_N, taskmod.VERTEX_COUNT_N),
                   default=taskmod.WEIGHTED_N)
    s.add_argument("--out")
    s.set_defaults(func=cmd_task)

    s = sub.add_parser("bounds", parents=[common], help="classical and quantum values of a task")
    s.add_argument("--task", required=True)
    s.add_argument("--bruteforce", action="store_true")
    s.set_defaults(func=cmd_bounds)

    s = sub.add_parser("qkd", parents=[common], help="key rates and protocol runs")
    s.add_argument("action", choices=("analyze", "run"))
    s.add_argument("--task", required=True)
    s.add_argument("--mu", type=float, default=1.0)
    s.add_argument("--rounds", type=_rounds, default=10**6)
    s.add_argument("--test-fraction", type=float, default=0.1)
    s.add_argument("--log", help="write the binary round log here")
    s.set_defaults(func=cmd_qkd)

    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo estimate of the figure of merit")
    s.add_argument("--task", required=True)
    s.add_argument("--strategy", choices=("canonical", "optimal-classical"), default="canonical")
    s.add_argument("--rounds", type=_rounds, default=10**6)
    s.add_argument("--mu", type=float, default=1.0)
    s.add_argument("--log")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("randomness", parents=[common], help="heuristic min-entropy curve")
    s.add_argument("action", choices=("curve",))
    s.add_argument("--task", required=True)
    s.add_argument("--points", type=int, default=50)
    s.add_argument("--restarts", type=int, default=4)
    s.add_argument("--y-range", choices=randomness.Y_RANGES, default="base")
    s.set_defaults(func=cmd_randomness, default_format="csv")

    s = sub.add_parser("product", parents=[common], help="communication-complexity ratio bounds")
    s.add_argument("action", choices=("ratio",))
    s.add_argument("--graph")
    s.add_argument("--witness")
    s.add_argument("--m", type=int, default=1)
    s.add_argument("--d-min", type=int)
    s.add_argument("--variant", choices=bounds.RATIO_VARIANTS, default="fractional")
    s.set_defaults(func=cmd_product)

    s = sub.add_parser("report", parents=[common], help="full analysis report for a witness")
    s.add_argument("witness")
    s.add_argument("--preset", choices=taskmod.preset_names())
    s.add_argument("--normalization", choices=(taskmod.WEIGHTED_N, taskmod.VERTEX_COUNT_N))
    s.add_argument("--bruteforce", action="store_true")
    s.add_argument("--m", type=int, default=2)
    s.set_defaults(func=cmd_report)

    s = sub.add_parser("monogamy", parents=[common], help="monogamy relation audit")
    s.add_argument("action", choices=("audit",))
    s.add_argument("--witness", required=True)
    s.add_argument("--state", required=True, help="'mixed', 'optimal-product' or a JSON file with psi/rho")
    s.set_defaults(func=cmd_monogamy)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = getattr(args, "default_format", "json")
    try:
        args.func(args)
    except CtxCommError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError, KeyError) as exc:  # unreadable or malformed input files
        print(f"error: {exc}", file=sys.stderr)
        return ValidationError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
