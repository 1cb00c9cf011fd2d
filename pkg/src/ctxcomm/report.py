"""Assemble the full analysis report for a witness and extension preset."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .bounds import canonical_strategy, certify, classical_bruteforce, quantum_value, ratio_bound_log2, s_beta
from .crypto import key_rates, mu_critical, table_round, task_metrics
from .errors import CtxCommError, ResourceCapExceeded, ValidationError
from .formats import REPORT_SCHEMA, num, rat
from .graph import chromatic_number, fractional_chromatic, independence_number, min_improper
from .task import PRESETS, VERTEX_COUNT_N, WEIGHTED_N, build_task, extend, extend_preset
from .witnesses import get_witness

DEFAULT_PRESETS = {"kcbs5": "kcbs-k3", "kcbs7": "c7-k4", "ceg18": "ceg18-k0", "yo13": "yo13-k12"}
DEFAULT_NORMALIZATION = {"yo13-k12": VERTEX_COUNT_N}

# witnesses for which the monogamy relation behind the secure rate is known
MONOGAMY_KNOWN = {"kcbs5", "kcbs7", "kcbs9"}

OUT_OF_SCOPE = {
    "newman_si_threshold": "formula-level only: state independence of the Newman family for d >= 1128 is not verified",
    "summary_ratio_column": "out of scope: the C/Q ratio column of the summary table is not reproduced",
    "pauli_240_4320": "out of scope: the 240- and 4320-vertex Pauli constructions are not built",
}


@dataclass
class ReportOptions:
    normalization: str | None = None
    bruteforce: bool = False
    ratio_m: int = 2
    newman_d: int = 4096
    tolerance: float = 1e-9


def _stage(name: str, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except CtxCommError as exc:
        raise type(exc)(f"[{name}] {exc}") from exc


def _mu(m, table: bool = False):
    """``mu_c``, or None when the witness gives no advantage on this task."""
    return mu_critical(m, table) if m.S_beta > float(m.S_c) else None


def _opt(x):
    return None if x is None else num(x)


def _rows(task, ew):
    m = task_metrics(task, ew)
    kr = key_rates(m)
    return m, kr, {
        "N": num(task.N),
        "S_c": num(m.S_c),
        "S_beta": num(m.S_beta),
        "mu_c": _opt(_mu(m)),
        "mu_c_table": _opt(_mu(m, table=True)),
        "key_rate": {"P_s": num(kr.P_s), "P_0": num(kr.P_0), "P_1": num(kr.P_1),
                     "E": num(kr.E), "rate": num(kr.rate)},
    }


def run_report(witness_name: str, preset: str | None = None, options: ReportOptions | None = None) -> dict:
    """Graph invariants, task, bounds and QKD figures for one witness."""
    opts = options or ReportOptions()
    w = _stage("witness_library", get_witness, witness_name)
    preset = preset if preset is not None else DEFAULT_PRESETS.get(witness_name)
    if preset is not None:
        if preset in PRESETS and PRESETS[preset][0] != witness_name:
            raise ValidationError(f"[task_builder] preset {preset!r} belongs to witness "
                                  f"{PRESETS[preset][0]!r}, not {witness_name!r}")
        ew = _stage("task_builder", extend_preset, preset, w)
    else:
        ew = _stage("task_builder", extend, w, w.d)
    norm = opts.normalization or DEFAULT_NORMALIZATION.get(preset, WEIGHTED_N)
    task = _stage("task_builder", build_task, ew, norm)
    g = w.graph

    alpha = _stage("graph_core", independence_number, g)
    chi = _stage("graph_core", chromatic_number, g)
    try:
        chi_f = _stage("graph_core", fractional_chromatic, g)
    except ResourceCapExceeded:
        chi_f = None
    delta, _ = _stage("graph_core", min_improper, task.graph, task.d)

    m, kr, core = _stage("crypto_analysis", _rows, task, ew)
    sb = s_beta(ew, task)
    qs = canonical_strategy(ew)
    cert = certify(task, qs, opts.tolerance, alpha=alpha)
    flags = []
    report = {
        "schema": REPORT_SCHEMA,
        "witness": witness_name,
        "preset": preset,
        "normalization": norm,
        "n": task.n, "k": task.k, "d": task.d,
        "alpha": num(alpha), "chi": chi, "chi_f": num(chi_f) if chi_f is not None else None,
        "delta": delta,
        "sum_neighbors": task.sum_neighbors,
        "beta": num(sb.beta),
        "lambda_min": num(sb.lambda_min),
        "state_independent": sb.lambda_min > float(alpha) + opts.tolerance,
        "quantum_value_canonical": num(quantum_value(task, qs)),
        "certified": cert.certified,
        **core,
        "secure_rate": {
            "exact": num(kr.secure_rate),
            "table": num(kr.secure_rate_table),
            "monogamy_known": witness_name in MONOGAMY_KNOWN,
        },
        "table": {key: None if val is None else table_round(val) for key, val in (
            ("S_c", m.S_c), ("S_beta", m.S_beta), ("mu_c", _mu(m, table=True)),
            ("P_s", kr.P_s), ("P_0", kr.P_0), ("P_1", kr.P_1), ("key_rate", kr.rate),
            ("r", kr.secure_rate_table))},
        "ratio_bounds_log2": _ratios(chi_f, chi, g.n, task.d, opts),
        "out_of_scope": OUT_OF_SCOPE,
        "flags": flags,
    }
    if m.S_beta <= float(m.S_c):
        flags.append("no quantum advantage on this task: S_beta <= S_c")
    if witness_name not in MONOGAMY_KNOWN:
        flags.append("secure rate shown for reference only: witness not known to satisfy a monogamy relation")
    if sum(task.weights, Fraction(0)) != task.n:
        other = WEIGHTED_N if norm == VERTEX_COUNT_N else VERTEX_COUNT_N
        alt = build_task(ew, other)
        _, _, alt_core = _rows(alt, ew)
        report["alternate_normalization"] = {"normalization": other, **alt_core}
        flags.append(f"N convention: {norm} gives N={rat(task.N)}, {other} gives N={rat(alt.N)}")
    if opts.bruteforce:
        try:
            val, _, _ = classical_bruteforce(task)
            report["bruteforce"] = {"value": num(val), "matches_bound": val == m.S_c}
        except ResourceCapExceeded as exc:
            report["bruteforce"] = {"skipped": str(exc)}
    return report


def _ratios(chi_f, chi, n, d_min, opts: ReportOptions) -> dict:
    out = {"newman_formula": {"d": opts.newman_d,
                              "log2": ratio_bound_log2("newman", d_min=opts.newman_d),
                              "status": "formula-level"}}
    if chi_f is not None:
        out["fractional"] = {str(m): ratio_bound_log2("fractional", m=m, d_min=d_min, chi_f=chi_f)
                             for m in sorted({1, opts.ratio_m})}
    m = opts.ratio_m
    if m >= 1 and not m & (m - 1) and n > 1:
        out["chromatic_remark"] = {str(m): ratio_bound_log2("chromatic-remark", m=m, d_min=d_min, chi=chi, n=n)}
    return out
