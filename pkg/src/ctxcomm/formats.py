"""File formats: graph JSON, DIMACS-like edge lists, vector sets, task bundles and reports.

Graph JSON::

    {"n": 5, "edges": [[1, 2], [2, 3]], "weights": ["1", "1/2", ...]}

Vertices are 1-based in every file format.  Vector entries may be numbers,
``[re, im]`` pairs, or symbolic strings such as ``"1/sqrt(5)"`` and
``"cos(pi/5)"`` evaluated by a restricted expression evaluator.
"""

from __future__ import annotations

import ast
import json
import math
import operator
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .graph import WeightedGraph, as_fraction
from .quantum import ADJACENCY_MODE, Realization
from .task import ExtendedWitness, Task, task_from_graph
from .witnesses import NamedWitness

TASK_SCHEMA = "ctxcomm.task/1"
REPORT_SCHEMA = "ctxcomm.report/1"

# -- rationals ---------------------------------------------------------------


def rat(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def num(x) -> dict:
    """Exact rationals carry both renderings; floats carry the value and a 6-decimal string."""
    if isinstance(x, (Fraction, int)) and not isinstance(x, bool):
        return {"rational": rat(x), "decimal": f"{float(x):.6f}"}
    return {"float": float(x), "decimal": f"{float(x):.6f}"}


# -- symbolic scalars --------------------------------------------------------

_FUNCS = {"sqrt": math.sqrt, "cos": math.cos, "sin": math.sin, "tan": math.tan,
          "exp": math.exp, "log": math.log, "acos": math.acos, "asin": math.asin, "atan": math.atan}
_CONSTS = {"pi": math.pi, "e": math.e}
_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}


def eval_scalar(expr) -> float:
    """Evaluate a number or a restricted arithmetic expression string."""
    if isinstance(expr, (int, float)) and not isinstance(expr, bool):
        return float(expr)
    if not isinstance(expr, str):
        raise ValidationError(f"not a scalar: {expr!r}")
    try:
        tree = ast.parse(expr.strip(), mode="eval")
    except SyntaxError as exc:
        raise ValidationError(f"cannot parse {expr!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in _CONSTS:
            return _CONSTS[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](ev(node.operand))
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS
                and len(node.args) == 1 and not node.keywords):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ValidationError(f"unsupported expression in {expr!r}")

    try:
        return float(ev(tree))
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise ValidationError(f"cannot evaluate {expr!r}: {exc}") from exc


def _entry(e) -> complex:
    if isinstance(e, list):
        if len(e) != 2:
            raise ValidationError(f"complex entry must be [re, im], got {e!r}")
        return complex(eval_scalar(e[0]), eval_scalar(e[1]))
    return complex(eval_scalar(e))


# -- graphs ------------------------------------------------------------------


def graph_to_json(g: WeightedGraph) -> dict:
    return {"n": g.n, "edges": [[a + 1, b + 1] for a, b in sorted(g.edges)],
            "weights": [rat(w) for w in g.weights]}


def graph_from_json(obj: dict) -> WeightedGraph:
    try:
        n = obj["n"]
        edges = obj.get("edges", [])
    except (TypeError, KeyError) as exc:
        raise ValidationError("graph JSON needs 'n' and 'edges'") from exc
    if not isinstance(n, int) or n < 0:
        raise ValidationError(f"bad vertex count {n!r}")
    pairs = []
    for e in edges:
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(v, int) for v in e)):
            raise ValidationError(f"bad edge {e!r}")
        a, b = e
        if not (1 <= a <= n and 1 <= b <= n):
            raise ValidationError(f"edge {e} outside 1..{n}")
        pairs.append((a - 1, b - 1))
    weights = obj.get("weights")
    return WeightedGraph.from_edges(n, pairs, [as_fraction(w) for w in weights] if weights else None)


def parse_dimacs(text: str) -> WeightedGraph:
    """``p <kind> n m`` header, ``e i j`` edges, optional ``w i p/q`` weights, ``c`` comments."""
    n, edges, weights = None, [], {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split()
        if not parts or parts[0] == "c":
            continue
        tag = parts[0]
        try:
            if tag == "p":
                n = int(parts[2])
            elif tag == "e":
                edges.append((int(parts[1]) - 1, int(parts[2]) - 1))
            elif tag == "w":
                weights[int(parts[1]) - 1] = as_fraction(parts[2])
            else:
                raise ValidationError(f"line {lineno}: unknown record {tag!r}")
        except (IndexError, ValueError) as exc:
            raise ValidationError(f"line {lineno}: malformed {raw!r}") from exc
    if n is None:
        raise ValidationError("missing 'p' header")
    for a, b in edges:
        if not (0 <= a < n and 0 <= b < n):
            raise ValidationError(f"edge ({a + 1}, {b + 1}) outside 1..{n}")
    w = [weights.get(i, Fraction(1)) for i in range(n)] if weights else None
    return WeightedGraph.from_edges(n, edges, w)


def to_dimacs(g: WeightedGraph) -> str:
    lines = [f"p edge {g.n} {len(g.edges)}"]
    lines += [f"e {a + 1} {b + 1}" for a, b in sorted(g.edges)]
    lines += [f"w {i + 1} {rat(w)}" for i, w in enumerate(g.weights) if w != 1]
    return "\n".join(lines) + "\n"


def load_graph(path: str | Path) -> WeightedGraph:
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return graph_from_json(_loads(text))
    return parse_dimacs(text)


# -- vectors -----------------------------------------------------------------


def vectors_to_json(vecs: np.ndarray) -> dict:
    vecs = np.asarray(vecs, dtype=complex)
    return {"d": int(vecs.shape[1]),
            "vectors": [[[float(z.real), float(z.imag)] for z in v] for v in vecs]}


def vectors_from_json(obj: dict) -> np.ndarray:
    try:
        d, rows = obj["d"], obj["vectors"]
    except (TypeError, KeyError) as exc:
        raise ValidationError("vector-set JSON needs 'd' and 'vectors'") from exc
    out = np.array([[_entry(e) for e in row] for row in rows], dtype=complex).reshape(len(rows), -1)
    if len(rows) and out.shape[1] != d:
        raise ValidationError(f"vectors have length {out.shape[1]}, declared d={d}")
    return out


# -- tasks -------------------------------------------------------------------


def task_to_json(task: Task, ew: ExtendedWitness | None = None, rho0: np.ndarray | None = None) -> dict:
    obj = {"schema": TASK_SCHEMA, "name": task.name, "n": task.n, "k": task.k, "d": task.d,
           "normalization": task.normalization, "N": rat(task.N),
           "graph": graph_to_json(task.graph), "weights": [rat(w) for w in task.weights]}
    if ew is not None:
        obj["witness"] = ew.base.name
        obj["vectors"] = vectors_to_json(ew.vectors)
        state = rho0 if rho0 is not None else ew.base.optimal_state
        if state is not None:
            obj["rho0"] = [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(state)]
    return obj


def task_from_json(obj: dict) -> tuple[Task, ExtendedWitness | None]:
    if obj.get("schema") != TASK_SCHEMA:
        raise ValidationError(f"unsupported task schema {obj.get('schema')!r}")
    g = graph_from_json(obj["graph"])
    n, d = obj["n"], obj["d"]
    task = task_from_graph(n, d, g, [as_fraction(w) for w in obj["weights"]],
                           obj.get("normalization", "weighted"), obj.get("name", ""))
    if rat(task.N) != obj["N"]:
        raise ValidationError(f"stored N={obj['N']} disagrees with recomputed {rat(task.N)}")
    ew = None
    if "vectors" in obj:
        vecs = vectors_from_json(obj["vectors"])
        if vecs.shape != (g.n, d):
            raise ValidationError(f"expected {g.n} vectors of dimension {d}")
        base_graph = g.induced(list(range(n)))
        state = None
        if "rho0" in obj:
            state = np.array([[_entry(e) for e in row] for row in obj["rho0"]], dtype=complex)
        base = NamedWitness(obj.get("witness", obj.get("name", "")), base_graph,
                            Realization(vecs[:n], base_graph, ADJACENCY_MODE), state)
        ew = ExtendedWitness(base, vecs, g, d, (), obj.get("name") or None)
    return task, ew


def load_task(path: str | Path) -> tuple[Task, ExtendedWitness | None]:
    return task_from_json(_loads(Path(path).read_text()))


# -- canonical JSON ----------------------------------------------------------


def _loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc}") from exc


def dumps(obj) -> str:
    """Canonical serialization: sorted keys, 2-space indent, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=True, allow_nan=False) + "\n"


def roundtrip(text: str) -> str:
    return dumps(_loads(text))
