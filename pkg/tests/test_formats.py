import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ctxcomm.errors import ValidationError
from ctxcomm.formats import (dumps, eval_scalar, graph_from_json, graph_to_json, num, parse_dimacs, roundtrip,
                             task_from_json, task_to_json, to_dimacs, vectors_from_json, vectors_to_json)
from ctxcomm.report import run_report
from ctxcomm.task import build_task, extend_preset

from conftest import graphs


@given(graphs(weighted=True))
def test_graph_json_roundtrip(g):
    back = graph_from_json(json.loads(dumps(graph_to_json(g))))
    assert back.edges == g.edges and back.weights == g.weights


@given(graphs(weighted=True))
def test_dimacs_roundtrip(g):
    back = parse_dimacs(to_dimacs(g))
    assert back.edges == g.edges and back.weights == g.weights


def test_dimacs_parsing():
    g = parse_dimacs("c five cycle\np edge 5 5\ne 1 2\ne 2 3\ne 3 4\ne 4 5\ne 5 1\nw 2 1/2\n")
    assert g.n == 5 and len(g.edges) == 5 and g.weights[1] == Fraction(1, 2)
    for bad in ("e 1 2\n", "p edge 2 1\ne 1 3\n", "p edge 2 1\nx 1\n", "p edge 2 1\ne 1\n"):
        with pytest.raises(ValidationError):
            parse_dimacs(bad)


def test_graph_json_errors():
    for bad in ({"edges": []}, {"n": 2, "edges": [[0, 1]]}, {"n": 2, "edges": [[1, 2, 3]]}, {"n": -1}):
        with pytest.raises(ValidationError):
            graph_from_json(bad)


def test_symbolic_scalars():
    assert eval_scalar("1/sqrt(5)") == pytest.approx(1 / math.sqrt(5))
    assert eval_scalar("cos(pi/5)") == pytest.approx(math.cos(math.pi / 5))
    assert eval_scalar("-2**3") == -8
    assert eval_scalar(3) == 3.0
    for bad in ("__import__('os')", "x", "sqrt(-1)", "1/0", "open('f')", "(1).real", "True"):
        with pytest.raises(ValidationError):
            eval_scalar(bad)


def test_vectors_roundtrip():
    v = np.array([[1, 1j, 0], [0.5, -0.5, 1 + 1j]])
    assert np.allclose(vectors_from_json(vectors_to_json(v)), v)
    sym = vectors_from_json({"d": 2, "vectors": [["1/sqrt(2)", ["0", "1/sqrt(2)"]]]})
    assert np.allclose(sym, [[1 / math.sqrt(2), 1j / math.sqrt(2)]])
    with pytest.raises(ValidationError):
        vectors_from_json({"d": 3, "vectors": [[1, 0]]})


@pytest.mark.parametrize("preset", ["kcbs-k3", "ceg18-k0", "yo13-k12"])
def test_task_roundtrip(preset):
    ew = extend_preset(preset)
    task = build_task(ew)
    text = dumps(task_to_json(task, ew))
    back, ew2 = task_from_json(json.loads(text))
    assert back.N == task.N and back.t == task.t and np.array_equal(back.f, task.f)
    assert np.allclose(ew2.vectors, ew.vectors)
    assert dumps(task_to_json(back, ew2)) == text
    bad = json.loads(text)
    bad["N"] = "1"
    with pytest.raises(ValidationError):
        task_from_json(bad)


def test_num_renderings():
    assert num(Fraction(32, 35)) == {"rational": "32/35", "decimal": "0.914286"}
    assert num(0.5) == {"float": 0.5, "decimal": "0.500000"}


@given(st.fractions(-100, 100, max_denominator=1000))
def test_rational_and_decimal_agree(x):
    out = num(x)
    assert abs(float(Fraction(out["rational"])) - float(out["decimal"])) <= 5e-7


@pytest.mark.parametrize("name", ["kcbs5", "ceg18", "yo13", "newman8"])
def test_report_is_deterministic_and_canonical(name):
    a = dumps(run_report(name))
    assert dumps(run_report(name)) == a
    assert roundtrip(a) == a


def test_report_errors():
    with pytest.raises(ValidationError, match="available"):
        run_report("nope")
    with pytest.raises(ValidationError, match="task_builder"):
        run_report("kcbs5", "ceg18-k0")
