from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ctxcomm.errors import ValidationError
from ctxcomm.graph import WeightedGraph, uncovered_by_cliques
from ctxcomm.task import (UNDEFINED, VERTEX_COUNT_N, build_task, extend, extend_preset, preset_names,
                          task_from_graph)
from ctxcomm.witnesses import get_witness, kcbs_cycle


@pytest.mark.parametrize("preset,k,degrees,N", [
    ("kcbs-k3", 3, {4: 1, 3: 4, 2: 3}, 35),
    ("kcbs-k4", 4, {4: 1, 3: 4, 2: 4}, 38),
    ("c7-k4", 4, {4: 1, 3: 6, 2: 4}, 48),
    ("ceg18-k0", 0, {6: 18}, 144),
])
def test_preset_profiles(preset, k, degrees, N):
    ew = extend_preset(preset)
    assert ew.k == k
    assert Counter(ew.extended_graph.degrees()) == degrees
    task = build_task(ew)
    assert task.N == N
    assert task.coefficient_total == 1


def test_yo13_normalizations():
    ew = extend_preset("yo13-k12")
    assert ew.k == 12
    assert build_task(ew).N == 132
    t = build_task(ew, VERTEX_COUNT_N)
    assert t.N == 134
    assert t.coefficient_total == 1 - Fraction(2, 134)


def test_every_preset_covers_cliques():
    for name in preset_names():
        ew = extend_preset(name)
        assert uncovered_by_cliques(ew.extended_graph, ew.d) == []
        assert ew.extended_graph.induced(list(range(ew.n))).edges == ew.base.graph.edges


def test_table_layout():
    task = build_task(extend_preset("kcbs-k3"))
    assert task.f.shape == (9, 8)
    assert list(task.f[0, :5]) == [0] * 5 and list(task.f[0, 5:]) == [UNDEFINED] * 3
    assert task.f[1, 0] == 0 and task.f[1, 1] == 1 and task.f[1, 2] == UNDEFINED
    with pytest.raises(ValueError):
        task.f[0, 0] = 1


def test_greedy_extension_is_deterministic():
    a = extend(kcbs_cycle(5), 3)
    b = extend(kcbs_cycle(5), 3)
    assert a.completed_cliques == b.completed_cliques
    assert np.allclose(a.vectors, b.vectors)


def test_errors():
    with pytest.raises(ValidationError):
        extend_preset("nope")
    with pytest.raises(ValidationError):
        extend(kcbs_cycle(5), 4)
    with pytest.raises(ValidationError):
        extend(kcbs_cycle(5), 3, [(0, 2)])
    with pytest.raises(ValidationError):
        build_task(extend_preset("kcbs-k3"), "other")
    with pytest.raises(ValidationError):
        task_from_graph(3, 2, WeightedGraph.complete(2), [1, 1, 1])


@st.composite
def extended_tasks(draw):
    n = draw(st.integers(1, 5))
    k = draw(st.integers(0, 3))
    m = n + k
    pairs = [(a, b) for a in range(m) for b in range(a + 1, m)]
    edges = [p for p in pairs if draw(st.booleans())]
    w = draw(st.lists(st.fractions(0, 2, max_denominator=3), min_size=n, max_size=n))
    return task_from_graph(n, 2, WeightedGraph.from_edges(m, edges), w)


@given(extended_tasks())
def test_coefficients_sum_to_one(task):
    assert task.coefficient_total == 1
    defined = task.f != UNDEFINED
    t = np.array([[float(v) for v in r] for r in task.t])
    assert np.all((t > 0) <= defined)
    assert defined.sum() == task.n + task.k + task.sum_neighbors + task.n


@given(extended_tasks())
def test_vertex_count_shortfall(task):
    other = task_from_graph(task.n, task.d, task.graph, task.weights, VERTEX_COUNT_N)
    assert other.coefficient_total == 1 - (task.n - sum(task.weights, Fraction(0))) / other.N
