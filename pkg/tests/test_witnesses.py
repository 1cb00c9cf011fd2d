import math
from fractions import Fraction

import numpy as np
import pytest

from ctxcomm.errors import ResourceCapExceeded, ValidationError
from ctxcomm.graph import independence_number
from ctxcomm.quantum import projector, si_certificate, verify_realization, weighted_projector_sum, witness_value
from ctxcomm.witnesses import get_witness, hadamard_graph, kcbs_cycle, newman, witness_names


@pytest.mark.parametrize("n", [5, 7, 9])
def test_kcbs_handle_value(n):
    w = kcbs_cycle(n)
    c = math.cos(math.pi / n)
    assert witness_value(w.vectors, w.graph.weights, w.optimal_state) == pytest.approx(n * c / (1 + c), abs=1e-12)
    assert verify_realization(w.realization)
    assert independence_number(w.graph) == (n - 1) // 2


def test_kcbs_rejects_even():
    with pytest.raises(ValidationError):
        kcbs_cycle(6)


def test_ceg18_is_state_independent():
    w = get_witness("ceg18")
    assert np.allclose(weighted_projector_sum(w.vectors, w.graph.weights), 4.5 * np.eye(4), atol=1e-12)
    assert sum(w.graph.degrees()) == 108
    assert w.state_independent


def test_yo13():
    w = get_witness("yo13")
    assert sum(w.graph.weights) == Fraction(11)
    assert independence_number(w.graph) == Fraction(7, 2)
    assert si_certificate(w.vectors, w.graph.weights) == pytest.approx(11 / 3, abs=1e-12)
    assert sum(w.graph.degrees()) == 48
    assert verify_realization(w.realization)
    assert get_witness("yo13-unit").graph.weights == (1,) * 13


def test_newman_projector_sum_is_scaled_identity():
    w = newman(8)
    assert w.n == 64
    assert np.allclose(weighted_projector_sum(w.vectors, w.graph.weights), 8 * np.eye(8), atol=1e-12)
    assert len(set(w.graph.degrees())) == 1
    assert verify_realization(w.realization)


def test_newman_hadamard_relation_d4():
    assert independence_number(newman(4).graph) * 4 == independence_number(hadamard_graph(4))


def test_newman_caps():
    with pytest.raises(ValidationError):
        newman(6)
    with pytest.raises(ResourceCapExceeded):
        newman(20)
    with pytest.raises(ResourceCapExceeded):
        hadamard_graph(16)


def test_peres33():
    w = get_witness("peres33")
    assert w.n == 33 and w.d == 3
    assert verify_realization(w.realization)


def test_registry():
    assert {"kcbs5", "ceg18", "yo13", "peres33", "newman8"} <= set(witness_names())
    with pytest.raises(ValidationError, match="available"):
        get_witness("nope")


@pytest.mark.parametrize("name", ["kcbs5", "kcbs7", "ceg18", "yo13", "peres33", "newman4"])
def test_every_witness_realizes_its_graph(name):
    w = get_witness(name)
    assert verify_realization(w.realization)
    if w.optimal_state is not None:
        assert np.allclose(w.optimal_state, projector(np.linalg.eigh(w.optimal_state)[1][:, -1]))
