import numpy as np
import pytest
from hypothesis import given, strategies as st

from ctxcomm.errors import ValidationError
from ctxcomm.graph import WeightedGraph
from ctxcomm.quantum import (EXACT_MODE, Realization, born, check_density, maximally_mixed, noisy_state,
                             orthogonality_graph, orthonormal_completion, projector, pure_state, random_state,
                             same_ray, si_certificate, split_projector, verify_realization, witness_value)
from ctxcomm.witnesses import kcbs_cycle

seeds = st.integers(0, 2**32 - 1)


def test_basis_realizations():
    eye = np.eye(3)
    assert verify_realization(Realization(eye, WeightedGraph.complete(3)))
    bad = verify_realization(Realization(eye, WeightedGraph(3, frozenset()), EXACT_MODE))
    assert not bad and len(bad.orthogonal_non_edges) == 3


def test_kcbs_realization_passes():
    assert verify_realization(kcbs_cycle(5).realization)


def test_realization_shape_errors():
    with pytest.raises(ValidationError):
        Realization(np.eye(3), WeightedGraph.complete(4))
    with pytest.raises(ValidationError):
        Realization(np.eye(3), WeightedGraph.complete(3), "nonsense")


def test_maximally_mixed_witness_value():
    w = kcbs_cycle(5)
    assert witness_value(w.vectors, w.graph.weights, maximally_mixed(3)) == pytest.approx(5 / 3, abs=1e-12)


def test_kcbs_not_state_independent():
    w = kcbs_cycle(5)
    assert si_certificate(w.vectors, w.graph.weights) == pytest.approx(1.382, abs=1e-3)


def test_born_examples():
    e0, e1 = projector([1, 0, 0]), projector([0, 1, 0])
    assert born(e0, e0) == 1.0
    assert born(e0, e1) == 0.0
    assert born(maximally_mixed(3), pure_state([1, 1, 1])) == pytest.approx(1 / 3)
    with pytest.raises(ValidationError):
        born(e0, 2 * e0)


def test_noise_endpoints():
    rho = pure_state([1, 2j, 0])
    assert np.allclose(noisy_state(rho, 1.0), rho)
    assert np.allclose(noisy_state(rho, 0.0), maximally_mixed(3))
    with pytest.raises(ValidationError):
        noisy_state(rho, 1.5)


def test_check_density_rejects():
    with pytest.raises(ValidationError):
        check_density(np.diag([1.5, -0.5]))
    with pytest.raises(ValidationError):
        check_density(np.eye(2))


def test_split_projector_examples():
    p = pure_state([1, 1j, 0])
    parts = split_projector(p)
    assert len(parts) == 1 and np.allclose(parts[0], p)
    parts = split_projector(np.eye(2))
    assert len(parts) == 2 and np.allclose(parts[0] @ parts[1], 0)
    with pytest.raises(ValidationError):
        split_projector(np.diag([0.5, 1]))


@given(seeds, st.floats(0, 1))
def test_noisy_state_is_a_state(seed, mu):
    rho = random_state(3, np.random.default_rng(seed))
    out = noisy_state(rho, mu)
    check_density(out)
    assert abs(np.trace(out) - 1) < 1e-12


@given(seeds, st.integers(1, 4))
def test_split_projector_reconstructs(seed, rank):
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.normal(size=(5, rank)) + 1j * rng.normal(size=(5, rank)))
    P = q @ q.conj().T
    parts = split_projector(P)
    assert len(parts) == rank
    assert np.max(np.abs(sum(parts) - P)) < 1e-12
    for i, a in enumerate(parts):
        assert np.max(np.abs(a @ a - a)) < 1e-12
        for b in parts[i + 1:]:
            assert np.max(np.abs(a @ b)) < 1e-12


@given(seeds, st.integers(1, 4))
def test_orthonormal_completion(seed, r):
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.normal(size=(5, r)) + 1j * rng.normal(size=(5, r)))
    comp = orthonormal_completion(q.T)
    assert comp.shape == (5 - r, 5)
    full = np.vstack([q.T, comp])
    assert np.allclose(full @ full.conj().T, np.eye(5), atol=1e-10)
    assert np.allclose(orthonormal_completion(q.T), comp)


@given(seeds)
def test_witness_value_bounded_by_spectrum(seed):
    w = kcbs_cycle(5)
    rho = random_state(3, np.random.default_rng(seed))
    val = witness_value(w.vectors, w.graph.weights, rho)
    assert si_certificate(w.vectors, w.graph.weights) - 1e-12 <= val <= np.sqrt(5) + 1e-12


@given(seeds)
def test_same_ray_ignores_phase(seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=3) + 1j * rng.normal(size=3)
    v /= np.linalg.norm(v)
    assert same_ray(v, np.exp(1j * rng.uniform(0, 6.28)) * v)


def test_orthogonality_graph_of_basis():
    g = orthogonality_graph(np.eye(3))
    assert g.edges == WeightedGraph.complete(3).edges
