"""Dense linear algebra for rank-one realizations, witness values and noise.

States and effects are plain ``numpy`` complex arrays; :func:`check_density`
and :func:`check_effect` validate them at the API boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .graph import WeightedGraph

# tolerance hierarchy
CONSTRUCTION_TOL = 1e-10
ALGEBRA_TOL = 1e-9
TABLE_TOL = 1e-3

ADJACENCY_MODE = "adjacency-implies-orthogonal"
EXACT_MODE = "exact-orthogonality-graph"


def projector(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def fix_phase(v: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Rotate the global phase so the first nonzero entry is real positive."""
    v = np.asarray(v, dtype=complex)
    for x in v:
        if abs(x) > tol:
            return v * (abs(x) / x)
    return v


def check_density(rho: np.ndarray, tol: float = CONSTRUCTION_TOL) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValidationError(f"density matrix must be square, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValidationError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise ValidationError(f"density matrix trace {np.trace(rho).real:.3g} != 1")
    if np.linalg.eigvalsh(rho)[0] < -tol:
        raise ValidationError("density matrix is not positive semidefinite")
    return rho


def check_effect(effect: np.ndarray, tol: float = ALGEBRA_TOL) -> np.ndarray:
    effect = np.asarray(effect, dtype=complex)
    if effect.ndim != 2 or effect.shape[0] != effect.shape[1]:
        raise ValidationError("effect must be a square matrix")
    if np.max(np.abs(effect - effect.conj().T), initial=0.0) > tol:
        raise ValidationError("effect is not Hermitian")
    ev = np.linalg.eigvalsh(effect)
    if ev[0] < -tol or ev[-1] > 1 + tol:
        raise ValidationError("effect must satisfy 0 <= E <= I")
    return effect


def pure_state(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return projector(v / np.linalg.norm(v))


def maximally_mixed(d: int) -> np.ndarray:
    return np.eye(d, dtype=complex) / d


def random_state(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix (Ginibre ensemble, full rank unless ``rank`` given)."""
    k = d if rank is None else rank
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


@dataclass(frozen=True, eq=False)
class Realization:
    """Unit vectors (rank-one projectors) attached to the vertices of a graph."""

    vectors: np.ndarray
    graph: WeightedGraph
    mode: str = ADJACENCY_MODE
    d: int = field(init=False)

    def __post_init__(self):
        vecs = np.array(self.vectors, dtype=complex)
        if vecs.ndim != 2:
            raise ValidationError("vectors must be a 2-D array (one row per vertex)")
        if vecs.shape[0] != self.graph.n:
            raise ValidationError(f"{vecs.shape[0]} vectors for a {self.graph.n}-vertex graph")
        if self.mode not in (ADJACENCY_MODE, EXACT_MODE):
            raise ValidationError(f"unknown realization mode {self.mode!r}")
        vecs.setflags(write=False)
        object.__setattr__(self, "vectors", vecs)
        object.__setattr__(self, "d", vecs.shape[1])

    def projectors(self) -> np.ndarray:
        return np.einsum("ia,ib->iab", self.vectors, self.vectors.conj())

    def gram(self) -> np.ndarray:
        return self.vectors.conj() @ self.vectors.T


@dataclass
class RealizationVerdict:
    ok: bool
    bad_norms: list = field(default_factory=list)
    non_orthogonal_edges: list = field(default_factory=list)
    orthogonal_non_edges: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def verify_realization(r: Realization, tol: float = ALGEBRA_TOL) -> RealizationVerdict:
    """Check unit norms and the orthogonality pattern demanded by ``r.mode``."""
    gram = r.gram()
    n = r.graph.n
    bad_norms = [i for i in range(n) if abs(abs(gram[i, i]) - 1) > tol]
    bad_edges, extra = [], []
    for i in range(n):
        for j in range(i + 1, n):
            small = abs(gram[i, j]) <= tol
            if r.graph.has_edge(i, j):
                if not small:
                    bad_edges.append((i, j))
            elif r.mode == EXACT_MODE and small:
                extra.append((i, j))
    return RealizationVerdict(not (bad_norms or bad_edges or extra), bad_norms, bad_edges, extra)


def orthogonality_graph(vectors: np.ndarray, weights: Sequence | None = None,
                        tol: float = ALGEBRA_TOL) -> WeightedGraph:
    vecs = np.asarray(vectors, dtype=complex)
    gram = np.abs(vecs.conj() @ vecs.T)
    n = len(vecs)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if gram[i, j] <= tol]
    return WeightedGraph(n, frozenset(edges), tuple(weights) if weights is not None else ())


def weighted_projector_sum(vectors: np.ndarray, weights: Sequence) -> np.ndarray:
    """``sum_i w_i |psi_i><psi_i|`` (weights may be Fractions)."""
    vecs = np.asarray(vectors, dtype=complex)
    w = np.array([float(x) for x in weights])
    if len(w) != len(vecs):
        raise ValidationError("one weight per vector required")
    return np.einsum("i,ia,ib->ab", w, vecs, vecs.conj())


def witness_value(vectors: np.ndarray, weights: Sequence, rho: np.ndarray) -> float:
    """``sum_i w_i <psi_i| rho |psi_i>``."""
    vecs = np.asarray(vectors, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (vecs.shape[1], vecs.shape[1]):
        raise ValidationError(f"state of shape {rho.shape} does not match dimension {vecs.shape[1]}")
    w = np.array([float(x) for x in weights])
    vals = np.einsum("ia,ab,ib->i", vecs.conj(), rho, vecs).real
    return float(w @ vals)


def si_certificate(vectors: np.ndarray, weights: Sequence) -> float:
    """Smallest eigenvalue of the weighted projector sum.

    The witness is state-independent in this dimension iff this exceeds
    the weighted independence number.
    """
    return float(np.linalg.eigvalsh(weighted_projector_sum(vectors, weights))[0])


def top_eigen(vectors: np.ndarray, weights: Sequence) -> tuple[float, np.ndarray]:
    """Largest eigenvalue of the weighted projector sum and a (phase-fixed) eigenvector."""
    vals, vecs = np.linalg.eigh(weighted_projector_sum(vectors, weights))
    return float(vals[-1]), fix_phase(vecs[:, -1])


def noisy_state(rho: np.ndarray, mu: float) -> np.ndarray:
    """White-noise mixture ``mu * rho + (1 - mu) * I / d``."""
    if not 0.0 <= mu <= 1.0:
        raise ValidationError(f"mu must lie in [0, 1], got {mu}")
    rho = np.asarray(rho, dtype=complex)
    return mu * rho + (1 - mu) * maximally_mixed(rho.shape[0])


def born(rho: np.ndarray, effect: np.ndarray, tol: float = ALGEBRA_TOL) -> float:
    """``tr(rho E)`` clamped to [0, 1]."""
    rho = np.asarray(rho, dtype=complex)
    effect = check_effect(effect, tol)
    if rho.shape != effect.shape:
        raise ValidationError("state and effect dimensions differ")
    p = float(np.trace(rho @ effect).real)
    return min(1.0, max(0.0, p))


def split_projector(P: np.ndarray, tol: float = ALGEBRA_TOL) -> list[np.ndarray]:
    """Split a rank-r projector into r mutually orthogonal rank-one projectors.

    Uses the eigenvalue-1 eigenvectors, phase-fixed and sorted lexicographically
    (real parts, then imaginary parts) for a reproducible order.
    """
    P = np.asarray(P, dtype=complex)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ValidationError("projector must be square")
    if np.max(np.abs(P @ P - P)) > tol or np.max(np.abs(P - P.conj().T)) > tol:
        raise ValidationError("input is not a Hermitian idempotent")
    vals, vecs = np.linalg.eigh(P)
    keep = [fix_phase(vecs[:, i]) for i in range(len(vals)) if vals[i] > 0.5]
    keep.sort(key=lambda v: tuple(np.round(v.real, 12)) + tuple(np.round(v.imag, 12)), reverse=True)
    return [projector(v) for v in keep]


def orthonormal_completion(vectors: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis (rows) of the orthogonal complement of span(vectors).

    Deterministic: Gram-Schmidt of the standard basis against the span,
    taking basis vectors in index order, then phase-fixing each result.
    """
    vecs = np.atleast_2d(np.asarray(vectors, dtype=complex))
    d = vecs.shape[1]
    basis: list[np.ndarray] = []
    for v in vecs:
        r = v - sum((b.conj() @ v) * b for b in basis) if basis else v.copy()
        nr = np.linalg.norm(r)
        if nr > tol:
            basis.append(r / nr)
    start = len(basis)
    for k in range(d):
        e = np.zeros(d, dtype=complex)
        e[k] = 1
        r = e - sum((b.conj() @ e) * b for b in basis) if basis else e
        nr = np.linalg.norm(r)
        if nr > 1e-6:
            basis.append(r / nr)
        if len(basis) == d:
            break
    return np.array([fix_phase(b) for b in basis[start:]]).reshape(-1, d)


def same_ray(u: np.ndarray, v: np.ndarray, tol: float = 1e-9) -> bool:
    """Equal up to a global phase."""
    return abs(abs(np.vdot(u, v)) - 1) <= tol
