"""Built-in contextuality witnesses: odd-cycle (KCBS), CEG-18, Yu-Oh 13,
Peres-33 and the Newman / Hadamard families."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import ResourceCapExceeded, ValidationError
from .graph import WeightedGraph
from .quantum import ADJACENCY_MODE, EXACT_MODE, Realization, orthogonality_graph, pure_state

NEWMAN_MAX_EXPONENT = 14
HADAMARD_MAX_EXPONENT = 12


@dataclass(frozen=True, eq=False)
class NamedWitness:
    name: str
    graph: WeightedGraph
    realization: Realization
    optimal_state: np.ndarray | None = None
    notes: dict = field(default_factory=dict)

    @property
    def d(self) -> int:
        return self.realization.d

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def vectors(self) -> np.ndarray:
        return self.realization.vectors

    @property
    def state_independent(self) -> bool:
        return self.optimal_state is None


def _normalize_rows(rows) -> np.ndarray:
    v = np.asarray(rows, dtype=float)
    return (v / np.linalg.norm(v, axis=1)[:, None]).astype(complex)


def kcbs_cycle(n: int) -> NamedWitness:
    """Odd n-cycle witness in dimension 3 with consecutive vectors orthogonal.

    ``|v_j> = (sin t cos(j pi (n-1)/n), sin t sin(j pi (n-1)/n), cos t)`` with
    ``cos^2 t = cos(pi/n) / (1 + cos(pi/n))``; the handle state is ``(0, 0, 1)``.
    """
    if not isinstance(n, int) or n < 5 or n % 2 == 0:
        raise ValidationError(f"KCBS cycle needs odd n >= 5, got {n!r}")
    c = np.cos(np.pi / n)
    cos_t = np.sqrt(c / (1 + c))
    sin_t = np.sqrt(1 / (1 + c))
    phi = np.arange(n) * np.pi * (n - 1) / n
    vecs = np.stack([sin_t * np.cos(phi), sin_t * np.sin(phi), np.full(n, cos_t)], axis=1)
    graph = WeightedGraph.cycle(n)
    return NamedWitness(
        name=f"kcbs{n}",
        graph=graph,
        realization=Realization(vecs.astype(complex), graph, EXACT_MODE),
        optimal_state=pure_state(np.array([0, 0, 1.0])),
        notes={"source": "Klyachko-Can-Binicioglu-Shumovsky odd-cycle construction",
               "beta_closed_form": f"{n}*cos(pi/{n})/(1+cos(pi/{n}))"},
    )


# the nine orthonormal bases of the 18-vector Kochen-Specker set (each vector in two bases)
CEG18_BASES = (
    ((0, 0, 0, 1), (0, 0, 1, 0), (1, 1, 0, 0), (1, -1, 0, 0)),
    ((0, 0, 0, 1), (0, 1, 0, 0), (1, 0, 1, 0), (1, 0, -1, 0)),
    ((1, -1, 1, -1), (1, -1, -1, 1), (1, 1, 0, 0), (0, 0, 1, 1)),
    ((1, -1, 1, -1), (1, 1, 1, 1), (1, 0, -1, 0), (0, 1, 0, -1)),
    ((0, 0, 1, 0), (0, 1, 0, 0), (1, 0, 0, 1), (1, 0, 0, -1)),
    ((1, -1, -1, 1), (1, 1, 1, 1), (1, 0, 0, -1), (0, 1, -1, 0)),
    ((1, 1, -1, 1), (1, 1, 1, -1), (1, -1, 0, 0), (0, 0, 1, 1)),
    ((1, 1, -1, 1), (-1, 1, 1, 1), (1, 0, 1, 0), (0, 1, 0, -1)),
    ((1, 1, 1, -1), (-1, 1, 1, 1), (1, 0, 0, 1), (0, 1, -1, 0)),
)


def ceg18() -> NamedWitness:
    """18 rays in R^4 forming nine bases; the graph is the union of the nine 4-cliques."""
    rays: list[tuple] = []
    for basis in CEG18_BASES:
        for v in basis:
            if v not in rays:
                rays.append(v)
    edges = set()
    for basis in CEG18_BASES:
        idx = [rays.index(v) for v in basis]
        edges.update((a, b) for a, b in itertools.combinations(sorted(idx), 2))
    graph = WeightedGraph(len(rays), frozenset(edges))
    return NamedWitness(
        name="ceg18",
        graph=graph,
        realization=Realization(_normalize_rows(rays), graph, ADJACENCY_MODE),
        notes={"source": "Cabello-Estebaranz-Garcia-Alcaine 18-vector set",
               "bases": [[rays.index(v) for v in b] for b in CEG18_BASES],
               "extra_orthogonal_pairs": "9 orthogonal pairs outside the bases are not edges"},
    )


YO13_RAYS = (
    (1, 0, 0), (0, 1, 0), (0, 0, 1),
    (0, 1, 1), (0, 1, -1), (1, 0, 1), (1, 0, -1), (1, 1, 0), (1, -1, 0),
    (1, 1, 1), (-1, 1, 1), (1, -1, 1), (1, 1, -1),
)


def yo13(weights: str = "weighted") -> NamedWitness:
    """Yu-Oh 13 rays in R^3; weight 1 on the first nine, 1/2 on the four ``(+-1, +-1, +-1)`` rays.

    ``weights="unit"`` gives the all-ones variant.
    """
    if weights == "weighted":
        w = (Fraction(1),) * 9 + (Fraction(1, 2),) * 4
    elif weights == "unit":
        w = (Fraction(1),) * 13
    else:
        raise ValidationError("weights must be 'weighted' or 'unit'")
    vecs = _normalize_rows(YO13_RAYS)
    graph = orthogonality_graph(vecs, w)
    return NamedWitness(
        name="yo13" if weights == "weighted" else "yo13-unit",
        graph=graph,
        realization=Realization(vecs, graph, EXACT_MODE),
        notes={"source": "Yu-Oh 13-ray set", "weights": weights},
    )


def peres33() -> NamedWitness:
    """Peres' 33 rays in R^3: signed permutations of (0,0,1), (0,1,1), (0,1,sqrt2), (1,1,sqrt2)."""
    s = np.sqrt(2.0)
    rays: list[np.ndarray] = []
    for base in ((0, 0, 1), (0, 1, 1), (0, 1, s), (1, 1, s)):
        for perm in itertools.permutations(base):
            for signs in itertools.product((1, -1), repeat=3):
                v = np.array(perm) * np.array(signs)
                v = v / np.linalg.norm(v)
                if not any(abs(abs(v @ r) - 1) < 1e-9 for r in rays):
                    rays.append(v)
    vecs = np.array(rays, dtype=complex)
    graph = orthogonality_graph(vecs)
    return NamedWitness(
        name="peres33",
        graph=graph,
        realization=Realization(vecs, graph, EXACT_MODE),
        notes={"source": "Peres 33-ray set", "data_only": True},
    )


def _sign_vectors(d: int, newman: bool) -> np.ndarray:
    rows = []
    if newman:
        for bits in itertools.product((0, 1), repeat=d - 1):
            if sum(bits) % 2 == 0:
                rows.append((1,) + tuple((-1) ** b for b in bits))
    else:
        for bits in itertools.product((0, 1), repeat=d):
            rows.append(tuple((-1) ** b for b in bits))
    return np.array(rows, dtype=float) / np.sqrt(d)


def _check_mult4(d: int) -> None:
    if not isinstance(d, int) or d < 4 or d % 4:
        raise ValidationError(f"d must be a positive multiple of 4, got {d!r}")


def newman(d: int) -> NamedWitness:
    """The 2^(d-2) sign vectors ``[1, (-1)^x_1, ..., (-1)^x_(d-1)] / sqrt(d)`` with even parity.

    Two vectors are orthogonal iff they differ in exactly d/2 places.
    """
    _check_mult4(d)
    if d - 2 > NEWMAN_MAX_EXPONENT:
        raise ResourceCapExceeded(f"Newman graph for d={d} has 2^{d - 2} vertices (cap 2^{NEWMAN_MAX_EXPONENT})")
    vecs = _sign_vectors(d, newman=True)
    graph = _hamming_graph(np.sign(vecs), d // 2)
    return NamedWitness(
        name=f"newman{d}",
        graph=graph,
        realization=Realization(vecs.astype(complex), graph, EXACT_MODE),
        notes={"source": "Newman graph G_N(d)",
               "si_threshold_claim": "SI for d >= 1128 (formula-level, not verified)"},
    )


def _hamming_graph(signs: np.ndarray, distance: int) -> WeightedGraph:
    diff = (signs[:, None, :] != signs[None, :, :]).sum(axis=2)
    ii, jj = np.nonzero(np.triu(diff == distance, 1))
    return WeightedGraph(len(signs), frozenset(zip(ii.tolist(), jj.tolist())))


def hadamard_graph(d: int) -> WeightedGraph:
    """Orthogonality graph of all 2^d sign vectors in dimension d (Hamming distance d/2)."""
    _check_mult4(d)
    if d > HADAMARD_MAX_EXPONENT:
        raise ResourceCapExceeded(f"Hadamard graph for d={d} has 2^{d} vertices (cap 2^{HADAMARD_MAX_EXPONENT})")
    return _hamming_graph(np.sign(_sign_vectors(d, newman=False)), d // 2)


WITNESSES: dict[str, Callable[[], NamedWitness]] = {
    "kcbs5": lambda: kcbs_cycle(5),
    "kcbs7": lambda: kcbs_cycle(7),
    "kcbs9": lambda: kcbs_cycle(9),
    "ceg18": ceg18,
    "yo13": yo13,
    "yo13-unit": lambda: yo13("unit"),
    "peres33": peres33,
    "newman4": lambda: newman(4),
    "newman8": lambda: newman(8),
}


def witness_names() -> list[str]:
    return list(WITNESSES)


def get_witness(name: str) -> NamedWitness:
    try:
        return WITNESSES[name]()
    except KeyError:
        raise ValidationError(f"unknown witness {name!r}; available: {', '.join(WITNESSES)}") from None
