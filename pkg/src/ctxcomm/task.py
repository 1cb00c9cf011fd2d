"""Witness extension (every vertex in a d-clique) and the one-way communication task.

Task indexing: Alice's input ``x`` runs over ``0..n+k``, Bob's ``y`` over
``1..n+k``; both are stored with those literal values, so ``x = 0`` is
the state-preparation input and ``y = i + 1`` measures vertex ``i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .errors import ValidationError
from .graph import WeightedGraph, _bits, uncovered_by_cliques
from .quantum import ALGEBRA_TOL, ADJACENCY_MODE, Realization, orthonormal_completion, same_ray, verify_realization
from .witnesses import NamedWitness, get_witness

UNDEFINED = -1
WEIGHTED_N = "weighted"
VERTEX_COUNT_N = "vertex-count"


@dataclass(frozen=True, eq=False)
class ExtendedWitness:
    base: NamedWitness
    vectors: np.ndarray  # all n + k vectors, base first
    extended_graph: WeightedGraph
    d: int
    completed_cliques: tuple = ()
    preset: str | None = None

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def k(self) -> int:
        return self.extended_graph.n - self.base.n

    @property
    def added_vectors(self) -> np.ndarray:
        return self.vectors[self.n:]

    @property
    def realization(self) -> Realization:
        return Realization(self.vectors, self.extended_graph, ADJACENCY_MODE)

    @property
    def weights(self) -> tuple:
        return self.base.graph.weights


def _maximal_cliques_containing(g: WeightedGraph, v: int) -> list[tuple[int, ...]]:
    out = []

    def bk(R: int, P: int, X: int) -> None:
        if not P and not X:
            out.append(tuple(sorted(_bits(R))))
            return
        for u in list(_bits(P)):
            bit = 1 << u
            bk(R | bit, P & g.adj[u], X & g.adj[u])
            P &= ~bit
            X |= bit

    bk(1 << v, g.adj[v], 0)
    return sorted(out)


def _complete(vectors: list[np.ndarray], edges: set, clique: tuple[int, ...], d: int) -> None:
    """Append vectors completing ``clique`` to a basis and add their orthogonality edges."""
    comp = orthonormal_completion(np.array([vectors[i] for i in clique]))
    fresh = []
    for c in comp:
        dup = next((i for i, v in enumerate(vectors) if same_ray(v, c)), None)
        if dup is None:
            vectors.append(c)
            fresh.append(len(vectors) - 1)
        else:
            # an existing vertex already spans this direction: make the clique explicit
            edges.update((min(dup, i), max(dup, i)) for i in clique if i != dup)
    for a in fresh:
        for b in range(len(vectors)):
            if b != a and abs(np.vdot(vectors[a], vectors[b])) <= ALGEBRA_TOL:
                edges.add((min(a, b), max(a, b)))


def extend(w: NamedWitness, d: int, cliques: list[tuple[int, ...]] | None = None,
           preset: str | None = None) -> ExtendedWitness:
    """Extend ``w`` so every vertex lies in a clique of size ``d``.

    With ``cliques`` given (0-based vertex tuples), exactly those cliques are
    completed, in order.  Otherwise a greedy pass visits vertices in index
    order and completes the lexicographically first maximal clique of each
    vertex not yet covered.  Completion vectors span the orthogonal
    complement of the clique; a completion vector that coincides (up to
    phase) with an existing one is reused instead of added.
    """
    if w.d != d:
        raise ValidationError(f"realization has dimension {w.d}, task dimension is {d}")
    n = w.n
    vectors = [np.array(v) for v in w.vectors]
    edges = set(w.graph.edges)
    done: list[tuple[int, ...]] = []

    def current() -> WeightedGraph:
        return WeightedGraph(len(vectors), frozenset(edges))

    if cliques is not None:
        for cl in cliques:
            cl = tuple(cl)
            g = current()
            if not g.is_clique(cl):
                raise ValidationError(f"preset clique {cl} is not a clique")
            _complete(vectors, edges, cl, d)
            done.append(cl)
    else:
        for v in range(n):
            g = current()
            if v not in uncovered_by_cliques(g, d):
                continue
            cl = _maximal_cliques_containing(g, v)[0]
            _complete(vectors, edges, cl, d)
            done.append(cl)

    k = len(vectors) - n
    weights = tuple(w.graph.weights) + (Fraction(0),) * k
    ext_graph = WeightedGraph(len(vectors), frozenset(edges), weights)
    ew = ExtendedWitness(w, np.array(vectors), ext_graph, d, tuple(done), preset)
    _check_extension(ew)
    return ew


def _check_extension(ew: ExtendedWitness) -> None:
    missing = uncovered_by_cliques(ew.extended_graph, ew.d)
    if missing:
        raise ValidationError(f"vertices {missing} are not in any {ew.d}-clique after extension")
    verdict = verify_realization(ew.realization)
    if not verdict:
        raise ValidationError(f"extended realization fails orthogonality checks: {verdict}")
    base_edges = {e for e in ew.extended_graph.edges if max(e) < ew.n}
    if base_edges != set(ew.base.graph.edges):
        raise ValidationError("extension changed edges among the base vertices")


def _yo13_cliques() -> list[tuple[int, int]]:
    g = get_witness("yo13").graph
    return [(y, h) for h in range(9, 13) for y in g.neighbors(h)]


# name -> (witness, d, cliques to complete, 0-based)
PRESETS = {
    "kcbs-k3": ("kcbs5", 3, lambda: [(0, 1), (2, 3), (0, 4)]),
    "kcbs-k4": ("kcbs5", 3, lambda: [(0, 1), (2, 3), (4,)]),
    "c7-k4": ("kcbs7", 3, lambda: [(0, 1), (2, 3), (4, 5), (0, 6)]),
    "ceg18-k0": ("ceg18", 4, lambda: []),
    "yo13-k12": ("yo13", 3, _yo13_cliques),
}


def preset_names() -> list[str]:
    return list(PRESETS)


def extend_preset(preset: str, witness: NamedWitness | None = None) -> ExtendedWitness:
    try:
        wname, d, cliques = PRESETS[preset]
    except KeyError:
        raise ValidationError(f"unknown preset {preset!r}; available: {', '.join(PRESETS)}") from None
    w = witness if witness is not None else get_witness(wname)
    return extend(w, d, cliques(), preset=preset)


@dataclass(frozen=True, eq=False)
class Task:
    """Target function and coefficient table of the extended-graph task.

    ``f[x, y - 1]`` holds 0, 1 or :data:`UNDEFINED`; ``t[x][y - 1]`` is an
    exact Fraction.  Rows run over ``x = 0..n+k``.
    """

    n: int
    k: int
    d: int
    graph: WeightedGraph  # extended graph; first n vertices are the base
    weights: tuple  # base weights, length n
    N: Fraction
    normalization: str = WEIGHTED_N
    name: str = ""
    f: np.ndarray = field(default=None, repr=False)
    t: tuple = field(default=(), repr=False)

    @property
    def size_x(self) -> int:
        return self.n + self.k + 1

    @property
    def size_y(self) -> int:
        return self.n + self.k

    @cached_property
    def sum_neighbors(self) -> int:
        return sum(self.graph.degrees())

    @cached_property
    def t_float(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.t])

    def scored_pairs(self) -> list[tuple[int, int]]:
        return [(x, y) for x in range(self.size_x) for y in range(1, self.size_y + 1)
                if self.t[x][y - 1] != 0]

    @property
    def coefficient_total(self) -> Fraction:
        return sum((v for row in self.t for v in row), Fraction(0))


def build_task(ew: ExtendedWitness, normalization: str = WEIGHTED_N) -> Task:
    """Build the task from an extended witness.

    ``normalization="weighted"`` uses ``N = n + k + sum|N_x| + sum_i w_i`` so
    the coefficients sum to one.  ``"vertex-count"`` replaces the weight sum
    by ``n`` (the convention behind the YO-13 table row); coefficients then
    sum to ``1 - (n - sum w)/N``.
    """
    return task_from_graph(ew.n, ew.d, ew.extended_graph, ew.weights, normalization,
                           ew.preset or ew.base.name)


def task_from_graph(n: int, d: int, g: WeightedGraph, weights, normalization: str = WEIGHTED_N,
                    name: str = "") -> Task:
    """Task on extended graph ``g`` whose first ``n`` vertices carry ``weights``."""
    k = g.n - n
    if k < 0 or len(weights) != n:
        raise ValidationError("extended graph must contain the n weighted base vertices")
    weights = tuple(Fraction(w) for w in weights)
    sum_nx = sum(g.degrees())
    if normalization == WEIGHTED_N:
        N = Fraction(n + k + sum_nx) + sum(weights, Fraction(0))
    elif normalization == VERTEX_COUNT_N:
        N = Fraction(n + k + sum_nx + n)
    else:
        raise ValidationError(f"unknown normalization {normalization!r}")
    size_x, size_y = n + k + 1, n + k
    f = np.full((size_x, size_y), UNDEFINED, dtype=np.int8)
    t = [[Fraction(0)] * size_y for _ in range(size_x)]
    for x in range(1, size_x):
        f[x, x - 1] = 0
        t[x][x - 1] = 1 / N
        for u in g.neighbors(x - 1):
            f[x, u] = 1
            t[x][u] = 1 / N
    for y in range(1, n + 1):
        f[0, y - 1] = 0
        t[0][y - 1] = weights[y - 1] / N
    f.setflags(write=False)
    return Task(n, k, d, g, weights, N, normalization, name, f, tuple(tuple(r) for r in t))
