"""Exact combinatorial invariants of vertex-weighted exclusivity graphs.

Vertices are 0-based internally; the JSON/DIMACS readers in
:mod:`ctxcomm.formats` translate from the 1-based on-disk convention.
Adjacency is kept as a tuple of ``int`` bitmasks, which is what every
search routine below works on.

All searches break ties lowest-index-first, so results (including the
witnessing sets and colorings) are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import numbers
from fractions import Fraction
from functools import cached_property
from math import lcm
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.optimize import linprog

from .errors import InvariantBreach, ResourceCapExceeded, ValidationError

DEFAULT_MIS_CAP = 10**6
DEFAULT_PRODUCT_CAP = 4096


def as_fraction(value) -> Fraction:
    """Parse ``value`` (int, Fraction, ``"p/q"`` string or float) exactly.

    Floats go through their decimal string so that ``0.7`` becomes ``7/10``.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValidationError(f"not a number: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, numbers.Integral):
        return Fraction(int(value))
    if isinstance(value, numbers.Real):
        return Fraction(repr(float(value)))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"bad rational {value!r}") from exc
    raise ValidationError(f"not a number: {value!r}")


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class WeightedGraph:
    """Simple undirected graph with nonnegative rational vertex weights."""

    n: int
    edges: frozenset
    weights: tuple = field(default=())

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 0:
            raise ValidationError(f"vertex count must be a nonnegative int, got {self.n!r}")
        norm = set()
        for e in self.edges:
            i, j = (int(v) for v in e)
            if i == j:
                raise ValidationError(f"self-loop at vertex {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValidationError(f"edge {e} out of range for n={self.n}")
            norm.add((min(i, j), max(i, j)))
        weights = self.weights if self.weights else (1,) * self.n
        if len(weights) != self.n:
            raise ValidationError(f"expected {self.n} weights, got {len(weights)}")
        weights = tuple(as_fraction(w) for w in weights)
        if any(w < 0 for w in weights):
            raise ValidationError("weights must be nonnegative")
        object.__setattr__(self, "edges", frozenset(norm))
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable, weights: Sequence | None = None) -> "WeightedGraph":
        return cls(n, frozenset(tuple(e) for e in edges), tuple(weights) if weights else ())

    @classmethod
    def complete(cls, n: int) -> "WeightedGraph":
        return cls.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])

    @classmethod
    def cycle(cls, n: int) -> "WeightedGraph":
        return cls.from_edges(n, [(i, (i + 1) % n) for i in range(n)])

    @cached_property
    def adj(self) -> tuple:
        masks = [0] * self.n
        for i, j in self.edges:
            masks[i] |= 1 << j
            masks[j] |= 1 << i
        return tuple(masks)

    def neighbors(self, v: int) -> list[int]:
        return list(_bits(self.adj[v]))

    def degree(self, v: int) -> int:
        return self.adj[v].bit_count()

    def degrees(self) -> list[int]:
        return [m.bit_count() for m in self.adj]

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.adj[i] >> j & 1)

    @property
    def total_weight(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    @property
    def is_normalized(self) -> bool:
        """True when ``max_i w_i == 1``."""
        return self.n > 0 and max(self.weights) == 1

    def with_weights(self, weights: Sequence) -> "WeightedGraph":
        return WeightedGraph(self.n, self.edges, tuple(weights))

    def unweighted(self) -> "WeightedGraph":
        return WeightedGraph(self.n, self.edges, ())

    def complement(self) -> "WeightedGraph":
        es = [(i, j) for i in range(self.n) for j in range(i + 1, self.n) if not self.has_edge(i, j)]
        return WeightedGraph(self.n, frozenset(es), self.weights)

    def induced(self, vertices: Sequence[int]) -> "WeightedGraph":
        idx = {v: k for k, v in enumerate(vertices)}
        es = [(idx[i], idx[j]) for i, j in self.edges if i in idx and j in idx]
        return WeightedGraph(len(vertices), frozenset(es), tuple(self.weights[v] for v in vertices))

    def is_independent(self, vertices: Iterable[int]) -> bool:
        vs = list(vertices)
        return not any(self.has_edge(a, b) for k, a in enumerate(vs) for b in vs[k + 1:])

    def is_clique(self, vertices: Iterable[int]) -> bool:
        vs = list(vertices)
        return all(self.has_edge(a, b) for k, a in enumerate(vs) for b in vs[k + 1:])


# ---------------------------------------------------------------------------
# weighted independence number


def _integer_weights(weights: Sequence[Fraction]) -> tuple[list[int], int]:
    scale = lcm(*(w.denominator for w in weights)) if weights else 1
    return [int(w * scale) for w in weights], scale


def _mwis(adj: Sequence[int], w: Sequence[int], candidates: int) -> tuple[int, int]:
    """Max-weight independent set inside ``candidates`` (bitmask).

    Bound: greedy partition of the remaining candidates into cliques; an
    independent set picks at most one vertex per clique, so the sum of the
    per-clique maximum weights is admissible.
    """
    best_w = -1
    best_set = 0

    def bound(P: int) -> int:
        total = 0
        while P:
            v = (P & -P).bit_length() - 1
            clique_cand = P & adj[v]
            top = w[v]
            P &= ~(1 << v)
            while clique_cand:
                u = (clique_cand & -clique_cand).bit_length() - 1
                top = max(top, w[u])
                P &= ~(1 << u)
                clique_cand &= adj[u]
            total += top
        return total

    def expand(P: int, cur: int, chosen: int) -> None:
        nonlocal best_w, best_set
        if P == 0:
            if cur > best_w:
                best_w, best_set = cur, chosen
            return
        if cur + bound(P) <= best_w:
            return
        # branch on the heaviest remaining vertex, lowest index on ties
        v = max(_bits(P), key=lambda u: (w[u], -u))
        bit = 1 << v
        expand(P & ~adj[v] & ~bit, cur + w[v], chosen | bit)
        expand(P & ~bit, cur, chosen)

    expand(candidates, 0, 0)
    return best_w, best_set


def max_weight_independent_set(g: WeightedGraph) -> tuple[Fraction, tuple[int, ...]]:
    """Return ``(alpha(G, w), witnessing vertex set)``."""
    if g.n == 0:
        return Fraction(0), ()
    w, scale = _integer_weights(g.weights)
    val, chosen = _mwis(g.adj, w, (1 << g.n) - 1)
    return Fraction(val, scale), tuple(_bits(chosen))


def independence_number(g: WeightedGraph) -> Fraction:
    """Exact weighted independence number alpha(G, w)."""
    return max_weight_independent_set(g)[0]


def max_clique(g: WeightedGraph, within: int | None = None) -> tuple[int, ...]:
    """A maximum (unweighted) clique, optionally restricted to a vertex mask."""
    if g.n == 0:
        return ()
    full = (1 << g.n) - 1
    comp = tuple(full & ~m & ~(1 << v) for v, m in enumerate(g.adj))
    _, chosen = _mwis(comp, [1] * g.n, full if within is None else within)
    return tuple(_bits(chosen))


def clique_number(g: WeightedGraph) -> int:
    return len(max_clique(g))


def uncovered_by_cliques(g: WeightedGraph, size: int) -> list[int]:
    """Vertices that lie in no clique of ``size`` vertices."""
    out = []
    for v in range(g.n):
        if len(max_clique(g, within=g.adj[v])) + 1 < size:
            out.append(v)
    return out


# ---------------------------------------------------------------------------
# colorings


@dataclass(frozen=True)
class Coloring:
    """Vertex -> color in ``1..d``; improper vertices are derived, never stored."""

    graph: WeightedGraph
    assignment: tuple
    d: int

    def __post_init__(self):
        if len(self.assignment) != self.graph.n:
            raise ValidationError("coloring length does not match graph")
        if any(not 1 <= c <= self.d for c in self.assignment):
            raise ValidationError(f"colors must lie in 1..{self.d}")

    @property
    def improper_vertices(self) -> frozenset:
        a = self.assignment
        return frozenset(i for i in range(self.graph.n)
                         if any(a[j] == a[i] for j in self.graph.neighbors(i)))

    @property
    def is_proper(self) -> bool:
        return not self.improper_vertices

    def color_classes(self) -> dict[int, list[int]]:
        classes: dict[int, list[int]] = {}
        for v, c in enumerate(self.assignment):
            classes.setdefault(c, []).append(v)
        return classes


def dsatur_coloring(g: WeightedGraph) -> list[int]:
    """Greedy DSATUR proper coloring with 0-based colors."""
    n = g.n
    colors = [-1] * n
    nbr_colors: list[set] = [set() for _ in range(n)]
    for _ in range(n):
        v = max((u for u in range(n) if colors[u] < 0),
                key=lambda u: (len(nbr_colors[u]), g.degree(u), -u))
        c = 0
        while c in nbr_colors[v]:
            c += 1
        colors[v] = c
        for u in g.neighbors(v):
            nbr_colors[u].add(c)
    return colors


def _is_colorable(g: WeightedGraph, k: int) -> list[int] | None:
    """Backtracking DSATUR search for a proper k-coloring."""
    n = g.n
    if n == 0:
        return []
    adj = g.adj
    colors = [-1] * n
    sat = [[0] * k for _ in range(n)]  # sat[v][c]: colored neighbors of v with color c

    def pick() -> int:
        best, key = -1, None
        for u in range(n):
            if colors[u] < 0:
                kk = (sum(1 for c in range(k) if sat[u][c]), g.degree(u), -u)
                if key is None or kk > key:
                    best, key = u, kk
        return best

    def search(done: int, used: int) -> bool:
        if done == n:
            return True
        v = pick()
        for c in range(min(k, used + 1)):
            if sat[v][c]:
                continue
            colors[v] = c
            for u in _bits(adj[v]):
                sat[u][c] += 1
            if search(done + 1, max(used, c + 1)):
                return True
            for u in _bits(adj[v]):
                sat[u][c] -= 1
            colors[v] = -1
        return False

    return list(colors) if search(0, 0) else None


def chromatic_number(g: WeightedGraph) -> int:
    """Exact chi(G): iterative deepening from the clique bound."""
    if g.n == 0:
        return 0
    lower = clique_number(g)
    upper = max(dsatur_coloring(g)) + 1
    for k in range(lower, upper):
        if _is_colorable(g, k) is not None:
            return k
    return upper


def proper_coloring(g: WeightedGraph, k: int) -> Coloring | None:
    """A proper ``k``-coloring if one exists."""
    cols = _is_colorable(g, k)
    if cols is None:
        return None
    return Coloring(g, tuple(c + 1 for c in cols), k)


def _greedy_defect_coloring(g: WeightedGraph, d: int) -> list[int]:
    """DSATUR order, each vertex takes the color with fewest clashing neighbors."""
    n = g.n
    colors = [-1] * n
    for _ in range(n):
        v = max((u for u in range(n) if colors[u] < 0),
                key=lambda u: (len({colors[x] for x in g.neighbors(u) if colors[x] >= 0}),
                               g.degree(u), -u))
        clash = [0] * d
        for u in g.neighbors(v):
            if colors[u] >= 0:
                clash[colors[u]] += 1
        colors[v] = min(range(d), key=lambda c: (clash[c], c))
    return colors


def _count_improper(g: WeightedGraph, colors: Sequence[int]) -> int:
    return sum(1 for v in range(g.n) if any(colors[u] == colors[v] for u in g.neighbors(v)))


def min_improper(g: WeightedGraph, d: int) -> tuple[int, Coloring]:
    """Minimum number of improperly colored vertices over all d-colorings.

    Branch-and-bound over a static ordering (most constrained first).  The
    lower bound adds, to the improper count so far, every unassigned vertex
    whose assigned neighbours already use all ``d`` colors; such a vertex is
    improper whatever color it gets.
    """
    if d < 1:
        raise ValidationError("d must be >= 1")
    n = g.n
    if n == 0:
        return 0, Coloring(g, (), d)
    adj = g.adj
    nbrs = [g.neighbors(v) for v in range(n)]

    seed = _greedy_defect_coloring(g, d)
    best = _count_improper(g, seed)
    best_cols = list(seed)
    if best == 0:
        return 0, Coloring(g, tuple(c + 1 for c in best_cols), d)

    # static order: repeatedly take the vertex with most already-ordered neighbours
    order: list[int] = []
    placed = 0
    remaining = set(range(n))
    while remaining:
        v = max(remaining, key=lambda u: ((adj[u] & placed).bit_count(), g.degree(u), -u))
        order.append(v)
        placed |= 1 << v
        remaining.discard(v)

    colors = [-1] * n
    improper = [False] * n
    cnt = [[0] * d for _ in range(n)]
    blocked = [0] * n  # number of colors present among assigned neighbours
    full_blocked = 0  # unassigned vertices with blocked == d
    count = 0

    def search(pos: int, used: int) -> None:
        nonlocal best, best_cols, count, full_blocked
        if count + full_blocked >= best:
            return
        if pos == n:
            best = count
            best_cols = list(colors)
            return
        v = order[pos]
        if blocked[v] == d:
            full_blocked -= 1
        for c in range(min(d, used + 1)):
            # assign
            colors[v] = c
            marked = []
            if cnt[v][c]:
                improper[v] = True
                marked.append(v)
                for u in nbrs[v]:
                    if colors[u] == c and not improper[u]:
                        improper[u] = True
                        marked.append(u)
            count += len(marked)
            newly_full = 0
            for u in nbrs[v]:
                cnt[u][c] += 1
                if cnt[u][c] == 1:
                    blocked[u] += 1
                    if blocked[u] == d and colors[u] < 0:
                        newly_full += 1
            full_blocked += newly_full
            search(pos + 1, max(used, c + 1))
            full_blocked -= newly_full
            for u in nbrs[v]:
                cnt[u][c] -= 1
                if cnt[u][c] == 0:
                    blocked[u] -= 1
            for u in marked:
                improper[u] = False
            count -= len(marked)
            colors[v] = -1
            if best == 0:
                break
        if blocked[v] == d:
            full_blocked += 1

    search(0, 0)
    coloring = Coloring(g, tuple(c + 1 for c in best_cols), d)
    if len(coloring.improper_vertices) != best:
        raise InvariantBreach("defect search returned an inconsistent coloring")
    return best, coloring


# ---------------------------------------------------------------------------
# fractional chromatic number


def maximal_independent_sets(g: WeightedGraph, cap: int = DEFAULT_MIS_CAP) -> list[int]:
    """All maximal independent sets as bitmasks (Bron-Kerbosch with pivoting on the complement)."""
    n = g.n
    full = (1 << n) - 1
    non = [full & ~g.adj[v] & ~(1 << v) for v in range(n)]  # complement adjacency
    out: list[int] = []

    def bk(R: int, P: int, X: int) -> None:
        if P == 0 and X == 0:
            out.append(R)
            if len(out) > cap:
                raise ResourceCapExceeded(f"more than {cap} maximal independent sets")
            return
        pivot = max(_bits(P | X), key=lambda u: ((P & non[u]).bit_count(), -u))
        for v in list(_bits(P & ~non[pivot])):
            bit = 1 << v
            bk(R | bit, P & non[v], X & non[v])
            P &= ~bit
            X |= bit

    if n:
        bk(0, full, 0)
    return sorted(out)


def _solve_exact(rows: list[list[Fraction]], rhs: list[Fraction], ncols: int) -> list[Fraction] | None:
    """A particular solution of ``rows @ x = rhs`` in exact arithmetic (free vars = 0)."""
    m = [list(r) + [b] for r, b in zip(rows, rhs)]
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    if any(all(x == 0 for x in row[:-1]) and row[-1] != 0 for row in m):
        return None
    x = [Fraction(0)] * ncols
    for i, c in enumerate(pivots):
        x[c] = m[i][-1]
    return x


def _certify_lp(sets: list[list[int]], n: int, x: list[Fraction], y: list[Fraction]) -> bool:
    if any(v < 0 for v in x) or any(v < 0 for v in y):
        return False
    cover = [Fraction(0)] * n
    for xs, S in zip(x, sets):
        if xs:
            for v in S:
                cover[v] += xs
    if any(c < 1 for c in cover):
        return False
    if any(sum((y[v] for v in S), Fraction(0)) > 1 for S in sets):
        return False
    return sum(x) == sum(y)


def fractional_chromatic(g: WeightedGraph, cap: int = DEFAULT_MIS_CAP) -> Fraction:
    """Exact chi_f(G) from the covering LP over maximal independent sets.

    The LP is solved in floating point; the rationalized primal cover and
    dual fractional clique are then checked exactly (feasibility of both
    plus equal objectives), which certifies optimality.
    """
    if g.n == 0:
        raise ValidationError("fractional chromatic number needs at least one vertex")
    return _fractional_chromatic_certified(g, cap)[0]


def _fractional_chromatic_certified(g: WeightedGraph, cap: int):
    n = g.n
    sets = [list(_bits(m)) for m in maximal_independent_sets(g, cap)]
    A = np.zeros((n, len(sets)))
    for j, S in enumerate(sets):
        A[S, j] = 1.0
    res = linprog(np.ones(len(sets)), A_ub=-A, b_ub=-np.ones(n), bounds=(0, None), method="highs")
    if res.status != 0:
        raise InvariantBreach(f"covering LP failed: {res.message}")
    xf = res.x
    yf = -res.ineqlin.marginals
    for bound in (10**3, 10**5, 10**7):
        x = [Fraction(float(v)).limit_denominator(bound) if v > 1e-12 else Fraction(0) for v in xf]
        y = [Fraction(float(v)).limit_denominator(bound) if v > 1e-12 else Fraction(0) for v in yf]
        if _certify_lp(sets, n, x, y):
            return sum(x), x, y, sets
    # exact re-solve on the active supports
    active = [j for j, v in enumerate(xf) if v > 1e-9]
    support = [v for v in range(n) if yf[v] > 1e-9]
    rows = [[Fraction(1 if v in sets[j] else 0) for v in support] for j in active]
    ys = _solve_exact(rows, [Fraction(1)] * len(active), len(support))
    rows = [[Fraction(1 if v in sets[j] else 0) for j in active] for v in support]
    xs = _solve_exact(rows, [Fraction(1)] * len(support), len(active))
    if ys is not None and xs is not None:
        y = [Fraction(0)] * n
        for v, val in zip(support, ys):
            y[v] = val
        x = [Fraction(0)] * len(sets)
        for j, val in zip(active, xs):
            x[j] = val
        if _certify_lp(sets, n, x, y):
            return sum(x), x, y, sets
    raise InvariantBreach("could not certify the fractional chromatic LP exactly")


# ---------------------------------------------------------------------------
# graph constructions


def or_product(g: WeightedGraph, h: WeightedGraph, cap: int = DEFAULT_PRODUCT_CAP) -> WeightedGraph:
    """Inclusive (co-normal / OR) product; vertex ``(i, j)`` has index ``i * h.n + j``."""
    size = g.n * h.n
    if size > cap:
        raise ResourceCapExceeded(f"product would have {size} vertices (cap {cap})")
    edges = []
    for a in range(size):
        i, j = divmod(a, h.n)
        for b in range(a + 1, size):
            k, l = divmod(b, h.n)
            if g.has_edge(i, k) or h.has_edge(j, l):
                edges.append((a, b))
    weights = tuple(wg * wh for wg in g.weights for wh in h.weights)
    return WeightedGraph(size, frozenset(edges), weights)


def graph_power(g: WeightedGraph, m: int, cap: int = DEFAULT_PRODUCT_CAP) -> WeightedGraph:
    if m < 1:
        raise ValidationError("power must be >= 1")
    out = g
    for _ in range(m - 1):
        out = or_product(out, g, cap)
    return out


def vertex_split(g: WeightedGraph, ranks: Sequence[int]) -> tuple[WeightedGraph, list[tuple[int, int]]]:
    """Replace vertex ``i`` by a clique of ``ranks[i]`` copies carrying weight ``w_i``.

    Returns the split graph and the label ``(i, k)`` of each new vertex.
    """
    if len(ranks) != g.n or any(int(r) < 1 for r in ranks):
        raise ValidationError("need one rank >= 1 per vertex")
    labels = [(i, k) for i in range(g.n) for k in range(int(ranks[i]))]
    edges = []
    for a, (i, _) in enumerate(labels):
        for b in range(a + 1, len(labels)):
            j = labels[b][0]
            if i == j or g.has_edge(i, j):
                edges.append((a, b))
    weights = tuple(g.weights[i] for i, _ in labels)
    return WeightedGraph(len(labels), frozenset(edges), weights), labels


# ---------------------------------------------------------------------------
# symmetry


def _refined_colors(g: WeightedGraph) -> list[int]:
    """Stable color refinement seeded by (weight, degree)."""
    cur = [(g.weights[v], g.degree(v)) for v in range(g.n)]
    while True:
        keys = [(cur[v], tuple(sorted(cur[u] for u in g.neighbors(v)))) for v in range(g.n)]
        index = {k: i for i, k in enumerate(sorted(set(keys)))}
        nxt = [index[k] for k in keys]
        if len(set(nxt)) == len(set(cur)):
            return nxt
        cur = nxt


def _automorphism_mapping(g: WeightedGraph, colors: list[int], u: int, v: int) -> list[int] | None:
    """A weight-preserving automorphism sending ``u`` to ``v``, or None."""
    n = g.n
    order, seen = [u], {u}
    for a in order:  # BFS from u, then the rest
        for b in g.neighbors(a):
            if b not in seen:
                seen.add(b)
                order.append(b)
        if len(order) == len(seen) and a == order[-1]:
            rest = [x for x in range(n) if x not in seen]
            if rest:
                seen.add(rest[0])
                order.append(rest[0])
    image = [-1] * n
    used = [False] * n

    def extend(pos: int) -> bool:
        if pos == n:
            return True
        a = order[pos]
        cands = [v] if pos == 0 else [b for b in range(n) if not used[b] and colors[b] == colors[a]]
        for b in cands:
            if any(g.has_edge(a, order[p]) != g.has_edge(b, image[order[p]]) for p in range(pos)):
                continue
            image[a], used[b] = b, True
            if extend(pos + 1):
                return True
            image[a], used[b] = -1, False
        return False

    return image if extend(0) else None


def vertex_orbits(g: WeightedGraph) -> list[list[int]]:
    """Orbits of the weight-preserving automorphism group, each sorted, ordered by least element."""
    colors = _refined_colors(g)
    parent = list(range(g.n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u in range(g.n):
        for v in range(u + 1, g.n):
            if colors[u] != colors[v] or find(u) == find(v):
                continue
            perm = _automorphism_mapping(g, colors, u, v)
            if perm is not None:
                for a, b in enumerate(perm):
                    parent[find(a)] = find(b)
    groups: dict[int, list[int]] = {}
    for x in range(g.n):
        groups.setdefault(find(x), []).append(x)
    return sorted(groups.values())
