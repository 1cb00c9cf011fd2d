"""Classical and quantum values of the communication task, certification,
equality-problem complexities and product-ratio bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

import numpy as np

from .errors import ResourceCapExceeded, ValidationError
from .graph import WeightedGraph, chromatic_number, fractional_chromatic, independence_number, min_improper
from .quantum import ALGEBRA_TOL, Realization, check_density, check_effect, projector, top_eigen, si_certificate
from .task import ExtendedWitness, Task, UNDEFINED

BRUTEFORCE_CAP = 10**8
_BLOCK = 1 << 15


# ---------------------------------------------------------------------------
# classical side


@dataclass(frozen=True, eq=False)
class ClassicalStrategy:
    """Mixture over strategies indexed by shared randomness.

    ``encodings[l, x, m] = p_e(m | x, l)``, ``decodings[l, y - 1, m] = p_d(z=1 | y, m, l)``.
    """

    d: int
    encodings: np.ndarray
    decodings: np.ndarray
    mixture: np.ndarray = field(default=None)

    def __post_init__(self):
        enc = np.asarray(self.encodings, dtype=float)
        dec = np.asarray(self.decodings, dtype=float)
        if enc.ndim == 2:
            enc, dec = enc[None], dec[None]
        lam = np.ones(len(enc)) / len(enc) if self.mixture is None else np.asarray(self.mixture, float)
        if enc.shape[2] > self.d or dec.shape[2] != enc.shape[2]:
            raise ValidationError(f"message alphabet {enc.shape[2]} exceeds d={self.d}")
        if not np.allclose(enc.sum(axis=2), 1.0, atol=1e-12):
            raise ValidationError("encoding rows must sum to 1")
        if np.any(enc < 0) or np.any(dec < 0) or np.any(dec > 1):
            raise ValidationError("probabilities out of range")
        if len(lam) != len(enc) or abs(lam.sum() - 1) > 1e-12 or np.any(lam < 0):
            raise ValidationError("shared-randomness weights must form a distribution")
        object.__setattr__(self, "encodings", enc)
        object.__setattr__(self, "decodings", dec)
        object.__setattr__(self, "mixture", lam)

    @classmethod
    def deterministic(cls, encoding, decoding, d: int) -> "ClassicalStrategy":
        """``encoding[x] = m``, ``decoding[y - 1][m] = z``."""
        encoding = np.asarray(encoding, dtype=int)
        enc = np.zeros((len(encoding), d))
        enc[np.arange(len(encoding)), encoding] = 1.0
        return cls(d, enc, np.asarray(decoding, dtype=float))

    @property
    def is_deterministic(self) -> bool:
        return (len(self.mixture) == 1
                and np.all((self.encodings == 0) | (self.encodings == 1))
                and np.all((self.decodings == 0) | (self.decodings == 1)))

    def p_one(self) -> np.ndarray:
        """``p(z=1 | x, y)`` as an array indexed ``[x, y - 1]``."""
        return np.einsum("l,lxm,lym->xy", self.mixture, self.encodings, self.decodings)


def _success_matrix(task: Task, p_one: np.ndarray) -> np.ndarray:
    f = task.f
    return np.where(f == 1, p_one, np.where(f == 0, 1 - p_one, 0.0))


def classical_value(task: Task, cs: ClassicalStrategy):
    """Figure of merit of a classical strategy (exact Fraction when deterministic)."""
    p1 = cs.p_one()
    if p1.shape != task.f.shape:
        raise ValidationError(f"strategy shape {p1.shape} does not match task {task.f.shape}")
    succ = _success_matrix(task, p1)
    if cs.is_deterministic:
        total = Fraction(0)
        for x, y in task.scored_pairs():
            if succ[x, y - 1] == 1:
                total += task.t[x][y - 1]
        return total
    return float(np.sum(task.t_float * succ))


def classical_bound(task: Task, alpha: Fraction, delta: int) -> Fraction:
    """``(n + k + sum|N_x| + alpha - delta) / N``."""
    return (task.n + task.k + task.sum_neighbors + Fraction(alpha) - delta) / task.N


def base_graph(task: Task) -> WeightedGraph:
    return task.graph.induced(list(range(task.n))).with_weights(task.weights)


def task_alpha_delta(task: Task) -> tuple[Fraction, int]:
    alpha = independence_number(base_graph(task))
    delta, _ = min_improper(task.graph, task.d)
    return alpha, delta


def _integer_table(task: Task) -> tuple[np.ndarray, np.ndarray, int]:
    denoms = [v.denominator for row in task.t for v in row if v]
    scale = lcm(*denoms) if denoms else 1
    T = np.array([[int(v * scale) for v in row] for row in task.t], dtype=np.int64)
    T0 = np.where(task.f == 0, T, 0)
    T1 = np.where(task.f == 1, T, 0)
    return T0, T1, scale


def _encoding_block(start: int, stop: int, size_x: int, d: int) -> np.ndarray:
    """Mixed-radix digits of ``start..stop-1``; input 0 is the most significant digit."""
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.empty((len(idx), size_x), dtype=np.int8)
    for x in range(size_x - 1, -1, -1):
        out[:, x] = idx % d
        idx //= d
    return out


def classical_bruteforce(task: Task, d: int | None = None, cap: int = BRUTEFORCE_CAP,
                         start: int = 0, stop: int | None = None):
    """Exact classical optimum by enumerating deterministic encodings.

    For each encoding Bob's best reply is fixed: on ``(y, m)`` he outputs the
    value of ``f`` carrying more coefficient mass (ties -> 0).  Encodings are
    visited in mixed-radix order; the first maximiser wins.  ``start``/``stop``
    restrict the enumeration to an index range so the search can be
    partitioned; merge partial results with :func:`merge_bruteforce`.

    Returns ``(value, strategy, best_index)``.
    """
    d = task.d if d is None else d
    size_x = task.size_x
    total = d ** size_x
    if total > cap:
        raise ResourceCapExceeded(f"{d}^{size_x} = {total} encodings exceed cap {cap}")
    stop = total if stop is None else min(stop, total)
    T0, T1, scale = _integer_table(task)
    best_val, best_idx = -1, -1
    for lo in range(start, stop, _BLOCK):
        hi = min(lo + _BLOCK, stop)
        enc = _encoding_block(lo, hi, size_x, d)
        onehot = (enc[:, :, None] == np.arange(d)).astype(np.int64)  # (E, X, d)
        a0 = np.einsum("exm,xy->eym", onehot, T0)
        a1 = np.einsum("exm,xy->eym", onehot, T1)
        vals = np.maximum(a0, a1).sum(axis=(1, 2))
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val, best_idx = int(vals[i]), lo + i
    enc = _encoding_block(best_idx, best_idx + 1, size_x, d)[0]
    onehot = (enc[:, None] == np.arange(d)).astype(np.int64)
    a0 = onehot.T @ T0
    a1 = onehot.T @ T1
    decoding = (a1 > a0).T.astype(float)  # [y-1, m]
    strategy = ClassicalStrategy.deterministic(enc, decoding, d)
    return Fraction(best_val, scale), strategy, best_idx


def merge_bruteforce(parts):
    """Deterministic reduction of partitioned :func:`classical_bruteforce` results."""
    return max(parts, key=lambda r: (r[0], -r[2]))


# ---------------------------------------------------------------------------
# quantum side


@dataclass(frozen=True, eq=False)
class QuantumStrategy:
    """States ``rho_x`` for ``x = 0..n+k`` and effects ``M_{0|y}`` for ``y = 1..n+k``."""

    states: np.ndarray
    effects: np.ndarray

    def __post_init__(self):
        states = np.asarray(self.states, dtype=complex)
        effects = np.asarray(self.effects, dtype=complex)
        if states.ndim != 3 or effects.ndim != 3 or states.shape[1:] != effects.shape[1:]:
            raise ValidationError("states and effects must be stacks of equal-size square matrices")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "effects", effects)

    @property
    def d(self) -> int:
        return self.states.shape[1]

    def validate(self, tol: float = ALGEBRA_TOL) -> None:
        for rho in self.states:
            check_density(rho, tol)
        for m in self.effects:
            check_effect(m, tol)

    def p_zero(self) -> np.ndarray:
        """``p(z=0 | x, y) = tr(rho_x M_{0|y})``, indexed ``[x, y - 1]``."""
        p = np.einsum("xab,yba->xy", self.states, self.effects).real
        return np.clip(p, 0.0, 1.0)

    def with_noise(self, mu: float) -> "QuantumStrategy":
        if not 0.0 <= mu <= 1.0:
            raise ValidationError(f"mu must lie in [0, 1], got {mu}")
        eye = np.eye(self.d) / self.d
        return QuantumStrategy(mu * self.states + (1 - mu) * eye, self.effects)


def canonical_strategy(ew: ExtendedWitness, rho0: np.ndarray | None = None) -> QuantumStrategy:
    """``rho_0 = rho``, ``rho_x = M_{0|x} = |psi_x><psi_x|``.

    Without ``rho0`` the witness' optimal state is used, or for
    state-independent witnesses the top eigenvector of the weighted sum.
    """
    if rho0 is None:
        rho0 = ew.base.optimal_state
    if rho0 is None:
        _, v = top_eigen(ew.base.vectors, ew.weights)
        rho0 = projector(v)
    projs = np.einsum("ia,ib->iab", ew.vectors, ew.vectors.conj())
    states = np.concatenate([np.asarray(rho0, dtype=complex)[None], projs])
    return QuantumStrategy(states, projs.copy())


def quantum_value(task: Task, qs: QuantumStrategy) -> float:
    """Figure of merit with Born-rule probabilities."""
    if qs.states.shape[0] != task.size_x or qs.effects.shape[0] != task.size_y:
        raise ValidationError("strategy does not match the task's input sizes")
    if qs.d != task.d:
        raise ValidationError(f"strategy dimension {qs.d} != task dimension {task.d}")
    qs.validate()
    p1 = 1.0 - qs.p_zero()
    return float(np.sum(task.t_float * _success_matrix(task, p1)))


@dataclass
class SBeta:
    value: float
    beta: float
    lambda_min: float
    rho0: np.ndarray


def s_beta(ew: ExtendedWitness, task: Task) -> SBeta:
    """``(n + k + sum|N_x| + beta) / N`` with beta the top eigenvalue of the
    weighted projector sum of the supplied realization."""
    beta, v = top_eigen(ew.base.vectors, ew.weights)
    lam_min = si_certificate(ew.base.vectors, ew.weights)
    value = (task.n + task.k + task.sum_neighbors + beta) / float(task.N)
    return SBeta(value, beta, lam_min, projector(v))


@dataclass
class Certification:
    certified: bool
    reasons: list
    witness_value: float | None = None
    alpha: Fraction | None = None
    witness_exceeds_alpha: bool | None = None
    effects: np.ndarray | None = None
    rho0: np.ndarray | None = None


def certify(task: Task, qs: QuantumStrategy, tol: float = ALGEBRA_TOL,
            structural_tol: float = 1e-6, alpha: Fraction | None = None) -> Certification:
    """Check the perfect-correlation condition and its structural consequences.

    On success, returns the extracted witness ``{(G, w), {M_{0|y}}_{y<=n}, rho_0}``
    and compares its value with ``alpha``.
    """
    reasons = []
    p0 = qs.p_zero()
    g = task.graph
    for x in range(1, task.size_x):
        if p0[x, x - 1] < 1 - tol:
            reasons.append(f"p(0|x={x},y={x}) = {p0[x, x - 1]:.12g} < 1")
        for u in g.neighbors(x - 1):
            if 1 - p0[x, u] < 1 - tol:
                reasons.append(f"p(1|x={x},y={u + 1}) = {1 - p0[x, u]:.12g} < 1")
    if reasons:
        return Certification(False, reasons)
    states = qs.states
    for x in range(1, task.size_x):
        ev = np.linalg.eigvalsh(states[x])
        if abs(ev[-1] - 1) > structural_tol or np.max(np.abs(ev[:-1]), initial=0) > structural_tol:
            reasons.append(f"rho_{x} is not a rank-one projector")
        if np.max(np.abs(states[x] - qs.effects[x - 1])) > structural_tol:
            reasons.append(f"rho_{x} != M_0|{x}")
    for a, b in g.edges:
        if np.max(np.abs(states[a + 1] @ states[b + 1])) > structural_tol:
            reasons.append(f"rho_{a + 1} and rho_{b + 1} are not orthogonal")
    if reasons:
        return Certification(False, reasons)
    effects = qs.effects[: task.n]
    rho0 = states[0]
    w = np.array([float(v) for v in task.weights])
    value = float(np.einsum("i,ab,iba->", w, rho0, effects).real)
    if alpha is None:
        alpha = independence_number(base_graph(task))
    return Certification(True, [], value, alpha, value > float(alpha), effects, rho0)


# ---------------------------------------------------------------------------
# equality problem and ratio bounds


def equality_complexities(g: WeightedGraph, r: Realization) -> dict:
    """``C(G) = chi(G)``, ``Q(G) <= dim``, and ``S^G`` of the canonical strategy."""
    if r.graph.n != g.n:
        raise ValidationError("realization and graph sizes differ")
    projs = r.projectors()
    p0 = np.einsum("xab,yba->xy", projs, projs).real
    hits = sum(p0[x, x] for x in range(g.n)) + sum(1 - p0[x, u] for x in range(g.n) for u in g.neighbors(x))
    norm = g.n + sum(g.degrees())
    return {"C": chromatic_number(g), "Q_upper": r.d, "S_G": float(hits / norm)}


RATIO_VARIANTS = ("fractional", "chromatic-remark", "newman")


def ratio_bound_log2(variant: str, *, m: int = 1, d_min: int | None = None,
                     chi_f: Fraction | None = None, chi: int | None = None,
                     n: int | None = None) -> float:
    """log2 of the lower bound on C/Q.

    * ``fractional``: ``(chi_f / d_min)^m``
    * ``chromatic-remark``: ``2 / (m ln n) * (chi / d_min)^m``, ``m`` a power of two
    * ``newman``: ``(2 / 1.99)^d / d`` with ``d = d_min``
    """
    if variant == "fractional":
        return m * (math.log2(chi_f.numerator) - math.log2(chi_f.denominator) - math.log2(d_min))
    if variant == "chromatic-remark":
        if m < 1 or m & (m - 1):
            raise ValidationError(f"chromatic-remark bound needs m a power of 2, got {m}")
        return math.log2(2 / (m * math.log(n))) + m * math.log2(chi / d_min)
    if variant == "newman":
        return d_min * math.log2(2 / 1.99) - math.log2(d_min)
    raise ValidationError(f"unknown ratio variant {variant!r}; expected one of {RATIO_VARIANTS}")


def ratio_bounds(g: WeightedGraph, d_min: int, m: int, variant: str) -> float:
    """Graph-level wrapper around :func:`ratio_bound_log2`."""
    if variant == "fractional":
        return ratio_bound_log2(variant, m=m, d_min=d_min, chi_f=fractional_chromatic(g))
    if variant == "chromatic-remark":
        return ratio_bound_log2(variant, m=m, d_min=d_min, chi=chromatic_number(g), n=g.n)
    return ratio_bound_log2(variant, d_min=d_min)
