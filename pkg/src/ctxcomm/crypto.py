"""Noise robustness, QKD key rates, secure rates and the monogamy audit."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bounds import classical_bound, s_beta, task_alpha_delta
from .errors import ValidationError
from .quantum import Realization
from .task import ExtendedWitness, Task

TABLE_DIGITS = 3


@dataclass(frozen=True)
class TaskMetrics:
    """Scalar summary of a task that the closed-form formulas consume."""

    d: int
    n: int
    k: int
    N: Fraction
    sum_neighbors: int
    weight_sum: Fraction
    size_x: int
    size_y: int
    alpha: Fraction
    delta: int
    beta: float
    S_c: Fraction
    S_beta: float


def task_metrics(task: Task, ew: ExtendedWitness) -> TaskMetrics:
    alpha, delta = task_alpha_delta(task)
    sb = s_beta(ew, task)
    return TaskMetrics(task.d, task.n, task.k, task.N, task.sum_neighbors,
                       sum(task.weights, Fraction(0)), task.size_x, task.size_y,
                       alpha, delta, sb.beta, classical_bound(task, alpha, delta), sb.value)


def table_round(x) -> float:
    """Round to the table's printed precision."""
    return round(float(x), TABLE_DIGITS)


def mu_critical(m: TaskMetrics, table: bool = False) -> float:
    """``1 - dN(S_b - S_c) / (dN S_b - N - (d-2) sum|N_x|)``.

    ``table=True`` feeds the 3-decimal-rounded S values into the formula.
    """
    sb, sc = (table_round(m.S_beta), table_round(m.S_c)) if table else (m.S_beta, float(m.S_c))
    if sb <= sc:
        raise ValidationError(f"no quantum advantage: S_beta={sb} <= S_c={sc}")
    N, d = float(m.N), m.d
    denom = d * N * sb - N - (d - 2) * m.sum_neighbors
    if abs(denom) < 1e-15:
        raise ValidationError("degenerate mu_c denominator")
    return 1 - d * N * (sb - sc) / denom


def noisy_value(m: TaskMetrics, mu: float) -> float:
    """Figure of merit of the canonical strategy under white noise of sharpness ``mu``:
    ``mu S_b + (1 - mu)(N + (d-2) sum|N_x|) / (dN)``."""
    if not 0.0 <= mu <= 1.0:
        raise ValidationError(f"mu must lie in [0, 1], got {mu}")
    N, d = float(m.N), m.d
    return mu * m.S_beta + (1 - mu) * (N + (d - 2) * m.sum_neighbors) / (d * N)


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def shannon(*ps: float) -> float:
    return -sum(p * math.log2(p) for p in ps if p > 0)


def secure_rate(S_B: float, S_E: float) -> float:
    """``I(A:B) - I(A:E) = 2 (h(S_E) - h(S_B))`` for individual attacks."""
    for s in (S_B, S_E):
        if not 0.0 <= s <= 1.0:
            raise ValidationError(f"figure of merit {s} outside [0, 1]")
    return 2 * (binary_entropy(S_E) - binary_entropy(S_B))


@dataclass(frozen=True)
class KeyRateReport:
    """``P_0``, ``P_1`` are joint probabilities of (success, key bit); they sum to ``S_beta``."""

    P_s: Fraction
    P_0: float
    P_1: Fraction
    E: float
    rate: float
    secure_rate: float
    secure_rate_table: float


def key_rates(m: TaskMetrics) -> KeyRateReport:
    P_s = m.N / (m.size_x * m.size_y)
    P_0 = (m.n + m.k + m.beta) / float(m.N)
    P_1 = Fraction(m.sum_neighbors) / m.N
    E = shannon(P_0, float(P_1))
    return KeyRateReport(P_s, P_0, P_1, E, float(P_s) * E,
                         secure_rate(m.S_beta, float(m.S_c)),
                         secure_rate(table_round(m.S_beta), table_round(m.S_c)))


@dataclass(frozen=True)
class MonogamyAudit:
    lhs: float
    bound: float
    violated: bool


def monogamy_audit(rA: Realization, rB: Realization, weights, rho: np.ndarray,
                   alpha: Fraction, tol: float = 1e-9) -> MonogamyAudit:
    """Evaluate ``sum w_i tr(rho (P_i x I)) + sum w_i tr(rho (I x conj P_i))`` against ``2 alpha``.

    Reports; never raises on violation.
    """
    if rA.graph.n != rB.graph.n or rA.graph.edges != rB.graph.edges:
        raise ValidationError("both realizations must realize the same graph")
    dA, dB = rA.d, rB.d
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (dA * dB, dA * dB):
        raise ValidationError(f"state shape {rho.shape} does not match {dA}x{dB}")
    w = np.array([float(x) for x in weights])
    t = rho.reshape(dA, dB, dA, dB)
    rho_a = np.einsum("ajbj->ab", t)
    rho_b = np.einsum("iaib->ab", t)
    va = np.einsum("ia,ab,ib->i", rA.vectors.conj(), rho_a, rA.vectors).real
    # conj(P) = |conj psi><conj psi|
    vb = np.einsum("ia,ab,ib->i", rB.vectors, rho_b, rB.vectors.conj()).real
    lhs = float(w @ va + w @ vb)
    bound = 2 * float(alpha)
    return MonogamyAudit(lhs, bound, lhs > bound + tol)


def monogamy_values_audit(S_B: float, S_E: float, S_c, tol: float = 1e-12) -> MonogamyAudit:
    """The task-level form ``S_B + S_E <= 2 S_c``."""
    lhs = S_B + S_E
    bound = 2 * float(S_c)
    return MonogamyAudit(lhs, bound, lhs > bound + tol)
