"""Heuristic min-entropy of Bob's outcome on the state-preparation input.

The adversary maximises ``p_guess = max_{y,z} p(z | x=0, y)`` over every
strategy that satisfies the perfect-correlation structure (rank-one
projectors realizing the extended graph, ``rho_x = M_{0|x}``) and whose
figure of merit equals the observed value ``S_o``.  This pins the witness
term to ``W = N S_o - (n + k + sum|N_x|)``.

The search alternates two steps for each target ``(y, z)``:

* state step: for fixed vectors the best state solves a two-constraint SDP,
  solved exactly through its one-dimensional dual
  ``min_lam lambda_max(E + lam A) - lam W``;
* frame step: for fixed state, SLSQP over the complex vectors with the
  orthogonality, norm and witness constraints, followed by a Gauss-Newton
  repair of the orthogonality constraints.

It is a local search: the result lower-bounds the true ``p_guess`` and so
upper-bounds the certified min-entropy.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize, minimize_scalar

from .bounds import QuantumStrategy, canonical_strategy, certify, classical_bound, quantum_value, s_beta, task_alpha_delta
from .errors import ValidationError
from .graph import WeightedGraph, _is_colorable, _bits, maximal_independent_sets, min_improper, vertex_orbits
from .quantum import fix_phase, projector
from .task import ExtendedWitness, Task

Y_RANGES = ("all", "base")
REPAIR_TOL = 1e-13
HEURISTIC_LABEL = "heuristic bound"


@dataclass
class GuessResult:
    S_o: float
    p_guess: float
    h_min: float
    target: tuple  # (y, z), 1-based y
    vectors: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    iterations: int = 0

    def strategy(self) -> QuantumStrategy:
        projs = np.einsum("ia,ib->iab", self.vectors, self.vectors.conj())
        states = np.concatenate([projector(self.phi)[None], projs])
        return QuantumStrategy(states, projs.copy())


@dataclass
class RandomnessCurve:
    points: list  # (S_o, p_guess, H_min)
    restarts: int
    tolerance: float
    y_range: str
    seed: int
    label: str = HEURISTIC_LABEL


class _Problem:
    """Data shared by all restarts for one task."""

    def __init__(self, task: Task, ew: ExtendedWitness, y_range: str):
        if y_range not in Y_RANGES:
            raise ValidationError(f"y_range must be one of {Y_RANGES}, got {y_range!r}")
        self.task, self.ew, self.y_range = task, ew, y_range
        self.d = task.d
        self.m = task.n + task.k
        self.w = np.array([float(x) for x in task.weights] + [0.0] * task.k)
        self.edges = np.array(sorted(task.graph.edges), dtype=int).reshape(-1, 2)
        self.offset = task.n + task.k + task.sum_neighbors
        self.N = float(task.N)
        alpha, delta = task_alpha_delta(task)
        self.S_c = float(classical_bound(task, alpha, delta))
        self.S_beta = s_beta(ew, task).value
        limit = task.n if y_range == "base" else self.m
        reps = [orb[0] for orb in vertex_orbits(task.graph) if orb[0] < limit]
        self.targets = [(y, z) for y in reps for z in (0, 1)]
        self.all_targets = [(y, z) for y in range(limit) for z in (0, 1)]

    def witness(self, S_o: float) -> float:
        return self.N * S_o - self.offset

    def check(self, S_o: float) -> None:
        if not self.S_c - 1e-12 <= S_o <= self.S_beta + 1e-9:
            raise ValidationError(f"S_o={S_o} outside [S_c={self.S_c:.6f}, S_beta={self.S_beta:.6f}]")

    def p_guess(self, vecs: np.ndarray, phi: np.ndarray) -> tuple[float, tuple]:
        ov = np.abs(vecs[: len(self.all_targets) // 2] @ phi.conj()) ** 2
        ov = np.clip(ov, 0.0, 1.0)
        best = max(((max(p, 1 - p), (y, 0 if p >= 1 - p else 1)) for y, p in enumerate(ov)))
        return best


def _witness_op(vecs: np.ndarray, w: np.ndarray) -> np.ndarray:
    return np.einsum("i,ia,ib->ab", w, vecs, vecs.conj())


def _effect(vecs: np.ndarray, y: int, z: int) -> np.ndarray:
    P = projector(vecs[y])
    return P if z == 0 else np.eye(len(P)) - P


def _state_step(A: np.ndarray, E: np.ndarray, W: float) -> tuple[float, np.ndarray] | None:
    """Best pure state for ``max <E>`` subject to ``<A> = W``; None when infeasible."""
    ev, U = np.linalg.eigh(A)
    lo, hi = ev[0], ev[-1]
    if W > hi + 1e-11 or W < lo - 1e-11:
        return None
    for edge, mask in ((hi, ev > hi - 1e-9), (lo, ev < lo + 1e-9)):
        if abs(W - edge) <= 1e-9 or hi - lo < 1e-9:
            # state confined to an extreme eigenspace of A
            S = U[:, mask]
            vals, V = np.linalg.eigh(S.conj().T @ E @ S)
            phi = S @ V[:, -1]
            return float(vals[-1]), phi / np.linalg.norm(phi)

    def dual(lam: float) -> float:
        return np.linalg.eigvalsh(E + lam * A)[-1] - lam * W

    gap = min(hi - W, W - lo)
    L = 4.0 / gap + 1.0
    lam = minimize_scalar(dual, bounds=(-L, L), method="bounded", options={"xatol": 1e-12}).x
    eps = 1e-7 * max(1.0, abs(lam))

    def top(l: float) -> np.ndarray:
        return np.linalg.eigh(E + l * A)[1][:, -1]

    def a_of(v: np.ndarray) -> float:
        return float((v.conj() @ A @ v).real)

    vm, vp = top(lam - eps), top(lam + eps)
    vp = vp * np.exp(-1j * np.angle(np.vdot(vm, vp))) if abs(np.vdot(vm, vp)) > 1e-14 else vp
    am, ap = a_of(vm), a_of(vp)
    if am > W:
        vm, am = np.linalg.eigh(A)[1][:, 0], lo
    if ap < W:
        vp, ap = np.linalg.eigh(A)[1][:, -1], hi

    def mix(t: float) -> np.ndarray:
        v = math.cos(t) * vm + math.sin(t) * vp
        return v / np.linalg.norm(v)

    if abs(am - W) < 1e-14:
        phi = vm
    elif abs(ap - W) < 1e-14:
        phi = vp
    else:
        t = brentq(lambda t: a_of(mix(t)) - W, 0.0, math.pi / 2, xtol=1e-15)
        phi = mix(t)
    return float((phi.conj() @ E @ phi).real), phi


# -- frame step ---------------------------------------------------------------


def _pack(vecs: np.ndarray) -> np.ndarray:
    return np.concatenate([vecs.real.ravel(), vecs.imag.ravel()])


def _unpack(x: np.ndarray, m: int, d: int) -> np.ndarray:
    h = m * d
    return (x[:h] + 1j * x[h:]).reshape(m, d)


def _structure(x: np.ndarray, m: int, d: int, edges: np.ndarray):
    """Norm and orthogonality residuals with their Jacobian."""
    h = m * d
    R, I = x[:h].reshape(m, d), x[h:].reshape(m, d)
    a, b = edges[:, 0], edges[:, 1]
    ne = len(edges)
    res = np.concatenate([
        (R * R + I * I).sum(axis=1) - 1,
        (R[a] * R[b] + I[a] * I[b]).sum(axis=1),
        (R[a] * I[b] - I[a] * R[b]).sum(axis=1),
    ])
    J = np.zeros((m + 2 * ne, 2 * h))
    rows = np.arange(m)
    for c in range(d):
        J[rows, rows * d + c] = 2 * R[:, c]
        J[rows, h + rows * d + c] = 2 * I[:, c]
        er = m + np.arange(ne)
        J[er, a * d + c] = R[b, c]
        J[er, h + a * d + c] = I[b, c]
        J[er, b * d + c] = R[a, c]
        J[er, h + b * d + c] = I[a, c]
        ei = m + ne + np.arange(ne)
        J[ei, a * d + c] = I[b, c]
        J[ei, h + a * d + c] = -R[b, c]
        J[ei, b * d + c] = -I[a, c]
        J[ei, h + b * d + c] = R[a, c]
    return res, J


def _overlaps(x: np.ndarray, m: int, d: int, phi: np.ndarray):
    """``|<phi|psi_i>|^2`` and its gradient rows (one per vertex)."""
    h = m * d
    vecs = _unpack(x, m, d)
    c = vecs @ phi.conj()  # <phi|psi_i>
    q = np.abs(c) ** 2
    G = np.zeros((m, 2 * h))
    rows = np.arange(m)
    for k in range(d):
        u = c * phi[k]
        G[rows, rows * d + k] = 2 * u.real
        G[rows, h + rows * d + k] = 2 * u.imag
    return q, G


def _repair(vecs: np.ndarray, edges: np.ndarray, tol: float = REPAIR_TOL, iters: int = 50) -> np.ndarray | None:
    """Gauss-Newton projection onto the realization constraints."""
    m, d = vecs.shape
    x = _pack(vecs)
    for _ in range(iters):
        res, J = _structure(x, m, d, edges)
        if np.max(np.abs(res)) < tol:
            return _unpack(x, m, d)
        x = x - np.linalg.lstsq(J, res, rcond=None)[0]
    res, _ = _structure(x, m, d, edges)
    return _unpack(x, m, d) if np.max(np.abs(res)) < 1e-11 else None


def _frame_step(vecs: np.ndarray, phi: np.ndarray, pb: _Problem, y: int, z: int, W: float) -> np.ndarray:
    m, d = vecs.shape
    sign = 1.0 if z == 0 else -1.0

    def obj(x):
        q, G = _overlaps(x, m, d, phi)
        return -sign * q[y], -sign * G[y]

    def cons(x):
        res, _ = _structure(x, m, d, pb.edges)
        q, _ = _overlaps(x, m, d, phi)
        return np.append(res, pb.w @ q - W)

    def cons_jac(x):
        _, J = _structure(x, m, d, pb.edges)
        _, G = _overlaps(x, m, d, phi)
        return np.vstack([J, pb.w @ G])

    out = minimize(obj, _pack(vecs), jac=True, method="SLSQP",
                   constraints=[{"type": "eq", "fun": cons, "jac": cons_jac}],
                   options={"maxiter": 200, "ftol": 1e-12})
    return _unpack(out.x, m, d)


# -- see-saw driver -----------------------------------------------------------


def _seesaw(vecs: np.ndarray, pb: _Problem, y: int, z: int, W: float, tol: float, max_iter: int):
    """Alternate state and frame steps from ``vecs``; returns (q, vecs, phi, iters) or None."""
    vecs = _repair(vecs, pb.edges)
    if vecs is None:
        return None
    step = _state_step(_witness_op(vecs, pb.w), _effect(vecs, y, z), W)
    if step is None:
        # move the frame towards feasibility first, from the state maximising the witness
        phi = fix_phase(np.linalg.eigh(_witness_op(vecs, pb.w))[1][:, -1 if W > 0 else 0])
        vecs = _repair(_frame_step(vecs, phi, pb, y, z, W), pb.edges)
        if vecs is None:
            return None
        step = _state_step(_witness_op(vecs, pb.w), _effect(vecs, y, z), W)
        if step is None:
            return None
    q, phi = step
    it = 0
    for it in range(1, max_iter + 1):
        cand = _repair(_frame_step(vecs, phi, pb, y, z, W), pb.edges)
        if cand is None:
            break
        nxt = _state_step(_witness_op(cand, pb.w), _effect(cand, y, z), W)
        if nxt is None or nxt[0] < q - 1e-12:
            break
        improved = nxt[0] - q
        vecs, (q, phi) = cand, nxt
        if improved < tol:
            break
    return q, vecs, phi, it


def _coloring_seed(pb: _Problem) -> np.ndarray:
    """Basis vectors from a d-coloring whose heaviest class has maximal base weight."""
    g: WeightedGraph = pb.task.graph
    d = pb.d
    best = None
    for mask in sorted(maximal_independent_sets(g), key=lambda s: -sum(pb.w[i] for i in _bits(s))):
        rest = [v for v in range(g.n) if not mask >> v & 1]
        cols = _is_colorable(g.induced(rest), d - 1)
        if cols is not None:
            best = [0] * g.n
            for v, c in zip(rest, cols):
                best[v] = c + 1
            break
    if best is None:
        _, col = min_improper(g, d)
        best = [c - 1 for c in col.assignment]
    return np.eye(d, dtype=complex)[best]


def _seed_vectors(pb: _Problem, restart: int, seed: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, restart])))
    canon = np.asarray(pb.ew.vectors, dtype=complex)
    if restart == 0:
        return canon
    color = _coloring_seed(pb)
    if restart == 1:
        return color
    noise = rng.normal(size=canon.shape) + 1j * rng.normal(size=canon.shape)
    kind = restart % 3
    if kind == 0:
        return noise
    base = canon if kind == 1 else color
    return base + rng.uniform(0.05, 0.5) * noise


def _solve_target(pb, y, z, W, starts, tol, max_iter):
    best = None
    for vecs in starts:
        r = _seesaw(vecs, pb, y, z, W, tol, max_iter)
        if r is not None and (best is None or r[0] > best[0] + 1e-12):
            best = r
    return best


def _finish(pb: _Problem, S_o: float, W: float, found: list) -> GuessResult:
    if not found:
        raise ValidationError(f"no feasible strategy found at S_o={S_o}")
    vecs, phi, it = max(found, key=lambda r: pb.p_guess(r[0], r[1])[0])
    # land exactly on W with the most favourable state for the strongest target
    p, (y, z) = pb.p_guess(vecs, phi)
    step = _state_step(_witness_op(vecs, pb.w), _effect(vecs, y, z), W)
    if step is not None:
        phi = step[1]
    p, (y, z) = pb.p_guess(vecs, phi)
    p = min(p, 1.0)
    return GuessResult(S_o, p, -math.log2(p) if p < 1 else 0.0, (y + 1, z), vecs, fix_phase(phi), it)


def h_infinity(task: Task, ew: ExtendedWitness, S_o: float, y_range: str = "all",
               restarts: int = 32, seed: int = 0, tol: float = 1e-8, max_iter: int = 500,
               warm: list | None = None, _problem: _Problem | None = None) -> GuessResult:
    """Heuristic ``(p_guess, H_min)`` at observed figure of merit ``S_o``.

    ``warm`` is an optional list of vector sets (one per target or shared)
    used as extra starting points.
    """
    pb = _problem or _Problem(task, ew, y_range)
    pb.check(S_o)
    W = pb.witness(S_o)
    starts = [_seed_vectors(pb, r, seed) for r in range(max(restarts, 1))] + list(warm or [])
    found = []
    for y, z in pb.targets:
        r = _solve_target(pb, y, z, W, starts, tol, max_iter)
        if r is not None:
            found.append((r[1], r[2], r[3]))
    return _finish(pb, S_o, W, found)


def verify_guess(task: Task, res: GuessResult, tol: float = 1e-6) -> bool:
    """The found strategy reproduces ``S_o`` and has the perfect-correlation structure."""
    qs = res.strategy()
    return abs(quantum_value(task, qs) - res.S_o) <= tol and certify(task, qs).certified


def _curve_chunk(args):
    task, ew, grid, y_range, restarts, seed, tol, max_iter = args
    pb = _Problem(task, ew, y_range)
    out, warm = [], []
    for S_o in grid:
        res = h_infinity(task, ew, S_o, y_range, restarts, seed, tol, max_iter, warm, pb)
        out.append((S_o, res.p_guess, res.h_min))
        warm = [res.vectors]
    return out


def randomness_curve(task: Task, ew: ExtendedWitness, points: int = 50, y_range: str = "all",
                     restarts: int = 4, seed: int = 0, tol: float = 1e-8, max_iter: int = 500,
                     threads: int = 1) -> RandomnessCurve:
    """``H_min`` on an evenly spaced grid from ``S_c`` to ``S_beta``.

    Each point warm-starts from the previous point's best vectors.  With
    ``threads > 1`` the grid is cut into contiguous chunks evaluated in
    separate processes; results do not depend on the thread count only if
    ``threads`` is fixed, since chunk boundaries reset the warm start.
    """
    if points < 2:
        raise ValidationError("a curve needs at least 2 points")
    pb = _Problem(task, ew, y_range)
    grid = list(np.linspace(pb.S_c, pb.S_beta, points))
    if threads <= 1:
        pts = _curve_chunk((task, ew, grid, y_range, restarts, seed, tol, max_iter))
    else:
        chunks = [c.tolist() for c in np.array_split(np.array(grid), threads) if len(c)]
        with ProcessPoolExecutor(max_workers=threads) as ex:
            parts = ex.map(_curve_chunk, [(task, ew, c, y_range, restarts, seed, tol, max_iter) for c in chunks])
            pts = [p for part in parts for p in part]
    return RandomnessCurve(pts, restarts, tol, y_range, seed)
