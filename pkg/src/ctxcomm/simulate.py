"""Monte Carlo simulation of the prepare-and-measure task and the QKD session.

Randomness comes from a Philox counter-based generator keyed by the seed.
Rounds are grouped into fixed-size blocks and block ``b`` starts at counter
``b * 2^192``, so any contiguous range of blocks can be simulated on its own
and merged with others bit-exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .bounds import ClassicalStrategy, QuantumStrategy, classical_bound, task_alpha_delta
from .crypto import shannon
from .errors import ValidationError
from .task import Task, UNDEFINED

BLOCK = 1 << 16

SCORED = 1
TEST = 2
SIFTED = 4
HIT = 8  # z == f(x, y)

ROUND_DTYPE = np.dtype([("x", "<u4"), ("y", "<u4"), ("z", "u1"), ("flags", "u1")])


def _block_rng(seed: int, block: int) -> np.random.Generator:
    if seed < 0:
        raise ValidationError("seed must be nonnegative")
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, block]))


@dataclass
class RoundLog:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    flags: np.ndarray
    seed: int
    message: np.ndarray | None = None

    @property
    def rounds(self) -> int:
        return len(self.x)

    def to_bytes(self) -> bytes:
        rec = np.empty(self.rounds, dtype=ROUND_DTYPE)
        rec["x"], rec["y"], rec["z"], rec["flags"] = self.x, self.y, self.z, self.flags
        return rec.tobytes()

    @classmethod
    def from_bytes(cls, data: bytes, seed: int) -> "RoundLog":
        if len(data) % ROUND_DTYPE.itemsize:
            raise ValidationError("round log length is not a whole number of records")
        rec = np.frombuffer(data, dtype=ROUND_DTYPE)
        return cls(rec["x"].astype(np.int64), rec["y"].astype(np.int64),
                   rec["z"].astype(np.int8), rec["flags"].astype(np.uint8), seed)

    @classmethod
    def concat(cls, logs: list["RoundLog"]) -> "RoundLog":
        msgs = [lg.message for lg in logs]
        return cls(np.concatenate([lg.x for lg in logs]), np.concatenate([lg.y for lg in logs]),
                   np.concatenate([lg.z for lg in logs]), np.concatenate([lg.flags for lg in logs]),
                   logs[0].seed, None if any(m is None for m in msgs) else np.concatenate(msgs))


@dataclass
class Estimate:
    value: float
    stderr: float
    rounds: int
    covered: bool  # every scored pair was sampled at least once

    def within(self, exact: float, k: float = 3.0) -> bool:
        return abs(self.value - exact) <= k * self.stderr + 1e-12


def _draw_block(task: Task, rng: np.random.Generator, size: int, test_fraction: float):
    x = rng.integers(0, task.size_x, size)
    y = rng.integers(1, task.size_y + 1, size)
    u = rng.random(size)
    v = rng.random(size) if test_fraction else None
    return x, y, u, v


def _run(task: Task, sampler, rounds: int, seed: int, test_fraction: float = 0.0,
         first_block: int = 0) -> RoundLog:
    """``sampler(x, y, rng) -> (z, message | None)``."""
    if rounds < 0:
        raise ValidationError("rounds must be nonnegative")
    f = np.asarray(task.f)
    scored = task.t_float > 0
    logs = []
    done, b = 0, first_block
    while done < rounds:
        size = min(BLOCK, rounds - done)
        rng = _block_rng(seed, b)
        x, y, u, v = _draw_block(task, rng, size, test_fraction)
        z, msg = sampler(x, y, u, rng)
        flags = np.where(scored[x, y - 1], SCORED, 0)
        flags |= np.where(f[x, y - 1] == z, HIT, 0)
        if v is not None:
            flags |= np.where(v < test_fraction, TEST, 0)
        logs.append(RoundLog(x, y, z.astype(np.int8), flags.astype(np.uint8), seed, msg))
        done += size
        b += 1
    if not logs:
        empty = np.zeros(0, dtype=np.int64)
        return RoundLog(empty, empty, empty.astype(np.int8), empty.astype(np.uint8), seed)
    return RoundLog.concat(logs)


def _quantum_sampler(qs: QuantumStrategy):
    p1 = 1.0 - qs.p_zero()

    def sample(x, y, u, rng):
        return (u < p1[x, y - 1]).astype(np.int8), None

    return sample


def _classical_sampler(cs: ClassicalStrategy):
    lam_cdf = np.cumsum(cs.mixture)
    enc_cdf = np.cumsum(cs.encodings, axis=2)

    def sample(x, y, u, rng):
        lam = np.minimum(np.searchsorted(lam_cdf, rng.random(len(x)), side="right"), len(lam_cdf) - 1)
        c = enc_cdf[lam, x]  # (rounds, d)
        m = np.minimum((rng.random(len(x))[:, None] >= c).sum(axis=1), c.shape[1] - 1)
        z = (u < cs.decodings[lam, y - 1, m]).astype(np.int8)
        return z, m

    return sample


def estimate(task: Task, log: RoundLog, mask: np.ndarray | None = None) -> Estimate:
    """Stratified estimator ``sum t(x,y) phat(x,y)`` over scored pairs.

    Its variance is ``sum t^2 p(1-p) / n_xy``; the reported error plugs in ``phat``.
    """
    sel = np.ones(log.rounds, dtype=bool) if mask is None else mask
    x, y, hit = log.x[sel], log.y[sel], (log.flags[sel] & HIT) > 0
    shape = (task.size_x, task.size_y)
    idx = x * task.size_y + (y - 1)
    n = np.bincount(idx, minlength=shape[0] * shape[1]).reshape(shape)
    s = np.bincount(idx, weights=hit, minlength=shape[0] * shape[1]).reshape(shape)
    t = task.t_float
    scored = t > 0
    covered = bool(np.all(n[scored] > 0))
    p = np.divide(s, n, out=np.zeros(shape), where=n > 0)
    value = float(np.sum(t[scored] * p[scored]))
    var = np.divide(t ** 2 * p * (1 - p), n, out=np.zeros(shape), where=(n > 0) & scored)
    return Estimate(value, math.sqrt(float(var.sum())), int(sel.sum()), covered)


def simulate_quantum(task: Task, qs: QuantumStrategy, rounds: int, seed: int = 0) -> tuple[Estimate, RoundLog]:
    if rounds < 1:
        raise ValidationError("rounds must be >= 1")
    if qs.states.shape[0] != task.size_x or qs.effects.shape[0] != task.size_y:
        raise ValidationError("strategy does not match the task's input sizes")
    qs.validate()
    log = _run(task, _quantum_sampler(qs), rounds, seed)
    return estimate(task, log), log


def simulate_classical(task: Task, cs: ClassicalStrategy, rounds: int, seed: int = 0) -> tuple[Estimate, RoundLog]:
    if rounds < 1:
        raise ValidationError("rounds must be >= 1")
    if cs.d > task.d:
        raise ValidationError(f"message alphabet {cs.d} exceeds the task dimension {task.d}")
    if cs.encodings.shape[1] != task.size_x or cs.decodings.shape[1] != task.size_y:
        raise ValidationError("strategy does not match the task's input sizes")
    log = _run(task, _classical_sampler(cs), rounds, seed)
    return estimate(task, log), log


@dataclass
class QkdSession:
    alice_key: np.ndarray
    bob_key: np.ndarray
    key_inputs: np.ndarray = field(repr=False)  # announced x for each key bit
    test_rounds: np.ndarray = field(repr=False)
    estimate: Estimate
    threshold: float
    aborted: bool
    raw_key_fraction: float  # sifted key bits per non-test round
    empirical_key_rate: float  # P_s-hat * E-hat over non-test rounds
    log: RoundLog = field(repr=False)

    @property
    def agreement(self) -> float:
        return float(np.mean(self.alice_key == self.bob_key)) if len(self.alice_key) else 1.0


def qkd_session(task: Task, qs: QuantumStrategy, rounds: int, test_fraction: float = 0.1,
                seed: int = 0, mu: float = 1.0, S_c: Fraction | None = None) -> QkdSession:
    """Run the protocol: test rounds estimate S, the rest are sifted into a key.

    A non-test round is kept when ``y`` equals ``x`` or is one of its
    neighbours (``x >= 1``), or when ``x = 0`` and ``y <= n``; both parties
    then take ``f(x, y)`` (Alice) and ``z`` (Bob) as key bit.  The session
    aborts when the test estimate is at most ``S_c + 3 sigma``.
    """
    if not 0 < test_fraction <= 1:
        raise ValidationError("test_fraction must lie in (0, 1]")
    if S_c is None:
        S_c = classical_bound(task, *task_alpha_delta(task))
    if mu != 1.0:
        qs = qs.with_noise(mu)
    qs.validate()
    log = _run(task, _quantum_sampler(qs), rounds, seed, test_fraction)
    test = (log.flags & TEST) > 0
    est = estimate(task, log, test)
    threshold = float(S_c) + 3 * est.stderr
    aborted = est.value <= threshold
    f = np.asarray(task.f)
    keyish = ~test & (f[log.x, log.y - 1] != UNDEFINED)
    log.flags[keyish] |= SIFTED
    alice = f[log.x[keyish], log.y[keyish] - 1].astype(np.int8)
    bob = log.z[keyish]
    non_test = int((~test).sum())
    kept = int(keyish.sum())
    rate = raw = 0.0
    if non_test:
        raw = kept / non_test
        if kept:
            agree = alice == bob
            p0 = float(np.sum(agree & (alice == 0))) / kept
            p1 = float(np.sum(agree & (alice == 1))) / kept
            rate = raw * shannon(p0, p1)
    return QkdSession(alice, bob, log.x[keyish], np.nonzero(test)[0], est, threshold,
                      bool(aborted), raw, rate, log)
