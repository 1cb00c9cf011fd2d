import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ctxcomm.errors import ValidationError
from ctxcomm.randomness import HEURISTIC_LABEL, _Problem, _state_step, h_infinity, randomness_curve, verify_guess
from ctxcomm.task import build_task, extend_preset


@pytest.fixture(scope="module")
def kcbs():
    ew = extend_preset("kcbs-k3")
    task = build_task(ew)
    return task, ew, _Problem(task, ew, "base")


def test_no_randomness_at_classical_bound(kcbs):
    task, ew, pb = kcbs
    res = h_infinity(task, ew, pb.S_c, "base", restarts=4, _problem=pb)
    assert res.h_min == 0.0 and res.p_guess == 1.0
    assert verify_guess(task, res)


def test_randomness_just_above_classical_bound(kcbs):
    task, ew, pb = kcbs
    res = h_infinity(task, ew, pb.S_c + 0.001, "base", restarts=4, _problem=pb)
    assert res.h_min > 0
    assert verify_guess(task, res)


def test_maximal_violation_is_self_tested(kcbs):
    task, ew, pb = kcbs
    res = h_infinity(task, ew, pb.S_beta, "base", restarts=4, _problem=pb)
    # the handle state is forced: p_guess = 1 - 1/sqrt(5)
    assert res.p_guess == pytest.approx(1 - 1 / math.sqrt(5), abs=1e-5)
    assert 0 < res.h_min <= 1


def test_all_targets_leave_no_randomness_near_the_bound(kcbs):
    task, ew, _ = kcbs
    res = h_infinity(task, ew, _Problem(task, ew, "all").S_c + 0.001, "all", restarts=4)
    assert res.h_min == pytest.approx(0.0, abs=1e-6)


def test_out_of_range(kcbs):
    task, ew, pb = kcbs
    with pytest.raises(ValidationError):
        h_infinity(task, ew, pb.S_beta + 0.01, "base", _problem=pb)
    with pytest.raises(ValidationError):
        h_infinity(task, ew, pb.S_c - 0.01, "base", _problem=pb)
    with pytest.raises(ValidationError):
        h_infinity(task, ew, pb.S_c, "sideways")
    with pytest.raises(ValidationError):
        randomness_curve(task, ew, points=1)


def test_short_curve_is_monotone(kcbs):
    task, ew, _ = kcbs
    curve = randomness_curve(task, ew, points=5, y_range="base", restarts=3)
    p = [pt[1] for pt in curve.points]
    assert all(b <= a + 1e-3 for a, b in zip(p, p[1:]))
    assert curve.label == HEURISTIC_LABEL
    assert all(0 <= pt[2] <= 1 for pt in curve.points)


@settings(max_examples=40)
@given(st.integers(0, 2**32 - 1), st.integers(2, 4))
def test_state_step_beats_any_feasible_pure_state(seed, d):
    rng = np.random.default_rng(seed)
    h = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    A = h + h.conj().T
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    E = np.outer(v, v.conj()) / np.vdot(v, v).real
    phi = rng.normal(size=d) + 1j * rng.normal(size=d)
    phi /= np.linalg.norm(phi)
    W = float((phi.conj() @ A @ phi).real)
    val, best = _state_step(A, E, W)
    assert abs(np.linalg.norm(best) - 1) < 1e-12
    assert float((best.conj() @ A @ best).real) == pytest.approx(W, abs=1e-8)
    assert float((best.conj() @ E @ best).real) == pytest.approx(val, abs=1e-12)
    assert val >= float((phi.conj() @ E @ phi).real) - 1e-8


def test_state_step_infeasible():
    assert _state_step(np.diag([0.0, 1.0]), np.eye(2), 2.0) is None
