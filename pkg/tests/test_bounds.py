import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ctxcomm.bounds import (ClassicalStrategy, QuantumStrategy, canonical_strategy, certify, classical_bound,
                            classical_bruteforce, classical_value, equality_complexities, merge_bruteforce,
                            quantum_value, ratio_bound_log2, ratio_bounds, s_beta, task_alpha_delta)
from ctxcomm.errors import ResourceCapExceeded, ValidationError
from ctxcomm.graph import WeightedGraph
from ctxcomm.quantum import Realization, maximally_mixed, random_state
from ctxcomm.task import UNDEFINED, build_task, extend_preset, task_from_graph
from ctxcomm.witnesses import get_witness, newman


def preset_task(name):
    ew = extend_preset(name)
    return build_task(ew), ew


def naive_optimum(task):
    """Every encoding, then Bob's best reply per (y, message)."""
    best = Fraction(-1)
    for enc in itertools.product(range(task.d), repeat=task.size_x):
        total = Fraction(0)
        for y in range(task.size_y):
            for m in range(task.d):
                gain = [Fraction(0), Fraction(0)]
                for x in range(task.size_x):
                    if enc[x] == m and task.f[x, y] != UNDEFINED:
                        gain[task.f[x, y]] += task.t[x][y]
                total += max(gain)
        best = max(best, total)
    return best


@st.composite
def small_tasks(draw):
    n = draw(st.integers(1, 4))
    k = draw(st.integers(0, 2))
    m = n + k
    pairs = [(a, b) for a in range(m) for b in range(a + 1, m)]
    edges = [p for p in pairs if draw(st.booleans())]
    w = draw(st.lists(st.fractions(0, 2, max_denominator=2), min_size=n, max_size=n))
    d = draw(st.integers(2, 3))
    return task_from_graph(n, d, WeightedGraph.from_edges(m, edges), w)


@given(small_tasks())
def test_bruteforce_matches_naive_enumeration(task):
    val, strat, _ = classical_bruteforce(task)
    assert val == naive_optimum(task)
    assert classical_value(task, strat) == val


@given(small_tasks(), st.integers(1, 5))
def test_partitioned_bruteforce_merges(task, parts):
    total = task.d ** task.size_x
    cuts = sorted({0, total, *np.linspace(0, total, parts + 1).astype(int).tolist()})
    pieces = [classical_bruteforce(task, start=a, stop=b) for a, b in zip(cuts, cuts[1:]) if b > a]
    assert merge_bruteforce(pieces)[::2] == classical_bruteforce(task)[::2]


@pytest.mark.parametrize("preset,expected", [("kcbs-k3", Fraction(32, 35)), ("c7-k4", Fraction(44, 48))])
def test_bound_and_bruteforce_agree_on_presets(preset, expected):
    task, _ = preset_task(preset)
    assert classical_bound(task, *task_alpha_delta(task)) == expected
    assert classical_bruteforce(task)[0] == expected


def test_ceg18_bound():
    task, _ = preset_task("ceg18-k0")
    assert classical_bound(task, *task_alpha_delta(task)) == Fraction(127, 144)


def test_bruteforce_cap():
    task, _ = preset_task("ceg18-k0")
    with pytest.raises(ResourceCapExceeded):
        classical_bruteforce(task)


def test_constant_task_is_won():
    task = task_from_graph(1, 2, WeightedGraph.from_edges(1, []), [1])
    assert classical_bruteforce(task)[0] == 1


def test_constant_message_strategy():
    task, _ = preset_task("kcbs-k3")
    cs = ClassicalStrategy.deterministic([0] * task.size_x, np.zeros((task.size_y, 3)), 3)
    zero_mass = sum((task.t[x][y] for x in range(task.size_x) for y in range(task.size_y) if task.f[x, y] == 0),
                    Fraction(0))
    assert classical_value(task, cs) == zero_mass


def test_classical_strategy_validation():
    with pytest.raises(ValidationError):
        ClassicalStrategy(2, np.full((3, 2), 0.7), np.zeros((2, 2)))
    with pytest.raises(ValidationError):
        ClassicalStrategy(1, np.full((3, 2), 0.5), np.zeros((2, 2)))


@pytest.mark.parametrize("preset,expected", [
    ("kcbs-k3", (30 + math.sqrt(5)) / 35),
    ("ceg18-k0", (126 + 4.5) / 144),
])
def test_canonical_quantum_value(preset, expected):
    task, ew = preset_task(preset)
    assert quantum_value(task, canonical_strategy(ew)) == pytest.approx(expected, abs=1e-12)
    assert s_beta(ew, task).value == pytest.approx(expected, abs=1e-12)


def test_ceg18_any_state_gives_the_same_value():
    task, ew = preset_task("ceg18-k0")
    rng = np.random.default_rng(5)
    for _ in range(100):
        qs = canonical_strategy(ew, random_state(4, rng))
        assert quantum_value(task, qs) == pytest.approx(130.5 / 144, abs=1e-12)
    assert quantum_value(task, canonical_strategy(ew, maximally_mixed(4))) == pytest.approx(130.5 / 144, abs=1e-12)


@pytest.mark.parametrize("preset,value", [("kcbs-k3", 0.921), ("c7-k4", 0.923)])
def test_s_beta_rows(preset, value):
    task, ew = preset_task(preset)
    assert round(s_beta(ew, task).value, 3) == value


def test_s_beta_yo13():
    task, ew = preset_task("yo13-k12")
    sb = s_beta(ew, task)
    assert sb.beta == pytest.approx(11 / 3, abs=1e-12)


def test_all_zero_effects_score_the_neighbour_family():
    task, ew = preset_task("kcbs-k3")
    qs = canonical_strategy(ew)
    qs = QuantumStrategy(qs.states, np.zeros_like(qs.effects))
    assert quantum_value(task, qs) == pytest.approx(task.sum_neighbors / float(task.N), abs=1e-12)


@pytest.mark.parametrize("preset", ["kcbs-k3", "kcbs-k4", "c7-k4", "ceg18-k0", "yo13-k12"])
def test_canonical_certifies_and_beats_alpha(preset):
    task, ew = preset_task(preset)
    cert = certify(task, canonical_strategy(ew))
    assert cert.certified and cert.witness_exceeds_alpha
    assert quantum_value(task, canonical_strategy(ew)) <= 1


@pytest.mark.parametrize("preset", ["kcbs-k3", "ceg18-k0"])
@given(mu=st.floats(0, 1, exclude_max=True))
def test_noisy_strategies_never_certify(preset, mu):
    # the deficit p(0|x,x) = mu + (1-mu)/d is only resolvable above the tolerance
    task, ew = preset_task(preset)
    tol = 1e-9
    cert = certify(task, canonical_strategy(ew).with_noise(mu), tol)
    deficit = (1 - mu) * (1 - 1 / task.d)
    if deficit > 2 * tol:
        assert not cert.certified and cert.reasons


def test_certify_reports_example():
    task, ew = preset_task("kcbs-k3")
    cert = certify(task, canonical_strategy(ew).with_noise(0.99))
    assert not cert.certified
    cert = certify(task, canonical_strategy(ew))
    assert cert.witness_value == pytest.approx(math.sqrt(5), abs=1e-9) and cert.alpha == 2


def test_half_identity_effect_breaks_certification():
    task, ew = preset_task("kcbs-k3")
    qs = canonical_strategy(ew)
    eff = qs.effects.copy()
    eff[0] = np.eye(3) / 2
    assert not certify(task, QuantumStrategy(qs.states, eff)).certified


@given(st.integers(0, 2**32 - 1))
def test_quantum_value_in_unit_interval(seed):
    task, ew = preset_task("kcbs-k3")
    rng = np.random.default_rng(seed)
    states = np.array([random_state(3, rng) for _ in range(task.size_x)])
    effects = np.array([random_state(3, rng) for _ in range(task.size_y)])
    effects = effects / np.linalg.eigvalsh(effects)[:, -1][:, None, None]
    assert 0 <= quantum_value(task, QuantumStrategy(states, effects)) <= 1


def test_equality_complexities():
    w = get_witness("kcbs5")
    out = equality_complexities(w.graph, w.realization)
    assert (out["C"], out["Q_upper"]) == (3, 3)
    assert out["S_G"] == pytest.approx(1.0, abs=1e-12)
    w = get_witness("ceg18")
    out = equality_complexities(w.graph, w.realization)
    assert (out["C"], out["Q_upper"]) == (5, 4)
    k4 = WeightedGraph.complete(4)
    out = equality_complexities(k4, Realization(np.eye(4), k4))
    assert (out["C"], out["Q_upper"]) == (4, 4)


def test_ratio_bounds():
    y = get_witness("yo13").graph
    assert ratio_bounds(y, 3, 2, "fractional") == pytest.approx(2 * math.log2(35 / 33), abs=1e-12)
    assert 2 ** ratio_bounds(y, 3, 2, "fractional") == pytest.approx(1.1248, abs=1e-4)
    c5 = get_witness("kcbs5").graph
    assert ratio_bounds(c5, 3, 1, "fractional") == pytest.approx(math.log2(2.5 / 3), abs=1e-12)
    assert ratio_bound_log2("newman", d_min=4096) == pytest.approx(17.6, abs=0.1)
    with pytest.raises(ValidationError):
        ratio_bounds(c5, 3, 3, "chromatic-remark")
    with pytest.raises(ValidationError):
        ratio_bound_log2("nope")


def test_newman_has_no_advantage_at_d8():
    w = newman(8)
    assert w.state_independent
