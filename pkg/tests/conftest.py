import itertools
from fractions import Fraction

from hypothesis import HealthCheck, settings, strategies as st

from ctxcomm.graph import WeightedGraph

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def graphs(draw, min_n=1, max_n=8, weighted=False):
    n = draw(st.integers(min_n, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    edges = [p for p, keep in zip(pairs, mask) if keep]
    weights = None
    if weighted:
        weights = draw(st.lists(st.fractions(min_value=0, max_value=3, max_denominator=4),
                                min_size=n, max_size=n))
    return WeightedGraph.from_edges(n, edges, weights)


def brute_alpha(g):
    best = Fraction(0)
    for r in range(g.n + 1):
        for s in itertools.combinations(range(g.n), r):
            if g.is_independent(s):
                best = max(best, sum((g.weights[v] for v in s), Fraction(0)))
    return best


def brute_chi(g):
    for k in range(1, g.n + 1):
        for cols in itertools.product(range(k), repeat=g.n):
            if all(cols[a] != cols[b] for a, b in g.edges):
                return k
    return 0


def brute_delta(g, d):
    best = g.n
    for cols in itertools.product(range(d), repeat=g.n):
        bad = set()
        for a, b in g.edges:
            if cols[a] == cols[b]:
                bad.update((a, b))
        best = min(best, len(bad))
    return best


# criterion -> list of (label, ok, detail); filled by test_acceptance.py
ACCEPTANCE: dict[str, list] = {}


def record(criterion: str, label: str, ok: bool, detail: str = "") -> bool:
    ACCEPTANCE.setdefault(criterion, []).append((label, bool(ok), detail))
    print(f"{criterion} {'PASS' if ok else 'FAIL'} {label} {detail}".rstrip())
    return bool(ok)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE, key=lambda c: int(c[2:])):
        checks = ACCEPTANCE[crit]
        failed = [label for label, ok, _ in checks if not ok]
        status = "PASS" if not failed else "FAIL"
        extra = f" (failed: {', '.join(failed)})" if failed else ""
        tr.write_line(f"{crit}: {status} {len(checks) - len(failed)}/{len(checks)} checks{extra}")
        for label, ok, detail in checks:
            tr.write_line(f"    {'ok ' if ok else 'BAD'} {label} {detail}".rstrip())
