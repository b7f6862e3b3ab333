import itertools
import os
from pathlib import Path

from hypothesis import HealthCheck, settings, strategies as st

from vccount.graph import Graph

settings.register_profile(
    "default",
    max_examples=int(os.environ.get("VCCOUNT_HYPOTHESIS_EXAMPLES", "600")),
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

FIG4 = Path(__file__).resolve().parents[1] / "src" / "vccount" / "data" / "fig4.edges"


@st.composite
def graphs(draw, max_n=10, min_n=1, p=None):
    n = draw(st.integers(min_n, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    if p is None:
        chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=min(len(pairs), 2 * n))) if pairs else []
    else:
        chosen = [e for e in pairs if draw(st.floats(0, 1)) < p]
    return Graph(n, tuple(sorted(chosen)))


@st.composite
def trees(draw, max_n=12):
    n = draw(st.integers(1, max_n))
    edges = []
    for v in range(1, n):
        edges.append((draw(st.integers(0, v - 1)), v))
    return Graph(n, tuple(sorted(edges)))


def brute_min_covers(g: Graph) -> list[frozenset[int]]:
    """Every minimum vertex cover by plain subset enumeration (tiny graphs only)."""
    for k in range(g.n + 1):
        found = [
            frozenset(s)
            for s in itertools.combinations(range(g.n), k)
            if all(u in s or v in s for u, v in g.edges)
        ]
        if found:
            return found
    return [frozenset()]


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
