import itertools
import os
import random

import pytest
from hypothesis import HealthCheck, settings

from beeid import presets
from beeid.matching import BipartiteGraph

settings.register_profile(
    "default", max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# (criterion, passed, detail) lines filled in by test_acceptance
ACCEPTANCE: list[tuple[int, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def simplex():
    return presets.example1_simplex()


@pytest.fixture
def ex2():
    return presets.example2()


def perfect_matchings(g: BipartiteGraph):
    """All perfect matchings by brute force over permutations."""
    return [
        sigma
        for sigma in itertools.permutations(range(g.M))
        if all(g.has_edge(i, sigma[i]) for i in range(g.M))
    ]


def max_matching_size(g: BipartiteGraph) -> int:
    """Largest matching by brute force over subsets of left nodes."""
    best = 0
    for r in range(g.M, 0, -1):
        for left in itertools.combinations(range(g.M), r):
            for right in itertools.permutations(range(g.M), r):
                if all(g.has_edge(i, j) for i, j in zip(left, right)):
                    return r
    return best


def random_graph(rng: random.Random, M: int, density: float, plant: bool = True) -> BipartiteGraph:
    """Random bipartite graph; ``plant`` adds a random perfect matching."""
    edges = {(i, j) for i in range(M) for j in range(M) if rng.random() < density}
    if plant:
        sigma = list(range(M))
        rng.shuffle(sigma)
        edges |= {(i, sigma[i]) for i in range(M)}
    return BipartiteGraph.from_edges(M, sorted(edges))


def random_codebook_words(rng: random.Random, M: int, n: int) -> list[str]:
    words = set()
    while len(words) < M:
        words.add("".join(rng.choice("01") for _ in range(n)))
    return sorted(words)
