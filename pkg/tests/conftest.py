import itertools
import sys

import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

PERMUTATIONS = [np.eye(4)[list(p)] for p in itertools.permutations(range(4))]


@st.composite
def stochastic_matrices(draw, min_entry=0.0, zeros=True):
    """Row-stochastic 4x4 matrices, optionally with exact zeros."""
    raw = np.array(
        draw(st.lists(st.floats(min_entry, 1.0), min_size=16, max_size=16)), dtype=float
    ).reshape(4, 4)
    if zeros:
        mask = np.array(draw(st.lists(st.booleans(), min_size=16, max_size=16))).reshape(4, 4)
        raw[mask] = 0.0
    for i in range(4):
        if raw[i].sum() <= 1e-6:
            raw[i, draw(st.integers(0, 3))] = 1.0
    return raw / raw.sum(axis=1, keepdims=True)


@st.composite
def doubly_stochastic_matrices(draw):
    """Convex combinations of permutation matrices (Birkhoff)."""
    idx = draw(st.lists(st.integers(0, 23), min_size=1, max_size=6, unique=True))
    w = np.array(draw(st.lists(st.floats(0.01, 1.0), min_size=len(idx), max_size=len(idx))))
    w = w / w.sum()
    return sum(wi * PERMUTATIONS[i] for wi, i in zip(w, idx))


@st.composite
def positive_stochastic(draw):
    return draw(stochastic_matrices(min_entry=0.01, zeros=False))


sites = st.tuples(st.integers(-50, 50), st.integers(-50, 50))
directions = st.integers(0, 3)


@pytest.fixture(scope="session")
def table():
    from prwalk.dual import solve_embedding

    return solve_embedding()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(results):
        terminalreporter.write_line(results[k].line())
    passed = sum(r.passed for r in results.values())
    terminalreporter.write_line(f"{passed}/{len(results)} criteria passed")
