import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from prwalk import rng

M = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def splitmix64_reference(state):
    """Pure Python SplitMix64: returns (new state, output)."""
    state = (state + GOLDEN) & M
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M
    return state, z ^ (z >> 31)


def test_first_output_for_seed_zero():
    _, out = splitmix64_reference(0)
    assert out == 0xE220A8397B1DCDAF
    assert int(rng.mix64(np.uint64(GOLDEN))) == out


@given(st.integers(0, M))
def test_mix64_matches_reference(seed):
    _, out = splitmix64_reference(seed)
    assert int(rng.mix64(np.uint64((seed + GOLDEN) & M))) == out


@given(st.integers(0, M), st.integers(0, 10**6))
def test_step_uniform_is_stream_of_splitmix(tseed, k):
    state = (tseed + k * GOLDEN) & M
    _, out = splitmix64_reference(state)
    u = rng.step_uniform(np.uint64(tseed), k)
    assert u == (out >> 11) / 2.0**53
    assert 0.0 <= u < 1.0


def test_walk_seeds_distinct_and_negative_seeds_fold():
    seeds = {rng.walk_seed(5, i) for i in range(10_000)}
    assert len(seeds) == 10_000
    assert rng.as_seed(-1) == np.uint64(M)


def test_site_uniforms_look_uniform():
    u = np.array([rng.site_uniform(np.uint64(3), x, y, 0) for x in range(-50, 50) for y in range(-50, 50)])
    assert abs(u.mean() - 0.5) < 0.01
    assert abs(np.mean(u < 0.25) - 0.25) < 0.02
    assert len(np.unique(u)) == len(u)
