"""Counter-based pseudorandom streams.

Every random number in the package is a hash of integer coordinates: site
randomness hashes ``(seed, x1, x2, stream)``, walk randomness hashes
``(trajectory seed, step index)``.  Nothing is stateful, so any site or step
can be regenerated in O(1) and trajectories can be split across workers
without coordination.  The mixer is the SplitMix64 finalizer.
"""

import numba as nb
import numpy as np

MASK64 = (1 << 64) - 1

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


@nb.njit(inline="always", cache=True)
def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@nb.njit(inline="always", cache=True)
def to_unit(h):
    """Top 53 bits as a double in [0, 1)."""
    return (h >> _S11) * _INV53


@nb.njit(cache=True)
def site_hash(seed, x1, x2, stream):
    h = mix64(np.uint64(seed) + np.uint64(stream + 1) * _GOLDEN)
    h = mix64(h ^ np.uint64(np.int64(x1)))
    h = mix64(h + np.uint64(np.int64(x2)) * _GOLDEN)
    return h


@nb.njit(cache=True)
def site_uniform(seed, x1, x2, stream):
    return to_unit(site_hash(seed, x1, x2, stream))


@nb.njit(cache=True)
def trajectory_seed(master, index):
    return mix64(mix64(np.uint64(master)) + np.uint64(index + 1) * _GOLDEN)


@nb.njit(inline="always", cache=True)
def step_uniform(tseed, k):
    return to_unit(mix64(tseed + np.uint64(k + 1) * _GOLDEN))


def as_seed(seed) -> np.uint64:
    """Fold any Python integer (negative included) into 64 bits."""
    return np.uint64(int(seed) & MASK64)


def walk_seed(master, index: int) -> int:
    """Seed of trajectory ``index`` in an ensemble with the given master seed."""
    return int(trajectory_seed(as_seed(master), np.int64(index)))
