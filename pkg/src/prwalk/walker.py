"""Second-order Markov walk: one step, whole trajectories, exact laws.

A step from state ``(x, d)`` draws ``d'`` from row ``d`` of the matrix at
``x`` by inverse CDF over the fixed order E, N, W, S and moves to
``(x + d', d')``.  The uniform for step ``k`` of a trajectory is a hash of
``(seed, k)``, so a trajectory is a pure function of its seed.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, NamedTuple, Optional

import numba as nb
import numpy as np

from .core import DIRECTION_VECTORS, Direction, Site
from .environments import Environment, env_row
from .errors import HorizonTooLargeError
from .rng import as_seed, step_uniform

MAX_EXACT_HORIZON = 24

_DX = np.array([1, 0, -1, 0], dtype=np.int64)
_DY = np.array([0, 1, 0, -1], dtype=np.int64)


class WalkerState(NamedTuple):
    position: Site
    incoming: Direction

    @classmethod
    def of(cls, position, incoming) -> "WalkerState":
        if isinstance(incoming, str):
            incoming = Direction.parse(incoming)
        return cls((int(position[0]), int(position[1])), Direction(incoming))

    def successor(self, d: Direction) -> "WalkerState":
        v = d.vector
        return WalkerState((self.position[0] + v[0], self.position[1] + v[1]), Direction(d))

    def __str__(self):
        return f"{self.position[0]} {self.position[1]} {self.incoming.name}"


@dataclass(frozen=True, eq=False)
class Trajectory:
    initial: WalkerState
    steps: np.ndarray  # uint8 direction codes, one per step

    def __len__(self):
        return len(self.steps)

    def positions(self) -> np.ndarray:
        """``(n + 1, 2)`` array of positions, starting with the initial one."""
        out = np.empty((len(self.steps) + 1, 2), dtype=np.int64)
        out[0] = self.initial.position
        if len(self.steps):
            out[1:] = np.cumsum(DIRECTION_VECTORS[self.steps], axis=0) + out[0]
        return out

    def directions(self) -> np.ndarray:
        """Incoming direction at times ``0..n``."""
        return np.concatenate(([int(self.initial.incoming)], self.steps)).astype(np.int64)

    def states(self):
        pos = self.positions()
        dirs = self.directions()
        return [WalkerState((int(p[0]), int(p[1])), Direction(int(d))) for p, d in zip(pos, dirs)]

    @property
    def final(self) -> WalkerState:
        p = self.positions()[-1]
        d = self.steps[-1] if len(self.steps) else self.initial.incoming
        return WalkerState((int(p[0]), int(p[1])), Direction(int(d)))

    def letters(self) -> str:
        return "".join(Direction(int(d)).name for d in self.steps)


@nb.njit(inline="always", cache=True)
def thresholds(row, t):
    """CDF cut points; cut points at or past the last positive entry are
    pushed above 1 so zero-probability tails can never be drawn."""
    last = 0
    for j in range(4):
        if row[j] > 0.0:
            last = j
    c = 0.0
    for j in range(3):
        c += row[j]
        t[j] = c if j < last else 2.0


@nb.njit(inline="always", cache=True)
def pick(t, u):
    return (u >= t[0]) + (u >= t[1]) + (u >= t[2])


@nb.njit(cache=True)
def pick_direction(row, u):
    t = np.empty(3)
    thresholds(row, t)
    return pick(t, u)


@nb.njit(cache=True)
def _walk(code, seed, iprm, fprm, table, x, y, d, n, tseed):
    steps = np.empty(n, dtype=np.uint8)
    row = np.empty(4)
    t = np.empty(3)
    for k in range(n):
        env_row(code, seed, iprm, fprm, table, x, y, d, row)
        thresholds(row, t)
        d = pick(t, step_uniform(tseed, k))
        x += _DX[d]
        y += _DY[d]
        steps[k] = d
    return steps


@nb.njit(cache=True)
def _first_return(code, seed, iprm, fprm, table, x0, y0, d0, horizon, tseed):
    row = np.empty(4)
    t = np.empty(3)
    x, y, d = x0, y0, d0
    for k in range(horizon):
        env_row(code, seed, iprm, fprm, table, x, y, d, row)
        thresholds(row, t)
        d = pick(t, step_uniform(tseed, k))
        x += _DX[d]
        y += _DY[d]
        if x == x0 and y == y0 and d == d0:
            return k + 1
    return -1


def _coerce_state(xi) -> WalkerState:
    return xi if isinstance(xi, WalkerState) else WalkerState.of(*xi)


def step(env: Environment, s: WalkerState, u: float) -> WalkerState:
    if not 0.0 <= u < 1.0:
        raise ValueError(f"u must lie in [0, 1), got {u}")
    s = _coerce_state(s)
    d = pick_direction(env.row(s.position, s.incoming), float(u))
    return s.successor(Direction(int(d)))


def simulate(env: Environment, xi, n: int, seed: int) -> Trajectory:
    if n < 0:
        raise ValueError("n must be nonnegative")
    xi = _coerce_state(xi)
    steps = _walk(
        *env.kernel_args(), xi.position[0], xi.position[1], int(xi.incoming), int(n), as_seed(seed)
    )
    return Trajectory(xi, steps)


def first_return(env: Environment, xi, horizon: int, seed: int) -> Optional[int]:
    """Smallest ``n <= horizon`` with ``(X_n, D_n) = xi`` along the walk
    of the given seed, or None."""
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    xi = _coerce_state(xi)
    k = _first_return(
        *env.kernel_args(), xi.position[0], xi.position[1], int(xi.incoming), int(horizon), as_seed(seed)
    )
    return None if k < 0 else int(k)


def counting_vector(t: Trajectory) -> np.ndarray:
    """Number of steps taken in each direction (E, N, W, S)."""
    return np.bincount(np.asarray(t.steps, dtype=np.int64), minlength=4)


def successors(env: Environment, s: WalkerState, _cache=None):
    """Positive-probability successors of ``s`` with their probabilities."""
    if _cache is not None:
        m = _cache.get(s.position)
        if m is None:
            m = _cache[s.position] = env.raw_matrix(s.position)
        row = m[s.incoming]
    else:
        row = env.row(s.position, s.incoming)
    return [(s.successor(Direction(j)), float(row[j])) for j in range(4) if row[j] > 0.0]


def exact_distribution(env: Environment, xi, n: int) -> Dict[WalkerState, float]:
    """Law of ``(X_n, D_n)`` by forward propagation from ``xi``.

    Raises
    ------
    HorizonTooLargeError
        For ``n > 24``.
    """
    if n > MAX_EXACT_HORIZON:
        raise HorizonTooLargeError(f"exact distribution limited to n <= {MAX_EXACT_HORIZON}, got {n}")
    if n < 0:
        raise ValueError("n must be nonnegative")
    dist = {_coerce_state(xi): 1.0}
    cache: dict = {}
    for _ in range(n):
        nxt: Dict[WalkerState, float] = defaultdict(float)
        for s, p in dist.items():
            for s2, q in successors(env, s, cache):
                nxt[s2] += p * q
        dist = dict(nxt)
    return dist


def exact_first_return(env: Environment, xi, n: int) -> np.ndarray:
    """``P(first return = k)`` for ``k = 0..n`` (entry 0 is always 0)."""
    if n > MAX_EXACT_HORIZON:
        raise HorizonTooLargeError(f"exact distribution limited to n <= {MAX_EXACT_HORIZON}, got {n}")
    xi = _coerce_state(xi)
    out = np.zeros(n + 1)
    dist = {xi: 1.0}
    cache: dict = {}
    for k in range(1, n + 1):
        nxt: Dict[WalkerState, float] = defaultdict(float)
        for s, p in dist.items():
            for s2, q in successors(env, s, cache):
                nxt[s2] += p * q
        out[k] = nxt.pop(xi, 0.0)
        dist = dict(nxt)
    return out
