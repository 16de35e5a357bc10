"""Random transition matrices with prescribed structure."""

from __future__ import annotations

import itertools

import numpy as np

from .core import is_primitive

_PERMS = [np.eye(4)[list(p)] for p in itertools.permutations(range(4))]


def random_doubly_stochastic(rng: np.random.Generator, max_terms: int = 5) -> np.ndarray:
    """Convex combination of 1..max_terms random permutation matrices.

    Few terms give sparse matrices, so both primitive and non-primitive
    products turn up often.
    """
    k = int(rng.integers(1, max_terms + 1))
    idx = rng.choice(len(_PERMS), size=k, replace=False)
    w = rng.dirichlet(np.ones(k))
    return sum(wi * _PERMS[i] for wi, i in zip(w, idx))


def random_stochastic(rng: np.random.Generator, alpha_range=(0.3, 3.0)) -> np.ndarray:
    """Rows drawn from a symmetric Dirichlet with a random concentration."""
    alpha = rng.uniform(*alpha_range)
    return rng.dirichlet(np.full(4, alpha), size=4)


def sinkhorn(k: np.ndarray, rows: np.ndarray, cols: np.ndarray, tol: float = 1e-15,
             max_iter: int = 10_000) -> np.ndarray:
    """Scale a positive matrix to the given row and column sums."""
    k = np.array(k, dtype=float)
    for _ in range(max_iter):
        k *= (rows / k.sum(axis=1))[:, None]
        k *= (cols / k.sum(axis=0))[None, :]
        if np.max(np.abs(k.sum(axis=1) - rows)) <= tol:
            return k
    return k


def random_balanced(rng: np.random.Generator, p1=None) -> np.ndarray:
    """Positive stochastic matrix whose stationary vector is
    ``(p1, p2, p1, p2)`` with ``p1 + p2 = 1/2``.

    Built from a random flow ``F`` with row and column sums ``pi``:
    ``Q = F / pi`` row by row satisfies ``pi Q = pi``.
    """
    if p1 is None:
        p1 = rng.uniform(0.05, 0.45)
    pi = np.array([p1, 0.5 - p1, p1, 0.5 - p1])
    flow = sinkhorn(rng.uniform(0.05, 1.0, size=(4, 4)), pi, pi)
    q = flow / pi[:, None]
    return q / q.sum(axis=1, keepdims=True)


def random_primitive(rng: np.random.Generator) -> np.ndarray:
    while True:
        q = random_stochastic(rng)
        if is_primitive(q):
            return q
