"""Lattice directions, 4x4 transition matrices and their spectral predicates.

Every matrix in this package is indexed by incoming direction (row) and
outgoing direction (column), both in the fixed order E, N, W, S.  That order
is counterclockwise, so turning left is ``+1 (mod 4)`` and reversing is
``+2 (mod 4)``.
"""

from __future__ import annotations

import enum
from typing import NamedTuple, Tuple

import numpy as np

from .errors import (
    BadParameterError,
    NonPrimitiveError,
    NotDoublyStochasticError,
    NotStochasticError,
    ParseError,
)

Site = Tuple[int, int]

STOCHASTIC_TOL = 1e-9
RENORMALIZE_TOL = 1e-12
# Wielandt's bound (n-1)^2 + 1 for n = 4.
WIELANDT_BOUND = 10


class Direction(enum.IntEnum):
    E = 0
    N = 1
    W = 2
    S = 3

    @property
    def vector(self) -> Site:
        return _VECTORS[self]

    @property
    def perp(self) -> "Direction":
        """The direction ``d_perp`` with ``(d, d_perp)`` positively oriented."""
        return Direction((self + 1) % 4)

    @property
    def opposite(self) -> "Direction":
        return Direction((self + 2) % 4)

    @property
    def is_vertical(self) -> bool:
        return bool(self & 1)

    @classmethod
    def from_vector(cls, v) -> "Direction":
        try:
            return _FROM_VECTOR[(int(v[0]), int(v[1]))]
        except KeyError:
            raise ValueError(f"{tuple(v)} is not a unit lattice vector") from None

    @classmethod
    def parse(cls, letter: str) -> "Direction":
        try:
            return cls[letter.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown direction {letter!r}") from None


_VECTORS = {
    Direction.E: (1, 0),
    Direction.N: (0, 1),
    Direction.W: (-1, 0),
    Direction.S: (0, -1),
}
_FROM_VECTOR = {v: d for d, v in _VECTORS.items()}
DIRECTIONS = tuple(Direction)
# Rows of direction vectors, aligned with the matrix index order.
DIRECTION_VECTORS = np.array([_VECTORS[d] for d in DIRECTIONS], dtype=np.int64)


class RelativeMove(enum.Enum):
    """Moves relative to the incoming direction; values are quarter turns."""

    F = 0
    L = 1
    B = 2
    R = 3


def relative_to_absolute(d: Direction, m: RelativeMove) -> Direction:
    """Absolute outgoing direction of move ``m`` for a walker heading ``d``.

    >>> relative_to_absolute(Direction.N, RelativeMove.R)
    <Direction.E: 0>
    """
    return Direction((int(d) + m.value) % 4)


def absolute_to_relative(d: Direction, d_out: Direction) -> RelativeMove:
    return RelativeMove((int(d_out) - int(d)) % 4)


class Parity(enum.IntEnum):
    EVEN = 0
    ODD = 1


def parity_class(x: Site) -> Parity:
    return Parity((x[0] + x[1]) & 1)


def add(x: Site, v: Site) -> Site:
    return (x[0] + v[0], x[1] + v[1])


class TransitionMatrix:
    """Immutable row-stochastic 4x4 matrix.

    Rows whose sums are off by at most 1e-12 are renormalized, rows off by
    more than 1e-9 are rejected, and anything in between is kept as given.
    Negative entries larger than -1e-12 are treated as rounding noise and
    clipped to zero.
    """

    __slots__ = ("_a",)

    def __init__(self, entries):
        if isinstance(entries, TransitionMatrix):
            self._a = entries._a
            return
        a = np.array(entries, dtype=np.float64)
        if a.shape != (4, 4):
            raise NotStochasticError(f"expected a 4x4 matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NotStochasticError("matrix has non-finite entries")
        if np.any(a < -RENORMALIZE_TOL):
            raise NotStochasticError("matrix has negative entries")
        a[a < 0] = 0.0
        sums = a.sum(axis=1)
        dev = np.abs(sums - 1.0)
        if np.any(dev > STOCHASTIC_TOL):
            bad = int(np.argmax(dev))
            raise NotStochasticError(
                f"row {DIRECTIONS[bad].name} sums to {sums[bad]!r}"
            )
        dust = (dev > 0) & (dev <= RENORMALIZE_TOL)
        a[dust] /= sums[dust, None]
        a.flags.writeable = False
        self._a = a

    @property
    def entries(self) -> np.ndarray:
        return self._a

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._a
        return self._a.astype(dtype)

    def __getitem__(self, key):
        return self._a[key]

    def __eq__(self, other):
        if not isinstance(other, TransitionMatrix):
            return NotImplemented
        return np.array_equal(self._a, other._a)

    def __hash__(self):
        return hash(self._a.tobytes())

    def __repr__(self):
        rows = ", ".join("[" + ", ".join(f"{v:.6g}" for v in r) + "]" for r in self._a)
        return f"TransitionMatrix([{rows}])"

    def to_text(self) -> str:
        """Four lines of four numbers; ``repr`` keeps floats round-trippable."""
        return "\n".join(" ".join(repr(float(v)) for v in row) for row in self._a) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "TransitionMatrix":
        rows = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0]
            if not line.strip():
                continue
            values = []
            col = 0
            for token in line.split():
                col = raw.index(token, col) + 1
                try:
                    values.append(float(token))
                except ValueError:
                    raise ParseError(f"not a number: {token!r}", lineno, col) from None
                col += len(token) - 1
            if len(values) != 4:
                raise ParseError(f"expected 4 numbers, found {len(values)}", lineno)
            rows.append(values)
        if len(rows) != 4:
            raise ParseError(f"expected 4 rows, found {len(rows)}")
        try:
            return cls(rows)
        except NotStochasticError as exc:
            raise ParseError(str(exc)) from exc


def _arr(q) -> np.ndarray:
    a = np.asarray(q, dtype=np.float64)
    if a.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {a.shape}")
    return a


W = TransitionMatrix(np.full((4, 4), 0.25))

# Doubly stochastic, irreducible and aperiodic, yet at distance 1 from W.
APERIODIC_NORM_ONE = TransitionMatrix(
    [
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.5, 0.5, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.5, 0.5, 0.0],
    ]
)


def is_stochastic(q, tol: float = STOCHASTIC_TOL) -> bool:
    a = _arr(q)
    return bool(np.all(a >= 0) and np.all(np.abs(a.sum(axis=1) - 1.0) <= tol))


def is_isotropic(q, tol: float = STOCHASTIC_TOL) -> bool:
    """True when every column also sums to one (doubly stochastic)."""
    return bool(np.all(np.abs(_arr(q).sum(axis=0) - 1.0) <= tol))


def is_doubly_stochastic(q, tol: float = STOCHASTIC_TOL) -> bool:
    return is_stochastic(q, tol) and is_isotropic(q, tol)


def is_elliptic(q, eps: float) -> bool:
    if not eps > 0:
        raise BadParameterError(f"eps must be positive, got {eps}")
    return bool(np.all(_arr(q) >= eps))


def support(q) -> np.ndarray:
    return (_arr(q) > 0).astype(np.int64)


def is_primitive(q) -> bool:
    """Some power ``S^k`` (k <= 10) of the support matrix is all positive.

    Uses exact 0/1 integer arithmetic, so the answer never depends on
    floating point noise.
    """
    s = support(q)
    p = s.copy()
    for _ in range(WIELANDT_BOUND):
        if np.all(p > 0):
            return True
        p = (p @ s > 0).astype(np.int64)
    return False


def stationary_vector(q) -> np.ndarray:
    """Unique probability vector ``pi`` with ``pi Q = pi``.

    Raises
    ------
    NonPrimitiveError
        If ``Q`` is not primitive, so uniqueness is not guaranteed.
    """
    a = _arr(q)
    if not is_primitive(a):
        raise NonPrimitiveError("stationary vector requested for a non-primitive matrix")
    m = a.T - np.eye(4)
    m[3, :] = 1.0
    rhs = np.array([0.0, 0.0, 0.0, 1.0])
    pi = np.linalg.solve(m, rhs)
    pi[pi < 0] = 0.0
    return pi / pi.sum()


def _require_doubly_stochastic(a: np.ndarray) -> None:
    if not is_doubly_stochastic(a):
        raise NotDoublyStochasticError("matrix is not doubly stochastic")


def deviation_norm(q) -> float:
    """Operator norm ``||Q - W||`` for a doubly stochastic ``Q``.

    Equal to the square root of the largest eigenvalue of the symmetric
    matrix ``Q^T Q - W``; always in [0, 1].  Values within 1e-10 of the
    endpoints are snapped onto them.
    """
    a = _arr(q)
    _require_doubly_stochastic(a)
    m = a.T @ a - np.asarray(W)
    rho = float(np.max(np.abs(np.linalg.eigvalsh(m))))
    norm = float(np.sqrt(rho))
    if abs(norm - 1.0) <= 1e-10:
        return 1.0
    if norm <= 1e-10:
        return 0.0
    return min(norm, 1.0)


def spectral_radius_power(m, tol: float = 1e-12, max_iter: int = 200_000, rng=None) -> float:
    """Largest eigenvalue of a symmetric PSD matrix by power iteration.

    Independent of LAPACK; used to cross-check :func:`deviation_norm`.
    """
    m = np.asarray(m, dtype=np.float64)
    rng = np.random.default_rng(0) if rng is None else rng
    v = rng.standard_normal(m.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = m @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        new = float(v @ w)
        v = w / nw
        if abs(new - lam) <= tol * max(1.0, abs(new)):
            return new
        lam = new
    return lam


def toth_condition(q, eps: float) -> bool:
    """``Q`` is doubly stochastic and ``||Q - W|| <= 1 - eps``.

    A stochastic matrix that is not doubly stochastic simply fails.
    """
    if not 0 < eps < 1:
        raise BadParameterError(f"eps must lie in (0, 1), got {eps}")
    a = _arr(q)
    if not is_stochastic(a):
        raise NotStochasticError("matrix is not stochastic")
    if not is_isotropic(a):
        return False
    # compared as a gap so that eps = toth_epsilon(q) is accepted exactly
    return 1.0 - deviation_norm(a) >= eps


def toth_epsilon(q) -> float:
    """Largest ``eps`` for which the norm bound holds (0 when it never does)."""
    return 1.0 - deviation_norm(q)


def is_normal(q, tol: float = 1e-12) -> bool:
    a = _arr(q)
    return bool(np.allclose(a.T @ a, a @ a.T, rtol=0.0, atol=tol))


class NormConditions(NamedTuple):
    """Three conditions on ``Q`` each implying ``||Q - W|| < 1``."""

    sparse_columns: bool  # no column holds more than one zero
    normal_primitive: bool  # irreducible, aperiodic and Q^T Q = Q Q^T
    positive_diagonal: bool  # irreducible, aperiodic, positive diagonal

    @property
    def any(self) -> bool:
        return self.sparse_columns or self.normal_primitive or self.positive_diagonal


def sufficient_conditions(q) -> NormConditions:
    a = _arr(q)
    _require_doubly_stochastic(a)
    zeros_per_column = (a == 0).sum(axis=0)
    primitive = is_primitive(a)
    return NormConditions(
        sparse_columns=bool(np.all(zeros_per_column <= 1)),
        normal_primitive=primitive and is_normal(a),
        positive_diagonal=primitive and bool(np.all(np.diag(a) > 0)),
    )


def flr_matrix(forward: float, left: float, right: float, swap_fb: bool = False) -> TransitionMatrix:
    """Same relative weights for every incoming direction; Backward (or
    Forward, when ``swap_fb``) gets probability zero."""
    a = np.zeros((4, 4))
    straight = RelativeMove.B if swap_fb else RelativeMove.F
    for d in DIRECTIONS:
        a[d, relative_to_absolute(d, straight)] = forward
        a[d, relative_to_absolute(d, RelativeMove.L)] = left
        a[d, relative_to_absolute(d, RelativeMove.R)] = right
    return TransitionMatrix(a)


def rank_one(row) -> TransitionMatrix:
    """Matrix whose four rows all equal ``row``."""
    return TransitionMatrix(np.tile(np.asarray(row, dtype=np.float64), (4, 1)))


# Left and Right with probability 1/2 each, never straight or back.
SYMMETRIC_LEFT_RIGHT = flr_matrix(0.0, 0.5, 0.5)
STRAIGHT_LINE = TransitionMatrix(np.eye(4))
