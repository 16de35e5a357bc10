"""Exact classification of walks in a constant environment.

With a constant matrix the incoming direction alone is a finite Markov
chain, so velocity and the zero-drift criterion follow from its stationary
vector.  Ratios are plain floats: ``math.inf`` for ``x/0`` with ``x > 0`` and
``math.nan`` for the indeterminate ``0/0``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .core import DIRECTION_VECTORS, Direction, _arr, is_primitive, stationary_vector
from .errors import IndeterminateRatioError, NonPrimitiveError

RATIO_ZERO_TOL = 1e-12
EQUALITY_RTOL = 1e-9
FORM_TOL = 1e-9

E, N, Wd, S = Direction.E, Direction.N, Direction.W, Direction.S


class Classification(enum.Enum):
    RECURRENT_CLT = "RecurrentCLT"
    BALLISTIC = "Ballistic"
    INCONCLUSIVE = "Inconclusive"


def _ratio(num: float, den: float) -> float:
    num_zero = abs(num) <= RATIO_ZERO_TOL
    den_zero = abs(den) <= RATIO_ZERO_TOL
    if den_zero:
        return math.nan if num_zero else math.inf
    return max(num, 0.0) / den


def lambda_expressions(q) -> Tuple[float, float, float, float]:
    """The four ratios that must coincide for a zero-velocity walk.

    Each equals ``pi^N / pi^E`` when the stationary vector has the form
    ``(p1, p2, p1, p2)``.
    """
    a = _arr(q)
    return (
        _ratio(1 - a[E, E] - a[Wd, E], a[N, E] + a[S, E]),
        _ratio(1 - a[E, Wd] - a[Wd, Wd], a[N, Wd] + a[S, Wd]),
        _ratio(a[E, N] + a[Wd, N], 1 - a[N, N] - a[S, N]),
        _ratio(a[E, S] + a[Wd, S], 1 - a[N, S] - a[S, S]),
    )


def ratios_equal(a: float, b: float, rtol: float = EQUALITY_RTOL) -> bool:
    if math.isnan(a) or math.isnan(b):
        return False
    if math.isinf(a) or math.isinf(b):
        return a == b
    return math.isclose(a, b, rel_tol=rtol, abs_tol=0.0) or a == b


def asymptotic_velocity(q) -> np.ndarray:
    """``(pi^E - pi^W, pi^N - pi^S)``; raises NonPrimitiveError otherwise."""
    return _velocity(stationary_vector(q))


def _velocity(pi) -> np.ndarray:
    v = pi @ DIRECTION_VECTORS.astype(np.float64)
    v[np.abs(v) <= RATIO_ZERO_TOL] = 0.0
    return v


def p_from_lambda(lam: float) -> Tuple[float, float]:
    """The nonnegative pair with ``p1 + p2 = 1/2`` and ``p2 / p1 = lam``."""
    if math.isnan(lam):
        raise IndeterminateRatioError("ratio is indeterminate (0/0)")
    if lam < 0:
        raise ValueError(f"ratio must be nonnegative, got {lam}")
    if math.isinf(lam):
        return (0.0, 0.5)
    p1 = 0.5 / (1.0 + lam)
    return (p1, 0.5 - p1)


def has_balanced_form(pi, tol: float = FORM_TOL) -> bool:
    """``pi^E == pi^W`` and ``pi^N == pi^S``."""
    return abs(pi[E] - pi[Wd]) <= tol and abs(pi[N] - pi[S]) <= tol


@dataclass(frozen=True)
class HomogeneousVerdict:
    lambdas: Tuple[float, float, float, float]
    pi: Optional[np.ndarray]
    velocity: Optional[np.ndarray]
    classification: Classification
    # None when some ratio is indeterminate and only the pi test applies.
    lambda_criterion: Optional[bool]

    def as_dict(self) -> dict:
        def num(v):
            if math.isnan(v):
                return "indeterminate"
            if math.isinf(v):
                return "inf"
            return v

        return {
            "classification": self.classification.value,
            "lambdas": [num(v) for v in self.lambdas],
            "pi": None if self.pi is None else [float(v) for v in self.pi],
            "velocity": None if self.velocity is None else [float(v) for v in self.velocity],
            "lambda_criterion": self.lambda_criterion,
        }


def lambda_criterion(lambdas) -> Optional[bool]:
    if any(math.isnan(v) for v in lambdas):
        return None
    return all(ratios_equal(lambdas[0], v) for v in lambdas[1:])


def classify_homogeneous(q) -> HomogeneousVerdict:
    a = _arr(q)
    lambdas = lambda_expressions(a)
    crit = lambda_criterion(lambdas)
    if not is_primitive(a):
        return HomogeneousVerdict(lambdas, None, None, Classification.INCONCLUSIVE, crit)
    pi = stationary_vector(a)
    velocity = _velocity(pi)
    if has_balanced_form(pi):
        cls = Classification.RECURRENT_CLT
        velocity = np.zeros(2)
    else:
        cls = Classification.BALLISTIC
    return HomogeneousVerdict(lambdas, pi, velocity, cls, crit)


__all__ = [
    "Classification",
    "HomogeneousVerdict",
    "NonPrimitiveError",
    "asymptotic_velocity",
    "classify_homogeneous",
    "has_balanced_form",
    "lambda_criterion",
    "lambda_expressions",
    "p_from_lambda",
    "ratios_equal",
]
