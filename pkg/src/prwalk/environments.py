"""Seeded environments: a transition matrix for every site of Z^2.

An :class:`Environment` never stores site data (except the ``table`` kind
read back from a snapshot).  Each query recomputes the matrix from counter
based hashes of ``(seed, site, stream)``, so accessors are pure and the
same numba routine serves Python callers and the simulation kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numba as nb
import numpy as np

from .core import (
    DIRECTION_VECTORS,
    DIRECTIONS,
    Direction,
    Parity,
    RelativeMove,
    Site,
    TransitionMatrix,
    _arr,
    deviation_norm,
    is_isotropic,
    is_stochastic,
    parity_class,
    relative_to_absolute,
)
from .errors import BadParameterError
from .rng import as_seed, site_uniform

HOMOGENEOUS = 0
FLR = 1
FORWARD_INHOM = 2
FORWARD_TRAP = 3
BACKWARD_INHOM = 4
LEFTRIGHT = 5
TABLE = 6

KIND_CODES = {
    "homogeneous": HOMOGENEOUS,
    "flr": FLR,
    "forward_inhom": FORWARD_INHOM,
    "forward_trap": FORWARD_TRAP,
    "backward_inhom": BACKWARD_INHOM,
    "leftright": LEFTRIGHT,
    "table": TABLE,
}

TRAP_CLAMP = 1.0 - 1e-9

# Integer parameter slots shared by every kind.
_SHIFT_X, _SHIFT_Y, _TAB_X0, _TAB_Y0, _TAB_NX, _TAB_NY = range(6)


@nb.njit(cache=True)
def _zeta(seed, fprm, x1, x2, stream):
    lo = fprm[0]
    hi = fprm[1]
    if lo == hi:
        return lo
    return lo + (hi - lo) * site_uniform(seed, x1, x2, stream)


@nb.njit(cache=True)
def _backward_zeta(seed, fprm, x1, x2):
    z = _zeta(seed, fprm, x1, x2, 0)
    if fprm[2] != 0.0 and ((x1 + x2) & 1) == 1 and z == 1.0:
        # Partner of odd x is the even site x + N, whose Backward edge
        # leads here.
        if _zeta(seed, fprm, x1, x2 + 1, 0) == 1.0:
            z = TRAP_CLAMP
    return z


@nb.njit(cache=True)
def _leftright_zeta(seed, fprm, x1, x2, stream):
    eps = fprm[0]
    return eps + (1.0 - 2.0 * eps) * site_uniform(seed, x1, x2, stream)


@nb.njit(cache=True)
def env_row(code, seed, iprm, fprm, table, x1, x2, d, out):
    """Write row ``d`` of the matrix at site ``(x1, x2)`` into ``out``."""
    x1 = x1 + iprm[_SHIFT_X]
    x2 = x2 + iprm[_SHIFT_Y]
    for j in range(4):
        out[j] = 0.0
    p = (x1 + x2) & 1
    left = (d + 1) & 3
    back = (d + 2) & 3
    right = (d + 3) & 3
    if code == HOMOGENEOUS:
        for j in range(4):
            out[j] = fprm[4 * d + j]
    elif code == FLR:
        g0 = -math.log(1.0 - site_uniform(seed, x1, x2, 0))
        g1 = -math.log(1.0 - site_uniform(seed, x1, x2, 1))
        g2 = -math.log(1.0 - site_uniform(seed, x1, x2, 2))
        total = g0 + g1 + g2
        eps = fprm[0]
        scale = 1.0 - 3.0 * eps
        straight = back if fprm[1] != 0.0 else d
        out[straight] = eps + scale * g0 / total
        out[left] = eps + scale * g1 / total
        out[right] = eps + scale * g2 / total
    elif code == FORWARD_INHOM or code == FORWARD_TRAP or code == BACKWARD_INHOM:
        if code == FORWARD_TRAP:
            active = p == 0 and (d & 1) == 1
        else:
            active = d == (1 if p == 0 else 3)
        if active:
            if code == BACKWARD_INHOM:
                z = _backward_zeta(seed, fprm, x1, x2)
                out[back] = z
            else:
                z = _zeta(seed, fprm, x1, x2, 0)
                out[d] = z
            half = (1.0 - z) / 2.0
            out[left] = half
            out[right] = half
        else:
            out[left] = 0.5
            out[right] = 0.5
    elif code == LEFTRIGHT:
        if p == 0:
            out[left] = 0.5
            out[right] = 0.5
        elif d == 0:
            z = _leftright_zeta(seed, fprm, x1 - 1, x2, 0)
            out[1] = z
            out[3] = 1.0 - z
        elif d == 2:
            z = _leftright_zeta(seed, fprm, x1 + 1, x2, 0)
            out[3] = z
            out[1] = 1.0 - z
        elif d == 1:
            z = _leftright_zeta(seed, fprm, x1, x2 - 1, 1)
            out[0] = z
            out[2] = 1.0 - z
        else:
            z = _leftright_zeta(seed, fprm, x1, x2 + 1, 1)
            out[2] = z
            out[0] = 1.0 - z
    else:
        i = x1 - iprm[_TAB_X0]
        j = x2 - iprm[_TAB_Y0]
        if i < 0 or j < 0 or i >= iprm[_TAB_NX] or j >= iprm[_TAB_NY]:
            raise IndexError("site outside the environment table")
        k = i * iprm[_TAB_NY] + j
        for c in range(4):
            out[c] = table[k, d, c]


@nb.njit(cache=True)
def env_matrix(code, seed, iprm, fprm, table, x1, x2):
    m = np.empty((4, 4))
    for d in range(4):
        env_row(code, seed, iprm, fprm, table, x1, x2, d, m[d])
    return m


_EMPTY_TABLE = np.zeros((0, 4, 4))


@dataclass(frozen=True)
class ZetaLaw:
    """Uniform law on ``[lo, hi]``; ``lo == hi`` gives a constant field."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (0.0 <= self.lo <= self.hi <= 1.0):
            raise BadParameterError(f"zeta law needs 0 <= lo <= hi <= 1, got [{self.lo}, {self.hi}]")

    @classmethod
    def constant(cls, value: float) -> "ZetaLaw":
        return cls(float(value), float(value))

    @classmethod
    def coerce(cls, law) -> "ZetaLaw":
        if isinstance(law, ZetaLaw):
            return law
        if isinstance(law, (tuple, list)):
            return cls(float(law[0]), float(law[1]))
        return cls.constant(law)

    def __str__(self):
        return f"{self.lo!r}" if self.lo == self.hi else f"{self.lo!r},{self.hi!r}"


@dataclass(frozen=True)
class Box:
    """Half-open rectangle ``[x0, x1) x [y0, y1)`` of sites."""

    x0: int
    x1: int
    y0: int
    y1: int

    def __post_init__(self):
        if self.x1 <= self.x0 or self.y1 <= self.y0:
            raise BadParameterError(f"empty box {self}")

    @classmethod
    def centered(cls, width: int, height: Optional[int] = None) -> "Box":
        height = width if height is None else height
        return cls(-(width // 2), width - width // 2, -(height // 2), height - height // 2)

    def sites(self) -> Iterator[Site]:
        for x1 in range(self.x0, self.x1):
            for x2 in range(self.y0, self.y1):
                yield (x1, x2)

    def __len__(self):
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    def __contains__(self, x) -> bool:
        return self.x0 <= x[0] < self.x1 and self.y0 <= x[1] < self.y1

    def __str__(self):
        return f"{self.x0}:{self.x1},{self.y0}:{self.y1}"


@dataclass(frozen=True, eq=False)
class Environment:
    kind: str
    seed: int
    params: dict
    code: int
    iprm: np.ndarray
    fprm: np.ndarray
    table: np.ndarray = field(default=_EMPTY_TABLE, repr=False)

    @property
    def shift(self) -> Site:
        return (int(self.iprm[_SHIFT_X]), int(self.iprm[_SHIFT_Y]))

    def kernel_args(self):
        """Positional arguments expected by the numba kernels."""
        return (self.code, as_seed(self.seed), self.iprm, self.fprm, self.table)

    def raw_matrix(self, x: Site) -> np.ndarray:
        return env_matrix(*self.kernel_args(), int(x[0]), int(x[1]))

    def matrix(self, x: Site) -> TransitionMatrix:
        return TransitionMatrix(self.raw_matrix(x))

    __call__ = matrix

    def row(self, x: Site, d: Direction) -> np.ndarray:
        out = np.empty(4)
        env_row(*self.kernel_args(), int(x[0]), int(x[1]), int(d), out)
        return out

    def zeta(self, x: Site) -> float:
        """The site parameter of the forward/backward families."""
        x1, x2 = x[0] + self.shift[0], x[1] + self.shift[1]
        seed = as_seed(self.seed)
        if self.code == BACKWARD_INHOM:
            return float(_backward_zeta(seed, self.fprm, x1, x2))
        if self.code in (FORWARD_INHOM, FORWARD_TRAP):
            return float(_zeta(seed, self.fprm, x1, x2, 0))
        raise BadParameterError(f"{self.kind} environment has no zeta field")

    def zeta_pair(self, x: Site) -> tuple:
        """``(zeta, zeta')`` attached to an even site of a leftright environment."""
        if self.code != LEFTRIGHT:
            raise BadParameterError(f"{self.kind} environment has no zeta pair")
        if parity_class(x) is not Parity.EVEN:
            raise BadParameterError(f"{x} is not an even site")
        x1, x2 = x[0] + self.shift[0], x[1] + self.shift[1]
        seed = as_seed(self.seed)
        return (
            float(_leftright_zeta(seed, self.fprm, x1, x2, 0)),
            float(_leftright_zeta(seed, self.fprm, x1, x2, 1)),
        )

    def header(self) -> str:
        parts = [f"kind={self.kind}", f"seed={self.seed}"]
        parts += [f"{k}={v}" for k, v in self.params.items()]
        if self.shift != (0, 0):
            parts.append(f"shift={self.shift[0]},{self.shift[1]}")
        return " ".join(parts)


def _make(kind, seed, params, fprm, table=_EMPTY_TABLE, iprm=None) -> Environment:
    if iprm is None:
        iprm = np.zeros(6, dtype=np.int64)
    return Environment(
        kind=kind,
        seed=int(seed),
        params=dict(params),
        code=KIND_CODES[kind],
        iprm=iprm,
        fprm=np.asarray(fprm, dtype=np.float64),
        table=table,
    )


def homogeneous_env(q) -> Environment:
    q = TransitionMatrix(q)
    return _make("homogeneous", 0, {}, np.asarray(q).ravel(), iprm=None)


def symmetric_leftright_env() -> Environment:
    from .core import SYMMETRIC_LEFT_RIGHT

    return homogeneous_env(SYMMETRIC_LEFT_RIGHT)


def flr_env(seed: int, eps: float, swap_fb: bool = False) -> Environment:
    """i.i.d. Forward/Left/Right weights, each at least ``eps``; Backward 0.

    With ``swap_fb`` the straight weight goes to Backward instead.
    """
    if not 0 < eps <= 1 / 3:
        raise BadParameterError(f"flr environment needs 0 < eps <= 1/3, got {eps}")
    return _make("flr", seed, {"eps": eps, "swap_fb": int(bool(swap_fb))}, [eps, float(bool(swap_fb))])


def forward_inhom_env(seed: int, zeta_law) -> Environment:
    law = ZetaLaw.coerce(zeta_law)
    return _make("forward_inhom", seed, {"zeta": str(law)}, [law.lo, law.hi])


def forward_trap_env(seed: int, zeta_law) -> Environment:
    law = ZetaLaw.coerce(zeta_law)
    return _make("forward_trap", seed, {"zeta": str(law)}, [law.lo, law.hi])


def backward_inhom_env(seed: int, zeta_law, forbid_trap: bool = False) -> Environment:
    law = ZetaLaw.coerce(zeta_law)
    return _make(
        "backward_inhom",
        seed,
        {"zeta": str(law), "forbid_trap": int(bool(forbid_trap))},
        [law.lo, law.hi, float(bool(forbid_trap))],
    )


def leftright_env(seed: int, eps: float) -> Environment:
    if not 0 < eps < 0.5:
        raise BadParameterError(f"leftright environment needs 0 < eps < 1/2, got {eps}")
    return _make("leftright", seed, {"eps": eps}, [eps])


def table_env(box: Box, matrices, kind: str = "table", seed: int = 0, params=None) -> Environment:
    """Environment defined only on ``box`` from explicit matrices.

    ``matrices`` is indexed like ``Box.sites()`` (x1 major).  Queries
    outside the box raise IndexError.
    """
    table = np.ascontiguousarray(np.asarray(matrices, dtype=np.float64).reshape(len(box), 4, 4))
    iprm = np.array([0, 0, box.x0, box.y0, box.x1 - box.x0, box.y1 - box.y0], dtype=np.int64)
    p = {"source": kind}
    p.update(params or {})
    return _make("table", seed, p, [], table=table, iprm=iprm)


def shift_env(env: Environment, y: Site) -> Environment:
    """Environment whose matrix at ``x`` is ``env``'s matrix at ``x + y``."""
    iprm = env.iprm.copy()
    iprm[_SHIFT_X] += int(y[0])
    iprm[_SHIFT_Y] += int(y[1])
    return Environment(env.kind, env.seed, env.params, env.code, iprm, env.fprm, env.table)


def local_drift(env: Environment, x: Site, d: Direction) -> np.ndarray:
    """Expected one-step displacement from state ``(x, d)``."""
    return env.row(x, d) @ DIRECTION_VECTORS.astype(np.float64)


def average_drift(env: Environment, box: Box) -> np.ndarray:
    total = np.zeros(2)
    vecs = DIRECTION_VECTORS.astype(np.float64)
    for x in box.sites():
        total += env.raw_matrix(x).sum(axis=0) @ vecs
    return total / (4 * len(box))


def _designated(code: int, x: Site, d: Direction) -> bool:
    p = parity_class(x)
    if code == FORWARD_TRAP:
        return p is Parity.EVEN and d.is_vertical
    return d is (Direction.N if p is Parity.EVEN else Direction.S)


def structural_ok(env: Environment, x: Site, a: np.ndarray) -> bool:
    """Family-specific shape of the matrix at ``x``."""
    rel = {m: np.array([a[d, relative_to_absolute(d, m)] for d in DIRECTIONS]) for m in RelativeMove}
    F, L, B, R = rel[RelativeMove.F], rel[RelativeMove.L], rel[RelativeMove.B], rel[RelativeMove.R]
    code = env.code
    if code == HOMOGENEOUS:
        return bool(np.array_equal(a, env.fprm.reshape(4, 4)))
    if code == FLR:
        straight, blocked = (B, F) if env.fprm[1] != 0 else (F, B)
        same = all(np.all(v == v[0]) for v in (straight, L, R))
        floor_ok = min(straight[0], L[0], R[0]) >= env.fprm[0] - 1e-12
        return same and floor_ok and bool(np.all(blocked == 0)) and is_isotropic(a)
    if code in (FORWARD_INHOM, FORWARD_TRAP, BACKWARD_INHOM):
        moving, still = (B, F) if code == BACKWARD_INHOM else (F, B)
        if not (np.all(L == R) and np.all(still == 0)):
            return False
        for d in DIRECTIONS:
            if moving[d] != 0 and not _designated(code, x, d):
                return False
        return True
    if code == LEFTRIGHT:
        if not (np.all(F == 0) and np.all(B == 0)):
            return False
        if parity_class(x) is Parity.EVEN:
            return bool(np.all(L == 0.5) and np.all(R == 0.5))
        return True
    return True


@dataclass(frozen=True)
class SiteAudit:
    site: Site
    stochastic: bool
    isotropic: bool
    elliptic: bool
    toth: bool
    toth_eps: float  # 1 - ||Q - W||, or nan when Q is not doubly stochastic
    structural: bool


@dataclass(frozen=True)
class AuditReport:
    kind: str
    box: Box
    eps: Optional[float]
    sites: tuple

    def count(self, flag: str) -> int:
        return sum(bool(getattr(s, flag)) for s in self.sites)

    def _word(self, flag: str) -> str:
        k = self.count(flag)
        if k == len(self.sites):
            return "all"
        if k == 0:
            return "none"
        return f"{k}/{len(self.sites)}"

    @property
    def min_toth_eps(self) -> float:
        vals = [s.toth_eps for s in self.sites if not math.isnan(s.toth_eps)]
        return min(vals) if vals else math.nan

    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "box": str(self.box),
            "sites": len(self.sites),
            "stochastic": self.count("stochastic"),
            "isotropic": self.count("isotropic"),
            "elliptic": self.count("elliptic"),
            "toth": self.count("toth"),
            "structural": self.count("structural"),
            "min_toth_eps": self.min_toth_eps,
        }

    def footer(self) -> str:
        flags = ("stochastic", "isotropic", "elliptic", "toth", "structural")
        return ", ".join(f"{f}: {self._word(f)}" for f in flags)


def audit_env(env: Environment, box: Box, eps: Optional[float] = None) -> AuditReport:
    """Check every site of ``box``.

    With ``eps=None`` ellipticity means all entries positive and the norm
    condition means ``||Q - W|| < 1``; otherwise both use the given bound.
    """
    from .core import toth_condition

    out = []
    for x in box.sites():
        a = env.raw_matrix(x)
        stoch = is_stochastic(a)
        iso = stoch and is_isotropic(a)
        ell = bool(np.all(a > 0)) if eps is None else bool(np.all(a >= eps))
        if iso:
            teps = 1.0 - deviation_norm(a)
            toth = teps > 0 if eps is None else toth_condition(a, eps)
        else:
            teps, toth = math.nan, False
        out.append(SiteAudit(x, stoch, iso, ell, toth, teps, structural_ok(env, x, a)))
    return AuditReport(env.kind, box, eps, tuple(out))
