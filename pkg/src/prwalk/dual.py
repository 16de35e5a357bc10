"""Embedding of walker states into the two-level lattice Z^2 x {0, 1}.

A walker state ``(x, d)`` is a directed edge of Z^2; consecutive-step
relations between such edges form a graph made of two Manhattan lattices
stacked on top of each other (levels 0 and 1) and joined by the Forward and
Backward moves.  The embedding is fixed by a small constraint search:

* the level of ``(x, d)`` is 0 exactly when ``x`` is even with vertical
  ``d`` or ``x`` is odd with horizontal ``d``;
* translating ``x`` by an even vector ``v`` translates the horizontal
  coordinates by ``(v1 + v2, v2 - v1)``;
* Left/Right moves are unit horizontal steps within a level;
* Backward moves are vertical unit steps between twin vertices, and the
  Backward moves that a walker can actually take in the inhomogeneous
  Backward family (out of even sites heading North, odd sites heading
  South) sit over ``(2Z)^2``;
* Forward moves are cube diagonals ``(+-1, +-1, +-1)``, exactly
  ``+-(1, 1, 1)`` for even sites heading North and odd sites heading South;
* ``((0, 0), N)`` sits at the origin.

Only the translation classes (site parity x incoming direction) need to be
solved for, so the search runs over eight horizontal offsets.
"""

from __future__ import annotations

import enum
import itertools
import math
from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from itertools import groupby
from typing import Callable, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numba as nb
import numpy as np

from .core import (
    DIRECTIONS,
    Direction,
    Parity,
    RelativeMove,
    Site,
    absolute_to_relative,
    parity_class,
    relative_to_absolute,
)
from .environments import Box, Environment
from .errors import NotAdjacentError, NotInImageError, UnsatisfiableError
from .walker import Trajectory, WalkerState, _coerce_state, successors

SEARCH_RADIUS = 4
REPRESENTATIVE = {Parity.EVEN: (0, 0), Parity.ODD: (1, 0)}
CLASSES = tuple((p, d) for p in Parity for d in DIRECTIONS)

# Classes whose Forward and Backward moves carry probability in the
# inhomogeneous Forward/Backward families.
EFFECTIVE = frozenset({(Parity.EVEN, Direction.N), (Parity.ODD, Direction.S)})

_AXIS = frozenset({(1, 0), (-1, 0), (0, 1), (0, -1)})
_DIAG = frozenset({(1, 1), (1, -1), (-1, 1), (-1, -1)})


class DualVertex(NamedTuple):
    z1: int
    z2: int
    z3: int

    @property
    def horizontal(self) -> Tuple[int, int]:
        return (self.z1, self.z2)

    def __sub__(self, other):
        return (self.z1 - other[0], self.z2 - other[1], self.z3 - other[2])


def level(x: Site, d: Direction) -> int:
    return 1 if (x[0] + x[1]) % 2 == int(d) % 2 else 0


def shear(v: Site) -> Tuple[int, int]:
    """Horizontal displacement induced by translating sites by ``v``."""
    return (v[0] + v[1], v[1] - v[0])


def _in_even_lattice(h) -> bool:
    return h[0] % 2 == 0 and h[1] % 2 == 0


class MoveKind(enum.Enum):
    TURN = "Turn"
    FORWARD = "Forward"
    BACKWARD = "Backward"


class EdgeTag(enum.Enum):
    M1_DIAG = "M1Diag"
    M2_DIAG = "M2Diag"
    L_PLUS = "LPlus"
    L_MINUS = "LMinus"


class EdgeClass(NamedTuple):
    tag: EdgeTag
    kind: MoveKind

    def __str__(self):
        return f"{self.tag.value} {self.kind.value}"


def _move_kind(m: RelativeMove) -> MoveKind:
    if m is RelativeMove.F:
        return MoveKind.FORWARD
    if m is RelativeMove.B:
        return MoveKind.BACKWARD
    return MoveKind.TURN


@dataclass(frozen=True)
class EmbeddingTable:
    """Horizontal coordinates of the eight translation classes at their
    representative sites (``(0, 0)`` for even, ``(1, 0)`` for odd)."""

    base: Tuple[Tuple[Tuple[int, int], ...], ...]  # [parity][direction]

    def offset(self, p: Parity, d: Direction) -> Tuple[int, int]:
        return self.base[int(p)][int(d)]

    def to_dual(self, s) -> DualVertex:
        x, d = _coerce_state(s)
        p = parity_class(x)
        r = REPRESENTATIVE[p]
        a = shear((x[0] - r[0], x[1] - r[1]))
        b = self.base[p][d]
        return DualVertex(a[0] + b[0], a[1] + b[1], level(x, d))

    def from_dual(self, z) -> WalkerState:
        z1, z2, z3 = z
        if not all(float(c).is_integer() for c in (z1, z2, z3)) or z3 not in (0, 1):
            raise NotInImageError(f"{tuple(z)} is not a vertex of the embedded graph")
        z1, z2, z3 = int(z1), int(z2), int(z3)
        for p, d in CLASSES:
            r = REPRESENTATIVE[p]
            if level(r, d) != z3:
                continue
            b = self.base[p][d]
            a1, a2 = z1 - b[0], z2 - b[1]
            # invert the shear: v1 = (a1 - a2) / 2, v2 = (a1 + a2) / 2, v even
            if a1 % 2 or (a1 - a2) % 2:
                continue
            v1, v2 = (a1 - a2) // 2, (a1 + a2) // 2
            return WalkerState((r[0] + v1, r[1] + v2), d)
        raise NotInImageError(f"{tuple(z)} is not a vertex of the embedded graph")

    def rows(self) -> List[Tuple[str, str, Tuple[int, int, int]]]:
        out = []
        for p, d in CLASSES:
            r = REPRESENTATIVE[p]
            out.append((p.name.lower(), d.name, tuple(self.to_dual((r, d)))))
        return out

    def format(self) -> str:
        lines = ["parity dir rep      z"]
        for (p, d, z), (pp, _) in zip(self.rows(), CLASSES):
            r = REPRESENTATIVE[pp]
            lines.append(f"{p:<6} {d:<3} {str(r):<8} {z}")
        return "\n".join(lines)


# -- constraint search -------------------------------------------------------


class _Constraint(NamedTuple):
    src: Tuple[Parity, Direction]
    dst: Tuple[Parity, Direction]
    shift: Tuple[int, int]  # shear of the representative offset
    allowed: frozenset  # admissible horizontal displacements
    dst_even: bool  # destination horizontal coordinates must lie in (2Z)^2


def _constraints(turn_rule: str, backward_rule: str) -> List[_Constraint]:
    out = []
    for p, d in CLASSES:
        q = Parity(1 - p)
        for m in RelativeMove:
            d2 = relative_to_absolute(d, m)
            r, r2 = REPRESENTATIVE[p], REPRESENTATIVE[q]
            v = d2.vector
            t = (r[0] + v[0] - r2[0], r[1] + v[1] - r2[1])
            dz = level(r2, d2) - level(r, d)
            dst_even = False
            if m in (RelativeMove.L, RelativeMove.R):
                allowed = _AXIS if turn_rule == "axis" else _DIAG
            elif m is RelativeMove.F:
                allowed = frozenset({(dz, dz)}) if (p, d) in EFFECTIVE else _DIAG
            else:
                allowed = frozenset({(0, 0)})
                if (p, d) in EFFECTIVE or (backward_rule == "all-even" and p is Parity.EVEN):
                    dst_even = True
            out.append(_Constraint((p, d), (q, d2), shear(t), allowed, dst_even))
    return out


def _satisfied(c: _Constraint, base: dict) -> bool:
    h1, h2 = base[c.src], base[c.dst]
    dh = (h2[0] + c.shift[0] - h1[0], h2[1] + c.shift[1] - h1[1])
    if dh not in c.allowed:
        return False
    return not c.dst_even or _in_even_lattice((h2[0] + c.shift[0], h2[1] + c.shift[1]))


def _candidates(var, base: dict, constraints, radius: int):
    cands = None
    for c in constraints:
        if c.dst == var and c.src in base:
            h1 = base[c.src]
            s = {(h1[0] + a - c.shift[0], h1[1] + b - c.shift[1]) for a, b in c.allowed}
        elif c.src == var and c.dst in base:
            h2 = base[c.dst]
            s = {(h2[0] + c.shift[0] - a, h2[1] + c.shift[1] - b) for a, b in c.allowed}
        else:
            continue
        cands = s if cands is None else cands & s
    if cands is None:
        cands = set(itertools.product(range(-radius, radius + 1), repeat=2))
    return sorted(h for h in cands if abs(h[0]) <= radius and abs(h[1]) <= radius)


def enumerate_embeddings(
    turn_rule: str = "axis", backward_rule: str = "effective", radius: int = SEARCH_RADIUS
) -> List[EmbeddingTable]:
    """All base assignments within ``[-radius, radius]^2`` meeting the
    constraints.

    ``turn_rule`` is ``"axis"`` (unit horizontal steps) or ``"diagonal"``
    (``(+-1, +-1)`` steps); ``backward_rule`` is ``"effective"`` or
    ``"all-even"`` (every Backward move out of an even site lands over
    ``(2Z)^2``).  The non-default variants admit no solution; they are kept
    so that this can be checked.
    """
    if turn_rule not in ("axis", "diagonal") or backward_rule not in ("effective", "all-even"):
        raise ValueError("unknown constraint variant")
    constraints = _constraints(turn_rule, backward_rule)
    anchor = (Parity.EVEN, Direction.N)
    # visit classes in breadth-first order from the anchor so every new
    # variable is pinned by an assigned neighbour
    order = [anchor]
    while len(order) < len(CLASSES):
        for c in constraints:
            for a, b in ((c.src, c.dst), (c.dst, c.src)):
                if a in order and b not in order:
                    order.append(b)
    solutions = []

    def search(i, base):
        if i == len(order):
            solutions.append(dict(base))
            return
        var = order[i]
        for h in _candidates(var, base, constraints, radius):
            base[var] = h
            if all(_satisfied(c, base) for c in constraints if c.src in base and c.dst in base):
                search(i + 1, base)
            del base[var]

    search(1, {anchor: (0, 0)})
    tables = []
    for sol in solutions:
        tables.append(
            EmbeddingTable(tuple(tuple(sol[(p, d)] for d in DIRECTIONS) for p in Parity))
        )
    return tables


@lru_cache(maxsize=None)
def solve_embedding(turn_rule: str = "axis", backward_rule: str = "effective") -> EmbeddingTable:
    """Lexicographically smallest admissible embedding.

    Raises
    ------
    UnsatisfiableError
        When no assignment satisfies the constraints.
    """
    tables = enumerate_embeddings(turn_rule, backward_rule)
    if not tables:
        raise UnsatisfiableError(
            f"no embedding with turn_rule={turn_rule!r}, backward_rule={backward_rule!r}"
        )
    return min(tables, key=lambda t: t.base)


# -- edges -------------------------------------------------------------------


def classify_transition(t: Optional[EmbeddingTable], s, s2) -> EdgeClass:
    """Class of the edge ``s -> s2``; the table is not needed for this and
    may be None."""
    s, s2 = _coerce_state(s), _coerce_state(s2)
    v = s2.incoming.vector
    if (s.position[0] + v[0], s.position[1] + v[1]) != s2.position:
        raise NotAdjacentError(f"{s} -> {s2} is not a single step")
    kind = _move_kind(absolute_to_relative(s.incoming, s2.incoming))
    lv, lv2 = level(*s), level(*s2)
    if kind is MoveKind.TURN:
        tag = EdgeTag.M1_DIAG if lv == 0 else EdgeTag.M2_DIAG
    else:
        tag = EdgeTag.L_PLUS if lv2 > lv else EdgeTag.L_MINUS
    return EdgeClass(tag, kind)


def edge_violations(t: EmbeddingTable, s, s2) -> List[str]:
    """Geometric constraints broken by the edge ``s -> s2`` (empty if none)."""
    s, s2 = _coerce_state(s), _coerce_state(s2)
    cls = classify_transition(t, s, s2)
    z, z2 = t.to_dual(s), t.to_dual(s2)
    dz = z2 - z
    out = []
    if z.z3 != level(*s) or z2.z3 != level(*s2):
        out.append("level")
    if cls.kind is MoveKind.TURN:
        if dz[2] != 0 or (dz[0], dz[1]) not in _AXIS:
            out.append(f"turn displacement {dz}")
    elif cls.kind is MoveKind.BACKWARD:
        if dz[:2] != (0, 0) or abs(dz[2]) != 1:
            out.append(f"backward displacement {dz}")
        if (parity_class(s.position), s.incoming) in EFFECTIVE and not _in_even_lattice(z2.horizontal):
            out.append(f"backward lands off (2Z)^2 at {z2.horizontal}")
    else:
        if any(abs(c) != 1 for c in dz):
            out.append(f"forward displacement {dz}")
        if (parity_class(s.position), s.incoming) in EFFECTIVE and dz not in ((1, 1, 1), (-1, -1, -1)):
            out.append(f"effective forward displacement {dz}")
    if (cls.kind is MoveKind.TURN) != (dz[2] == 0):
        out.append("level parity")
    return out


@dataclass
class ValidationReport:
    states: int = 0
    edges: int = 0
    weighted_edges: int = 0
    violations: List[str] = None

    def __post_init__(self):
        if self.violations is None:
            self.violations = []

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        status = "ok" if self.ok else f"{len(self.violations)} violations"
        return (
            f"states: {self.states}, edges: {self.edges}, "
            f"positive-probability edges: {self.weighted_edges}, {status}"
        )


_EVEN_SHIFTS = ((2, 0), (0, 2), (1, 1), (1, -1), (-2, 0), (0, -2), (-1, -1), (-1, 1))


def validate_embedding(t: EmbeddingTable, box: Box, envs: Iterable[Environment] = ()) -> ValidationReport:
    """Check every constraint at every state over ``box``.

    All four geometric successors of every state are checked, then every
    positive-probability transition of each environment is checked again
    against its class.
    """
    rep = ValidationReport()
    origin = t.to_dual(((0, 0), Direction.N))
    if tuple(origin) != (0, 0, 0):
        rep.violations.append(f"anchor maps to {tuple(origin)}")
    envs = list(envs)
    caches = [dict() for _ in envs]
    for x in box.sites():
        for d in DIRECTIONS:
            s = WalkerState(x, d)
            rep.states += 1
            z = t.to_dual(s)
            if t.from_dual(z) != s:
                rep.violations.append(f"round trip fails at {s}")
            for v in _EVEN_SHIFTS:
                zv = t.to_dual(((x[0] + v[0], x[1] + v[1]), d))
                a = shear(v)
                if zv != (z.z1 + a[0], z.z2 + a[1], z.z3):
                    rep.violations.append(f"translation by {v} fails at {s}")
            for d2 in DIRECTIONS:
                rep.edges += 1
                for msg in edge_violations(t, s, s.successor(d2)):
                    rep.violations.append(f"{s} -> {d2.name}: {msg}")
            for env, cache in zip(envs, caches):
                for s2, _ in successors(env, s, cache):
                    rep.weighted_edges += 1
                    for msg in edge_violations(t, s, s2):
                        rep.violations.append(f"[{env.kind}] {s} -> {s2.incoming.name}: {msg}")
    return rep


def classify_edges(env: Environment, box: Box) -> Dict[EdgeClass, int]:
    """Counts of positive-probability edges by class over ``box``."""
    counts: Dict[EdgeClass, int] = defaultdict(int)
    cache: dict = {}
    for x in box.sites():
        for d in DIRECTIONS:
            s = WalkerState(x, d)
            for s2, _ in successors(env, s, cache):
                counts[classify_transition(None, s, s2)] += 1
    return dict(counts)


# -- projections -------------------------------------------------------------


def proj_psi(z) -> Site:
    """Shift level 1 by ``(-1, -1)`` and drop the level."""
    return (z[0] - z[2], z[1] - z[2])


def proj_psi_bar(z) -> Site:
    """Shift level 1 by ``(1, 1)`` and drop the level."""
    return (z[0] + z[2], z[1] + z[2])


def proj_phi(x: Site) -> Site:
    """Collapse each 2x2 block to one site (componentwise floor of halves)."""
    return (x[0] // 2, x[1] // 2)


def proj_phi_bar(z) -> Site:
    return (z[0] // 2, z[1] // 2)


def remove_dead_times(seq: Sequence) -> list:
    """Collapse runs of equal consecutive entries to a single entry."""
    return [k for k, _ in groupby(seq)]


def manhattan_sign(j: int) -> int:
    return 1 if j % 2 == 0 else -1


def manhattan_neighbors(x: Site) -> Tuple[Site, Site]:
    """Out-neighbours in the Manhattan lattice: the horizontal one first."""
    return ((x[0] + manhattan_sign(x[1]), x[1]), (x[0], x[1] + manhattan_sign(x[0])))


class Scheme(enum.Enum):
    MANHATTAN_COARSE = "manhattan-coarse"  # block collapse of every second position
    LEVEL_MERGE = "level-merge"  # align the two levels, drop dead times
    TWIN_MERGE = "twin-merge"  # align levels over twin edges, collapse blocks, drop dead times
    BLOCK_PAIRS = "block-pairs"  # block collapse of every second dual vertex

    @classmethod
    def parse(cls, s):
        if isinstance(s, cls):
            return s
        for m in cls:
            if s == m.value or str(s).upper().replace("-", "_") == m.name:
                return m
        raise ValueError(f"unknown projection scheme {s!r}; expected one of {[m.value for m in cls]}")


def state_projection(t: EmbeddingTable, scheme) -> Callable[[WalkerState], Site]:
    """Per-state map used by the dead-time schemes."""
    scheme = Scheme.parse(scheme)
    if scheme is Scheme.LEVEL_MERGE:
        return lambda s: proj_psi(t.to_dual(s))
    if scheme is Scheme.TWIN_MERGE:
        return lambda s: proj_phi(proj_psi_bar(t.to_dual(s)))
    if scheme is Scheme.BLOCK_PAIRS:
        return lambda s: proj_phi_bar(t.to_dual(s))
    return lambda s: proj_phi(s.position)


def project_walk(t: EmbeddingTable, traj, scheme) -> List[Site]:
    """Projected site sequence of a trajectory.

    ``traj`` may be a :class:`Trajectory`; for ``manhattan-coarse`` it may
    also be a plain sequence of sites (a Manhattan-lattice path).
    """
    scheme = Scheme.parse(scheme)
    if scheme is Scheme.MANHATTAN_COARSE:
        pos = traj.positions() if isinstance(traj, Trajectory) else np.asarray(traj)
        return [proj_phi((int(p[0]), int(p[1]))) for p in pos[::2]]
    states = traj.states()
    f = state_projection(t, scheme)
    if scheme is Scheme.BLOCK_PAIRS:
        return [f(s) for s in states[::2]]
    return remove_dead_times([f(s) for s in states])


# -- exact laws --------------------------------------------------------------

Distribution = Dict[Site, float]


def pushforward(dist: dict, f: Callable) -> dict:
    out: dict = defaultdict(float)
    for k, p in dist.items():
        out[f(k)] += p
    return dict(out)


def total_variation(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * math.fsum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def manhattan_walk_distribution(n: int, start: Site = (0, 0)) -> Distribution:
    """Law of the standard Manhattan-lattice walk after ``n`` steps."""
    dist = {tuple(start): 1.0}
    for _ in range(n):
        nxt: Distribution = defaultdict(float)
        for x, p in dist.items():
            for y in manhattan_neighbors(x):
                nxt[y] += 0.5 * p
        dist = dict(nxt)
    return dist


def simple_walk_distribution(n: int, start: Site = (0, 0)) -> Distribution:
    """Law of the standard nearest-neighbour walk on Z^2 after ``n`` steps."""
    dist = {tuple(start): 1.0}
    for _ in range(n):
        nxt: Distribution = defaultdict(float)
        for x, p in dist.items():
            for v in ((1, 0), (0, 1), (-1, 0), (0, -1)):
                nxt[(x[0] + v[0], x[1] + v[1])] += 0.25 * p
        dist = dict(nxt)
    return dist


MAX_DEAD_COMPONENT = 10_000


def _exit_law(env: Environment, s: WalkerState, f, cache) -> Dict[WalkerState, float]:
    """Law of the first state whose projection differs from ``f(s)``.

    The walker may wander among states sharing the projection of ``s``
    first; that component is finite for the families of interest and is
    summed exactly with a linear solve.  Mass trapped forever in the
    component is dropped (the result then sums to less than one).
    """
    y = f(s)
    comp = [s]
    index = {s: 0}
    exits: List[List[Tuple[WalkerState, float]]] = []
    inner: List[List[Tuple[int, float]]] = []
    i = 0
    while i < len(comp):
        cur = comp[i]
        ex, inn = [], []
        for s2, q in successors(env, cur, cache):
            if f(s2) == y:
                if s2 not in index:
                    if len(comp) >= MAX_DEAD_COMPONENT:
                        raise RuntimeError("dead-time component too large")
                    index[s2] = len(comp)
                    comp.append(s2)
                inn.append((index[s2], q))
            else:
                ex.append((s2, q))
        exits.append(ex)
        inner.append(inn)
        i += 1
    n = len(comp)
    if n == 1 and not inner[0]:
        return _merge(exits[0])
    m = np.zeros((n, n))
    for a, inn in enumerate(inner):
        for b, q in inn:
            m[a, b] += q
    # expected visits to each component state starting from s
    e0 = np.zeros(n)
    e0[0] = 1.0
    visits = np.linalg.solve((np.eye(n) - m).T, e0)
    out: Dict[WalkerState, float] = defaultdict(float)
    for a, ex in enumerate(exits):
        for s2, q in ex:
            out[s2] += visits[a] * q
    return dict(out)


def _merge(pairs):
    out: dict = defaultdict(float)
    for k, p in pairs:
        out[k] += p
    return dict(out)


def dead_time_distribution(env: Environment, t: EmbeddingTable, xi, k: int, scheme) -> Distribution:
    """Exact law of the ``k``-th entry of the dead-time-free projected walk.

    Entry 0 is the projection of ``xi``; entry ``m`` is the projection right
    after the ``m``-th change of projected site.
    """
    f = state_projection(t, scheme)
    dist = {_coerce_state(xi): 1.0}
    cache: dict = {}
    exits: dict = {}
    for _ in range(k):
        nxt: Dict[WalkerState, float] = defaultdict(float)
        for s, p in dist.items():
            law = exits.get(s)
            if law is None:
                law = exits[s] = _exit_law(env, s, f, cache)
            for s2, q in law.items():
                nxt[s2] += p * q
        dist = dict(nxt)
    return pushforward(dist, f)


def block_pair_transitions(env: Environment, t: EmbeddingTable, s) -> Dict[Direction, float]:
    """Exact law of the block-pair projection's displacement over two steps
    from ``s``; displacements that are not unit vectors are keyed by tuple."""
    s = _coerce_state(s)
    y = proj_phi_bar(t.to_dual(s))
    out: dict = defaultdict(float)
    cache: dict = {}
    for s1, p in successors(env, s, cache):
        for s2, q in successors(env, s1, cache):
            y2 = proj_phi_bar(t.to_dual(s2))
            v = (y2[0] - y[0], y2[1] - y[1])
            try:
                key = Direction.from_vector(v)
            except (KeyError, ValueError):
                key = v
            out[key] += p * q
    return dict(out)


# -- Manhattan return reference ----------------------------------------------


@nb.njit(cache=True)
def _manhattan_first_returns(horizon, radius):
    size = 2 * radius + 1
    # ping-pong buffers: at step k only sites with x1 + x2 = k (mod 2) carry
    # mass, and each step overwrites exactly those sites
    cur = np.zeros((size, size))
    nxt = np.zeros((size, size))
    first = np.zeros(horizon + 1)
    cur[radius, radius] = 1.0
    for k in range(1, horizon + 1):
        r = min(k, radius)
        lo, hi = radius - r, radius + r
        for i in range(lo, hi + 1):  # i indexes x1
            x1 = i - radius
            sv = 1 if x1 % 2 == 0 else -1
            j0 = lo + ((x1 + lo - radius + k) & 1)
            for j in range(j0, hi + 1, 2):  # j indexes x2
                sh = 1 - 2 * ((j - radius) & 1)
                acc = 0.0
                a = i - sh
                if 0 <= a < size:
                    acc += cur[a, j]
                b = j - sv
                if 0 <= b < size:
                    acc += cur[i, b]
                nxt[i, j] = 0.5 * acc
        first[k] = nxt[radius, radius]
        nxt[radius, radius] = 0.0
        cur, nxt = nxt, cur
    return first


def manhattan_first_return(horizon: int, radius: Optional[int] = None) -> np.ndarray:
    """``P(first return to the origin = k)`` for the standard Manhattan
    walk, ``k = 0..horizon``, by dynamic programming on a finite window.

    Mass that leaves the window is discarded, so partial sums are lower
    bounds; the default window is several standard deviations wide.
    """
    if radius is None:
        radius = int(math.ceil(5.0 * math.sqrt(horizon / 2.0))) + 2
    return _manhattan_first_returns(int(horizon), int(min(radius, horizon)))
