"""The acceptance suite: ten end-to-end checks with fixed seeds.

Each check returns a :class:`CriterionResult`; its ``line()`` is the
one-line pass/fail summary printed by ``prwalk accept`` and the test
suite.  Seeds are fixed constants chosen before any run.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np

from . import core, dual, estimators, homogeneous, randmat
from .core import Direction, W
from .environments import (
    Box,
    ZetaLaw,
    backward_inhom_env,
    flr_env,
    forward_inhom_env,
    forward_trap_env,
    homogeneous_env,
    leftright_env,
    symmetric_leftright_env,
)

SEED = 20051
BALLISTIC_ROW = (0.7, 0.1, 0.1, 0.1)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float
    limit: Optional[float] = None

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        budget = f" (limit {self.limit:g}s)" if self.limit else ""
        return f"[{status}] {self.number:>2}. {self.title}: {self.detail} [{self.seconds:.1f}s{budget}]"


def _timed(number: int, title: str, limit: Optional[float] = None):
    def wrap(fn: Callable[[], tuple]):
        def run() -> CriterionResult:
            t0 = time.perf_counter()
            ok, detail = fn()
            dt = time.perf_counter() - t0
            if limit is not None and dt > limit:
                ok = False
                detail += f"; over time budget"
            return CriterionResult(number, title, bool(ok), detail, dt, limit)

        run.number = number
        run.title = title
        return run

    return wrap


@_timed(1, "norm bound on random doubly stochastic matrices", limit=10.0)
def criterion_1():
    rng = np.random.default_rng(SEED)
    n, out_of_range, mismatches, below = 10_000, 0, 0, 0
    for _ in range(n):
        q = randmat.random_doubly_stochastic(rng)
        r = core.deviation_norm(q)
        if not 0.0 <= r <= 1.0:
            out_of_range += 1
        prim = core.is_primitive(q.T @ q)
        below += r < 1.0
        if (r < 1.0) != prim:
            mismatches += 1
    special = core.deviation_norm(core.APERIODIC_NORM_ONE)
    ok = out_of_range == 0 and mismatches == 0 and abs(special - 1.0) <= 1e-10
    detail = (
        f"{n} matrices ({below} with norm < 1), out of range: {out_of_range}, "
        f"primitivity mismatches: {mismatches}, counterexample norm: {special!r}"
    )
    return ok, detail


def _sample_classification_matrices(rng, n):
    mats = []
    for i in range(n):
        r = i % 4
        if r < 2:
            mats.append(randmat.random_primitive(rng))
        elif r == 2:
            mats.append(randmat.random_balanced(rng))
        else:
            mats.append(randmat.random_balanced(rng, p1=0.25))  # doubly stochastic
    return mats


@_timed(2, "zero-velocity criterion and Monte Carlo velocity", limit=300.0)
def criterion_2(walks: int = 10_000, horizon: int = 100_000, per_side: int = 20):
    rng = np.random.default_rng(SEED)
    mats = _sample_classification_matrices(rng, 1000)
    disagree = indeterminate = balanced = 0
    for q in mats:
        v = homogeneous.classify_homogeneous(q)
        if v.lambda_criterion is None:
            indeterminate += 1
            continue
        form = homogeneous.has_balanced_form(v.pi)
        balanced += form
        if v.lambda_criterion != form:
            disagree += 1
    zero_fail = moving_fail = 0
    worst = 0.0
    for j in range(2 * per_side):
        if j < per_side:
            q = randmat.random_balanced(rng)
        else:
            q = randmat.random_primitive(rng)
            if homogeneous.has_balanced_form(core.stationary_vector(q)):
                q = randmat.random_primitive(rng)
        pi = core.stationary_vector(q)
        target = np.zeros(2) if homogeneous.has_balanced_form(pi) else homogeneous.asymptotic_velocity(q)
        est = estimators.velocity_estimate(
            homogeneous_env(q), ((0, 0), Direction.E), horizon, walks, SEED + j, initial_law=pi
        )
        z = float(np.max(np.abs(est.mean - target) / est.stderr))
        worst = max(worst, z)
        if z > 3.0:
            if j < per_side:
                zero_fail += 1
            else:
                moving_fail += 1
    ok = disagree == 0 and indeterminate == 0 and zero_fail == 0 and moving_fail == 0
    detail = (
        f"1000 matrices ({balanced} balanced): disagreements {disagree}, indeterminate {indeterminate}; "
        f"velocity outside 3 SE: {zero_fail}/{per_side} zero-drift, {moving_fail}/{per_side} ballistic "
        f"(largest deviation {worst:.2f} SE)"
    )
    return ok, detail


@_timed(3, "isotropy corollary on flr and leftright environments", limit=5.0)
def criterion_3():
    box = Box.centered(20, 20)
    flr = flr_env(SEED, 0.1)
    bad_flr, min_eps = 0, math.inf
    for x in box.sites():
        q = flr.raw_matrix(x)
        eps = core.toth_epsilon(q) if core.is_doubly_stochastic(q) else 0.0
        if not (core.is_isotropic(q) and eps > 0 and core.toth_condition(q, eps)):
            bad_flr += 1
        min_eps = min(min_eps, eps)
    lr = leftright_env(SEED, 0.2)
    passing_lr = sum(core.toth_condition(lr.raw_matrix(x), 1e-12) for x in box.sites())
    ok = bad_flr == 0 and passing_lr == 0
    detail = (
        f"flr: {len(box) - bad_flr}/{len(box)} isotropic with norm gap > 0 (smallest {min_eps:.4f}); "
        f"leftright: {passing_lr}/{len(box)} satisfy the norm condition"
    )
    return ok, detail


def family_envs(seed: int = SEED) -> list:
    return [
        flr_env(seed, 0.1),
        flr_env(seed + 1, 0.1, swap_fb=True),
        forward_inhom_env(seed + 2, ZetaLaw(0.0, 1.0)),
        forward_trap_env(seed + 3, ZetaLaw(0.0, 1.0)),
        backward_inhom_env(seed + 4, ZetaLaw(0.0, 1.0), forbid_trap=True),
        leftright_env(seed + 5, 0.2),
        symmetric_leftright_env(),
    ]


@_timed(4, "embedding constraints over a 20x20 box", limit=30.0)
def criterion_4():
    table = dual.solve_embedding()
    rep = dual.validate_embedding(table, Box.centered(20, 20), family_envs())
    detail = rep.summary()
    if not rep.ok:
        detail += f"; first: {rep.violations[0]}"
    return rep.ok, detail


@_timed(5, "Manhattan walk collapses to the simple walk", limit=5.0)
def criterion_5():
    tvs = []
    for n in range(1, 5):
        pushed = dual.pushforward(dual.manhattan_walk_distribution(2 * n), dual.proj_phi)
        tvs.append(dual.total_variation(pushed, dual.simple_walk_distribution(n)))
    return max(tvs) < 1e-12, "total variation for n=1..4: " + ", ".join(f"{v:.1e}" for v in tvs)


PROJECTION_STARTS = (((0, 0), Direction.N), ((0, 1), Direction.N))


@_timed(6, "level-merge projection is the Manhattan walk")
def criterion_6():
    table = dual.solve_embedding()
    worst = 0.0
    for env in (symmetric_leftright_env(), forward_inhom_env(SEED, ZetaLaw.constant(0.3))):
        for xi in PROJECTION_STARTS:
            start = dual.proj_psi(table.to_dual(xi))
            for k in range(7):
                p = dual.dead_time_distribution(env, table, xi, k, dual.Scheme.LEVEL_MERGE)
                worst = max(worst, dual.total_variation(p, dual.manhattan_walk_distribution(k, start)))
    return worst < 1e-12, f"largest total variation over k<=6, two environments, two starts: {worst:.1e}"


@_timed(7, "twin-merge projection is the simple walk")
def criterion_7():
    table = dual.solve_embedding()
    env = backward_inhom_env(SEED, ZetaLaw.constant(0.4), forbid_trap=True)
    xi = ((0, 0), Direction.N)
    start = dual.proj_phi(dual.proj_psi_bar(table.to_dual(xi)))
    tvs = []
    for k in range(7):
        p = dual.dead_time_distribution(env, table, xi, k, dual.Scheme.TWIN_MERGE)
        tvs.append(dual.total_variation(p, dual.simple_walk_distribution(k, start)))
    return max(tvs) < 1e-12, f"largest total variation over k<=6: {max(tvs):.1e}"


@_timed(8, "block-pair projection of the random leftright environment")
def criterion_8(eps: float = 0.2):
    table = dual.solve_embedding()
    env = leftright_env(SEED, eps)
    worst, unbalanced, not_elliptic, checked = 0.0, 0, 0, 0
    for x in Box.centered(10, 10).sites():
        if core.parity_class(x) is not core.Parity.EVEN:
            continue
        zeta, _ = env.zeta_pair(x)
        want = {Direction.E: zeta / 2, Direction.N: (1 - zeta) / 2,
                Direction.W: zeta / 2, Direction.S: (1 - zeta) / 2}
        for d in (Direction.N, Direction.S):
            got = dual.block_pair_transitions(env, table, (x, d))
            checked += 1
            keys = set(got) | set(want)
            worst = max(worst, max(abs(got.get(k, 0.0) - want.get(k, 0.0)) for k in keys))
            if abs(got.get(Direction.E, 0) - got.get(Direction.W, 0)) > 1e-12 or abs(
                got.get(Direction.N, 0) - got.get(Direction.S, 0)
            ) > 1e-12:
                unbalanced += 1
            if min(got.get(k, 0.0) for k in Direction) < eps / 2 - 1e-15:
                not_elliptic += 1
    ok = worst <= 1e-12 and unbalanced == 0 and not_elliptic == 0
    detail = (
        f"{checked} states, largest deviation {worst:.1e}, unbalanced {unbalanced}, "
        f"below eps/2 {not_elliptic}"
    )
    return ok, detail


@_timed(9, "one-way level crossing in the forward trap environment")
def criterion_9(walks: int = 10_000, horizon: int = 10_000):
    env = forward_trap_env(SEED, ZetaLaw(0.2, 0.8))
    counts = dual.classify_edges(env, Box.centered(20, 20))
    rising = counts.get(dual.EdgeClass(dual.EdgeTag.L_PLUS, dual.MoveKind.FORWARD), 0)
    falling = sum(v for k, v in counts.items() if k.tag is dual.EdgeTag.L_MINUS)
    low = ((0, 0), Direction.N)  # level 0
    first_change, late = estimators.level_change_returns(env, low, horizon, walks, SEED)
    violations = int(np.count_nonzero(late))
    rose = int(np.count_nonzero(first_change >= 0))
    high = ((0, 0), Direction.E)  # level 1
    rs = estimators.return_statistics(env, high, horizon, walks, SEED + 1)
    reference = float(np.sum(dual.manhattan_first_return(horizon)))
    monotone = bool(np.all(np.diff(rs.fraction) >= 0))
    final = float(rs.fraction[-1])
    ok = rising > 0 and falling == 0 and violations == 0 and monotone and final > reference - 0.05
    detail = (
        f"rising forward edges {rising}, falling edges {falling}; level-0 starts: {rose}/{walks} rose, "
        f"{violations} returned afterwards; level-1 return fraction {final:.4f} "
        f"(Manhattan reference {reference:.4f}), nondecreasing: {monotone}"
    )
    return ok, detail


@_timed(10, "diffusive mean squared displacement bands", limit=300.0)
def criterion_10(walks: int = 10_000, horizon: int = 1 << 14):
    lo_n, hi_n = 1 << 7, 1 << 14
    cases = [
        ("standard", homogeneous_env(W), ((0, 0), Direction.E)),
        ("symmetric leftright", symmetric_leftright_env(), ((0, 0), Direction.N)),
    ]
    parts, ok = [], True
    for name, env, xi in cases:
        c = estimators.msd_curve(env, xi, horizon, walks, SEED)
        sel = (c.checkpoints >= lo_n) & (c.checkpoints <= hi_n)
        r = c.ratio[sel]
        inside = bool(np.all((r >= 0.5) & (r <= 2.0)))
        ok &= inside
        parts.append(f"{name} ratio in [{r.min():.3f}, {r.max():.3f}]")
    ball = estimators.msd_curve(homogeneous_env(core.rank_one(BALLISTIC_ROW)), ((0, 0), Direction.E),
                                1 << 10, walks, SEED)
    exit_ratio = float(ball.ratio[-1])
    ok &= exit_ratio > 2.0
    parts.append(f"ballistic ratio at n=1024: {exit_ratio:.1f}")
    return ok, "; ".join(parts)


CRITERIA: Dict[int, Callable[[], CriterionResult]] = {
    f.number: f
    for f in (
        criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
        criterion_6, criterion_7, criterion_8, criterion_9, criterion_10,
    )
}


def run(only=None, echo: Optional[Callable[[str], None]] = None) -> List[CriterionResult]:
    results = []
    for k in sorted(CRITERIA if only is None else only):
        res = CRITERIA[k]()
        if echo is not None:
            echo(res.line())
        results.append(res)
    return results
