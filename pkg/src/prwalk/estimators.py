"""Monte Carlo ensembles: return curves, mean squared displacement,
velocity, and Gaussian diagnostics.

Walk ``i`` of an ensemble with master seed ``m`` uses the trajectory seed
``walk_seed(m, i)``, so any contiguous range of walk indices can be run on
its own and the integer accumulators merged afterwards; merged results are
identical to a single run.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import List, Optional

import numba as nb
import numpy as np
from scipy.stats import multivariate_normal, norm

from .environments import HOMOGENEOUS, Environment, env_row
from .rng import as_seed, step_uniform, trajectory_seed
from .walker import _coerce_state, pick, thresholds

CSV_SCHEMA = "prwalk-checkpoints/1"
CSV_COLUMNS = (
    "n",
    "return_fraction",
    "return_stderr",
    "first_returns_in_bin",
    "msd",
    "msd_stderr",
    "msd_ratio",
    "mean_x1",
    "mean_x2",
)

# slots of the per-checkpoint position sums; |X|^4 is kept exactly as
# three limbs in base 2^20 so that nothing overflows below the limits
_SX, _SY, _SXX, _SYY, _SXY, _R4_HI, _R4_MID, _R4_LO = range(8)
_NPOS = 8
_LIMB = 20
MAX_HORIZON = 1_000_000
MAX_ENSEMBLE = 1 << 21


def checkpoints(horizon: int) -> np.ndarray:
    """Powers of two below ``horizon``, then ``horizon`` itself."""
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    cps = [1 << j for j in range(64) if (1 << j) < horizon]
    cps.append(int(horizon))
    return np.array(cps, dtype=np.int64)


@nb.njit(inline="always", cache=True)
def _level(x, y, d):
    return 1 if ((x + y) & 1) == (d & 1) else 0


@nb.njit(cache=True)
def _ensemble(code, seed, iprm, fprm, table, x0, y0, d0, master, start, stop, cps,
              pos, ret, cnt, cnt_sq, quad):
    ncp = cps.shape[0]
    horizon = cps[ncp - 1]
    row = np.empty(4)
    t = np.empty(3)
    th = np.empty((4, 3))
    homog = code == HOMOGENEOUS
    if homog:
        for d in range(4):
            env_row(code, seed, iprm, fprm, table, 0, 0, d, row)
            thresholds(row, t)
            th[d, 0] = t[0]
            th[d, 1] = t[1]
            th[d, 2] = t[2]
    mask = (1 << _LIMB) - 1
    c = np.zeros(4, dtype=np.int64)
    for i in range(start, stop):
        tseed = trajectory_seed(master, i)
        x, y, d = x0, y0, d0
        c[:] = 0
        returned = False
        j = 0
        for k in range(horizon):
            if homog:
                u = step_uniform(tseed, k)
                d = (u >= th[d, 0]) + (u >= th[d, 1]) + (u >= th[d, 2])
            else:
                env_row(code, seed, iprm, fprm, table, x, y, d, row)
                thresholds(row, t)
                d = pick(t, step_uniform(tseed, k))
            x += (d == 0) - (d == 2)
            y += (d == 1) - (d == 3)
            c[d] += 1
            if not returned and x == x0 and y == y0 and d == d0:
                returned = True
                # binned by the first checkpoint >= k + 1
                ret[j] += 1
            if k + 1 == cps[j]:
                pos[j, _SX] += x
                pos[j, _SY] += y
                pos[j, _SXX] += x * x
                pos[j, _SYY] += y * y
                pos[j, _SXY] += x * y
                r2 = x * x + y * y
                hi = r2 >> _LIMB
                lo = r2 & mask
                pos[j, _R4_HI] += hi * hi
                pos[j, _R4_MID] += 2 * hi * lo
                pos[j, _R4_LO] += lo * lo
                j += 1
        for a in range(4):
            cnt[a] += c[a]
            cnt_sq[a] += c[a] * c[a]
        # endpoint quadrant in quarter units, axis points split evenly
        qx = 2 if x > 0 else (1 if x == 0 else 0)
        qy = 2 if y > 0 else (1 if y == 0 else 0)
        quad[0] += qx * qy
        quad[1] += (2 - qx) * qy
        quad[2] += (2 - qx) * (2 - qy)
        quad[3] += qx * (2 - qy)
    return 0


@nb.njit(cache=True)
def _level_changes(code, seed, iprm, fprm, table, x0, y0, d0, master, start, stop, horizon):
    """Per walk: the step of the first level change (or -1) and the number
    of returns to the initial state after it."""
    row = np.empty(4)
    t = np.empty(3)
    lev0 = _level(x0, y0, d0)
    first_change = np.full(stop - start, -1, dtype=np.int64)
    late_returns = np.zeros(stop - start, dtype=np.int64)
    for i in range(start, stop):
        tseed = trajectory_seed(master, i)
        x, y, d = x0, y0, d0
        for k in range(horizon):
            env_row(code, seed, iprm, fprm, table, x, y, d, row)
            thresholds(row, t)
            d = pick(t, step_uniform(tseed, k))
            x += (d == 0) - (d == 2)
            y += (d == 1) - (d == 3)
            if first_change[i - start] < 0 and _level(x, y, d) != lev0:
                first_change[i - start] = k + 1
            if first_change[i - start] >= 0 and x == x0 and y == y0 and d == d0:
                late_returns[i - start] += 1
    return first_change, late_returns


_BLOCK = 16


@nb.njit(cache=True, boundscheck=False)
def _homogeneous_endpoints(th, x0, y0, d0, horizon, master, start, stop, out, init):
    """Endpoint sums ``(sx, sy, sxx, syy, sxy)`` for a constant environment,
    stepping a block of walks in lockstep to overlap their hash latency.

    If ``init`` holds CDF cut points the initial direction of each walk is
    drawn from them with the walk's extra uniform (step index -1).
    """
    c0 = th[:, 0].copy()
    c1 = th[:, 1].copy()
    c2 = th[:, 2].copy()
    s = np.empty(_BLOCK, dtype=np.uint64)
    dd = np.empty(_BLOCK, dtype=np.int64)
    xs = np.empty(_BLOCK, dtype=np.int64)
    ys = np.empty(_BLOCK, dtype=np.int64)
    i = start
    while i < stop:
        m = min(_BLOCK, stop - i)
        for b in range(m):
            s[b] = trajectory_seed(master, i + b)
            dd[b] = d0 if init.shape[0] == 0 else pick(init, step_uniform(s[b], -1))
            xs[b] = x0
            ys[b] = y0
        for k in range(horizon):
            for b in range(m):
                u = step_uniform(s[b], k)
                d = dd[b]
                d = (u >= c0[d]) + (u >= c1[d]) + (u >= c2[d])
                dd[b] = d
                xs[b] += (d == 0) - (d == 2)
                ys[b] += (d == 1) - (d == 3)
        for b in range(m):
            x, y = xs[b], ys[b]
            out[0] += x
            out[1] += y
            out[2] += x * x
            out[3] += y * y
            out[4] += x * y
        i += m
    return 0


@nb.njit(cache=True)
def _endpoints(code, seed, iprm, fprm, table, x0, y0, d0, master, start, stop, n):
    out = np.empty((stop - start, 3), dtype=np.int64)
    row = np.empty(4)
    t = np.empty(3)
    for i in range(start, stop):
        tseed = trajectory_seed(master, i)
        x, y, d = x0, y0, d0
        for k in range(n):
            env_row(code, seed, iprm, fprm, table, x, y, d, row)
            thresholds(row, t)
            d = pick(t, step_uniform(tseed, k))
            x += (d == 0) - (d == 2)
            y += (d == 1) - (d == 3)
        out[i - start, 0] = x
        out[i - start, 1] = y
        out[i - start, 2] = d
    return out


def _threshold_table(env: Environment) -> np.ndarray:
    th = np.empty((4, 3))
    t = np.empty(3)
    for d in range(4):
        thresholds(env.row((0, 0), d), t)
        th[d] = t
    return th


@dataclass
class EnsembleAccumulator:
    """Integer sums over a range of walks; a commutative monoid under
    :meth:`merge`."""

    horizon: int
    cps: np.ndarray
    walks: int = 0
    pos: np.ndarray = None  # (checkpoints, 8)
    ret: np.ndarray = None  # first returns binned by checkpoint
    cnt: np.ndarray = None
    cnt_sq: np.ndarray = None
    quad: np.ndarray = None  # quarter-unit quadrant counts: ++, -+, --, +-

    def __post_init__(self):
        k = len(self.cps)
        if self.pos is None:
            self.pos = np.zeros((k, _NPOS), dtype=np.int64)
            self.ret = np.zeros(k, dtype=np.int64)
            self.cnt = np.zeros(4, dtype=np.int64)
            self.cnt_sq = np.zeros(4, dtype=np.int64)
            self.quad = np.zeros(4, dtype=np.int64)

    @classmethod
    def run(cls, env: Environment, xi, horizon: int, seed: int, start: int, stop: int,
            cps: Optional[np.ndarray] = None) -> "EnsembleAccumulator":
        if horizon > MAX_HORIZON or stop - start > MAX_ENSEMBLE:
            raise ValueError(f"horizon <= {MAX_HORIZON} and ensemble <= {MAX_ENSEMBLE} required")
        xi = _coerce_state(xi)
        cps = checkpoints(horizon) if cps is None else np.asarray(cps, dtype=np.int64)
        acc = cls(int(horizon), cps)
        _ensemble(*env.kernel_args(), xi.position[0], xi.position[1], int(xi.incoming),
                  as_seed(seed), int(start), int(stop), cps,
                  acc.pos, acc.ret, acc.cnt, acc.cnt_sq, acc.quad)
        acc.walks = int(stop - start)
        return acc

    def merge(self, other: "EnsembleAccumulator") -> "EnsembleAccumulator":
        if self.horizon != other.horizon or not np.array_equal(self.cps, other.cps):
            raise ValueError("cannot merge ensembles with different checkpoints")
        return EnsembleAccumulator(
            self.horizon, self.cps, self.walks + other.walks,
            self.pos + other.pos, self.ret + other.ret, self.cnt + other.cnt,
            self.cnt_sq + other.cnt_sq, self.quad + other.quad,
        )

    def same_as(self, other: "EnsembleAccumulator") -> bool:
        return self.walks == other.walks and all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("cps", "pos", "ret", "cnt", "cnt_sq", "quad")
        )

    def report(self) -> "StatReport":
        return StatReport.from_accumulator(self)


def run_ensemble(env: Environment, xi, horizon: int, ensemble: int, seed: int,
                 shards: int = 1) -> EnsembleAccumulator:
    if ensemble < 1 or horizon < 1:
        raise ValueError("horizon and ensemble must be at least 1")
    bounds = np.linspace(0, ensemble, max(1, shards) + 1).astype(int)
    acc = None
    for a, b in zip(bounds[:-1], bounds[1:]):
        if b <= a:
            continue
        part = EnsembleAccumulator.run(env, xi, horizon, seed, a, b)
        acc = part if acc is None else acc.merge(part)
    return acc


def _mean_se(s: int, ss: int, n: int):
    """Mean and standard error of the mean from exact integer sums."""
    mean = s / n
    if n < 2:
        return mean, math.nan
    var = (n * int(ss) - int(s) * int(s)) / (n * (n - 1))
    return mean, math.sqrt(max(var, 0.0) / n)


@dataclass
class StatReport:
    ensemble: int
    horizon: int
    checkpoints: np.ndarray
    return_fraction: np.ndarray
    return_stderr: np.ndarray
    first_return_hist: np.ndarray
    msd: np.ndarray
    msd_stderr: np.ndarray
    mean_position: np.ndarray  # (checkpoints, 2)
    velocity: np.ndarray
    velocity_stderr: np.ndarray
    covariance: np.ndarray  # of X_horizon / sqrt(horizon)
    quadrants: np.ndarray  # ++, -+, --, +-
    counting_average: np.ndarray
    counting_stderr: np.ndarray

    @property
    def msd_ratio(self) -> np.ndarray:
        return self.msd / self.checkpoints

    @classmethod
    def from_accumulator(cls, acc: EnsembleAccumulator) -> "StatReport":
        n = acc.walks
        cps = acc.cps
        hits = np.cumsum(acc.ret)
        frac = hits / n
        se = np.sqrt(frac * (1 - frac) / n)
        msd = np.empty(len(cps))
        msd_se = np.empty(len(cps))
        mean = np.empty((len(cps), 2))
        for j in range(len(cps)):
            p = [int(v) for v in acc.pos[j]]
            r2 = p[_SXX] + p[_SYY]
            r4 = (p[_R4_HI] << (2 * _LIMB)) + (p[_R4_MID] << _LIMB) + p[_R4_LO]
            msd[j], msd_se[j] = _mean_se(r2, r4, n)
            mean[j] = (p[_SX] / n, p[_SY] / n)
        p = [int(v) for v in acc.pos[-1]]
        h = acc.horizon
        vx, sex = _mean_se(p[_SX], p[_SXX], n)
        vy, sey = _mean_se(p[_SY], p[_SYY], n)
        cov = _covariance(p[_SX], p[_SY], p[_SXX], p[_SYY], p[_SXY], n) / h
        ca = np.empty(4)
        cse = np.empty(4)
        for a in range(4):
            ca[a], cse[a] = _mean_se(int(acc.cnt[a]), int(acc.cnt_sq[a]), n)
        return cls(
            ensemble=n,
            horizon=h,
            checkpoints=cps.copy(),
            return_fraction=frac,
            return_stderr=se,
            first_return_hist=acc.ret.copy(),
            msd=msd,
            msd_stderr=msd_se,
            mean_position=mean,
            velocity=np.array([vx, vy]) / h,
            velocity_stderr=np.array([sex, sey]) / h,
            covariance=cov,
            quadrants=acc.quad / (4.0 * n),
            counting_average=ca / h,
            counting_stderr=cse / h,
        )

    def rows(self) -> List[tuple]:
        return [
            (
                int(n), float(f), float(s), int(h), float(m), float(ms), float(m / n),
                float(mp[0]), float(mp[1]),
            )
            for n, f, s, h, m, ms, mp in zip(
                self.checkpoints, self.return_fraction, self.return_stderr,
                self.first_return_hist, self.msd, self.msd_stderr, self.mean_position,
            )
        ]

    def to_csv(self) -> str:
        lines = [f"# schema={CSV_SCHEMA} ensemble={self.ensemble} horizon={self.horizon}",
                 ",".join(CSV_COLUMNS)]
        for r in self.rows():
            lines.append(",".join(repr(v) for v in r))
        return "\n".join(lines) + "\n"

    def as_dict(self) -> dict:
        return {
            "ensemble": self.ensemble,
            "horizon": self.horizon,
            "checkpoints": [int(v) for v in self.checkpoints],
            "return_fraction": [float(v) for v in self.return_fraction],
            "return_stderr": [float(v) for v in self.return_stderr],
            "first_return_hist": [int(v) for v in self.first_return_hist],
            "msd": [float(v) for v in self.msd],
            "msd_ratio": [float(v) for v in self.msd_ratio],
            "velocity": [float(v) for v in self.velocity],
            "velocity_stderr": [float(v) for v in self.velocity_stderr],
            "covariance": [[float(v) for v in r] for r in self.covariance],
            "quadrants": [float(v) for v in self.quadrants],
            "counting_average": [float(v) for v in self.counting_average],
            "counting_stderr": [float(v) for v in self.counting_stderr],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


def _covariance(sx, sy, sxx, syy, sxy, n) -> np.ndarray:
    if n < 2:
        return np.full((2, 2), math.nan)
    cxx = (n * sxx - sx * sx) / (n * (n - 1))
    cyy = (n * syy - sy * sy) / (n * (n - 1))
    cxy = (n * sxy - sx * sy) / (n * (n - 1))
    return np.array([[cxx, cxy], [cxy, cyy]], dtype=float)


# -- front ends ----------------------------------------------------------------


@dataclass(frozen=True)
class ReturnStats:
    checkpoints: np.ndarray
    fraction: np.ndarray
    stderr: np.ndarray
    histogram: np.ndarray
    ensemble: int


def return_statistics(env: Environment, xi, horizon: int, ensemble: int, seed: int) -> ReturnStats:
    """Fraction of walks back at their initial state by each checkpoint."""
    r = run_ensemble(env, xi, horizon, ensemble, seed).report()
    return ReturnStats(r.checkpoints, r.return_fraction, r.return_stderr, r.first_return_hist, r.ensemble)


@dataclass(frozen=True)
class MSDCurve:
    checkpoints: np.ndarray
    msd: np.ndarray
    stderr: np.ndarray

    @property
    def ratio(self) -> np.ndarray:
        return self.msd / self.checkpoints


def msd_curve(env: Environment, xi, horizon: int, ensemble: int, seed: int) -> MSDCurve:
    r = run_ensemble(env, xi, horizon, ensemble, seed).report()
    return MSDCurve(r.checkpoints, r.msd, r.msd_stderr)


@dataclass(frozen=True)
class VelocityEstimate:
    mean: np.ndarray
    stderr: np.ndarray
    horizon: int
    ensemble: int

    def within(self, v, k: float = 3.0) -> bool:
        """Whether each component lies within ``k`` standard errors of ``v``."""
        return bool(np.all(np.abs(self.mean - np.asarray(v, float)) <= k * self.stderr))


def endpoint_sums(env: Environment, xi, horizon: int, seed: int, start: int, stop: int,
                  initial_law=None) -> np.ndarray:
    """Integer sums ``(sx, sy, sxx, syy, sxy)`` of endpoints of walks
    ``start..stop-1``.

    ``initial_law`` (constant environments only) draws each walk's initial
    direction from the given probability vector instead of using
    ``xi``'s; starting from the stationary law removes the initial
    transient from ``E[X_n]``.
    """
    xi = _coerce_state(xi)
    out = np.zeros(5, dtype=np.int64)
    init = np.zeros(0)
    if initial_law is not None:
        if env.code != HOMOGENEOUS:
            raise ValueError("initial_law is only supported for constant environments")
        init = np.empty(3)
        thresholds(np.asarray(initial_law, dtype=np.float64), init)
    if env.code == HOMOGENEOUS:
        _homogeneous_endpoints(_threshold_table(env), xi.position[0], xi.position[1],
                               int(xi.incoming), int(horizon), as_seed(seed), int(start), int(stop),
                               out, init)
    else:
        acc = EnsembleAccumulator.run(env, xi, horizon, seed, start, stop,
                                      cps=np.array([horizon], dtype=np.int64))
        out[:] = acc.pos[0, :5]
    return out


def velocity_estimate(env: Environment, xi, horizon: int, ensemble: int, seed: int,
                      initial_law=None) -> VelocityEstimate:
    """Ensemble mean of ``X_horizon / horizon`` with standard errors."""
    if ensemble < 1 or horizon < 1:
        raise ValueError("horizon and ensemble must be at least 1")
    s = [int(v) for v in endpoint_sums(env, xi, horizon, seed, 0, ensemble, initial_law)]
    mx, sx = _mean_se(s[0], s[2], ensemble)
    my, sy = _mean_se(s[1], s[3], ensemble)
    return VelocityEstimate(np.array([mx, my]) / horizon, np.array([sx, sy]) / horizon, horizon, ensemble)


@dataclass(frozen=True)
class CLTReport:
    mean: np.ndarray  # of X_horizon / sqrt(horizon)
    mean_stderr: np.ndarray
    covariance: np.ndarray
    quadrants: np.ndarray  # empirical ++, -+, --, +-
    gaussian_quadrants: np.ndarray  # fitted Gaussian's masses, same order
    centered: bool

    @property
    def quadrant_gap(self) -> float:
        return float(np.max(np.abs(self.quadrants - self.gaussian_quadrants)))

    @property
    def degenerate(self) -> bool:
        return bool(np.min(np.linalg.eigvalsh(self.covariance)) <= 1e-9)

    def isotropy_gap(self) -> float:
        """Relative distance of the covariance from its best multiple of the
        identity."""
        c = self.covariance
        s = np.trace(c) / 2
        return float(np.linalg.norm(c - s * np.eye(2)) / s)


def gaussian_quadrants(mean, cov) -> np.ndarray:
    mean = np.asarray(mean, float)
    cov = np.asarray(cov, float)
    sx, sy = math.sqrt(cov[0, 0]), math.sqrt(cov[1, 1])
    px_neg = norm.cdf(-mean[0] / sx)
    py_neg = norm.cdf(-mean[1] / sy)
    mm = float(multivariate_normal(mean=mean, cov=cov, allow_singular=True).cdf([0.0, 0.0]))
    mp = px_neg - mm
    pm = py_neg - mm
    pp = 1.0 - px_neg - py_neg + mm
    return np.array([pp, mp, mm, pm])


def clt_diagnostic(env: Environment, xi, horizon: int, ensemble: int, seed: int,
                   z: float = 4.0) -> CLTReport:
    """Endpoint covariance and quadrant frequencies against the fitted
    Gaussian.  The walk is flagged non-centered when some mean component of
    ``X_horizon / sqrt(horizon)`` is more than ``z`` standard errors from 0."""
    r = run_ensemble(env, xi, horizon, ensemble, seed).report()
    h = r.horizon
    mean = r.velocity * math.sqrt(h)
    mean_se = r.velocity_stderr * math.sqrt(h)
    centered = bool(np.all(np.abs(mean) <= z * mean_se))
    return CLTReport(mean, mean_se, r.covariance, r.quadrants, gaussian_quadrants(mean, r.covariance), centered)


def counting_average(env: Environment, xi, horizon: int, ensemble: int, seed: int):
    """Average fraction of steps in each direction, with standard errors."""
    r = run_ensemble(env, xi, horizon, ensemble, seed).report()
    return r.counting_average, r.counting_stderr


def sample_endpoints(env: Environment, xi, n: int, ensemble: int, seed: int) -> np.ndarray:
    """``(ensemble, 3)`` array of final ``(x1, x2, direction)``."""
    xi = _coerce_state(xi)
    return _endpoints(*env.kernel_args(), xi.position[0], xi.position[1], int(xi.incoming),
                      as_seed(seed), 0, int(ensemble), int(n))


def level_change_returns(env: Environment, xi, horizon: int, ensemble: int, seed: int):
    """Per walk: step of the first level change (-1 if none) and the number
    of returns to the initial state after it."""
    xi = _coerce_state(xi)
    return _level_changes(*env.kernel_args(), xi.position[0], xi.position[1], int(xi.incoming),
                          as_seed(seed), 0, int(ensemble), int(horizon))
