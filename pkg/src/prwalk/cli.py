"""Command-line interface.

Every option can also come from a ``key=value`` file given with
``--config``; options on the command line win.  Exit status is 0 on
success, 1 when a check fails or the input is invalid, and 2 on usage
errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import acceptance, core, dual, estimators, homogeneous
from .core import Direction, TransitionMatrix
from .environments import (
    Box,
    Environment,
    ZetaLaw,
    audit_env,
    backward_inhom_env,
    flr_env,
    forward_inhom_env,
    forward_trap_env,
    homogeneous_env,
    leftright_env,
    symmetric_leftright_env,
    table_env,
)
from .errors import ParseError, PRWalkError
from .walker import Trajectory, WalkerState, simulate

SNAPSHOT_SCHEMA = "prwalk-env/1"
TRAJECTORY_SCHEMA = "prwalk-trajectory/1"
PROJECTION_SCHEMA = "prwalk-projection/1"

FAMILIES = (
    "homogeneous",
    "symmetric-leftright",
    "flr",
    "forward-inhom",
    "forward-trap",
    "backward-inhom",
    "leftright",
)

PRESETS = {
    "W": core.W,
    "standard": core.W,
    "straight-line": core.STRAIGHT_LINE,
    "symmetric-leftright": core.SYMMETRIC_LEFT_RIGHT,
    "ballistic": core.rank_one(acceptance.BALLISTIC_ROW),
}

TOTH_SWEEP = (0.01, 0.05, 0.1, 0.25, 0.5)


class UsageError(Exception):
    pass


# -- parsing helpers -----------------------------------------------------------


def parse_box(text: str) -> Box:
    """``WxH`` (centered) or ``x0:x1,y0:y1`` (half-open)."""
    s = text.strip()
    try:
        if "x" in s and ":" not in s:
            w, h = s.split("x")
            return Box.centered(int(w), int(h))
        xs, ys = s.split(",")
        x0, x1 = xs.split(":")
        y0, y1 = ys.split(":")
        return Box(int(x0), int(x1), int(y0), int(y1))
    except (ValueError, TypeError):
        raise argparse.ArgumentTypeError(f"bad box {text!r}; use WxH or x0:x1,y0:y1") from None


def parse_state(text: str) -> WalkerState:
    """``x1,x2,D`` with ``D`` one of E, N, W, S."""
    try:
        a, b, d = text.split(",")
        return WalkerState.of((int(a), int(b)), Direction.parse(d.strip()))
    except (ValueError, KeyError):
        raise argparse.ArgumentTypeError(f"bad state {text!r}; use x1,x2,D") from None


def parse_zeta(text: str) -> ZetaLaw:
    """``z`` (constant) or ``lo,hi`` (uniform)."""
    try:
        parts = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad zeta {text!r}; use z or lo,hi") from None
    if len(parts) == 1:
        return ZetaLaw.constant(parts[0])
    if len(parts) == 2:
        return ZetaLaw(parts[0], parts[1])
    raise argparse.ArgumentTypeError(f"bad zeta {text!r}; use z or lo,hi")


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1: {text!r}")
    return v


def _family(text: str) -> str:
    name = text.strip().lower().replace("_", "-")
    if name not in FAMILIES:
        raise argparse.ArgumentTypeError(f"unknown family {text!r}; expected one of {', '.join(FAMILIES)}")
    return name


def read_config(path: str) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


# -- environment snapshots -------------------------------------------------------


def write_snapshot(env: Environment, box: Box) -> str:
    lines = [f"# {SNAPSHOT_SCHEMA}", f"# {env.header()}", f"# box={box}", "# x1 x2 then 16 entries, row-major"]
    for x in box.sites():
        a = env.raw_matrix(x)
        lines.append(f"{x[0]} {x[1]} " + " ".join(repr(float(v)) for v in a.ravel()))
    lines.append(f"# audit: {audit_env(env, box).footer()}")
    return "\n".join(lines) + "\n"


def read_snapshot(text: str) -> Environment:
    meta, box, rows = {}, None, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("box="):
                try:
                    box = parse_box(body[4:])
                except argparse.ArgumentTypeError as exc:
                    raise ParseError(str(exc), lineno) from None
            elif body.startswith("kind="):
                for tok in body.split():
                    if "=" in tok:
                        k, v = tok.split("=", 1)
                        meta[k] = v
            continue
        toks = line.split()
        if len(toks) != 18:
            raise ParseError(f"expected 18 fields, found {len(toks)}", lineno)
        col = 0
        vals = []
        for i, tok in enumerate(toks):
            col = raw.index(tok, col) + 1
            try:
                vals.append(int(tok) if i < 2 else float(tok))
            except ValueError:
                raise ParseError(f"not a number: {tok!r}", lineno, col) from None
            col += len(tok) - 1
        x = (vals[0], vals[1])
        try:
            TransitionMatrix(np.array(vals[2:]).reshape(4, 4))
        except PRWalkError as exc:
            raise ParseError(f"site {x}: {exc}", lineno) from None
        rows[x] = vals[2:]
    if box is None:
        if not rows:
            raise ParseError("snapshot holds no sites")
        xs = [x for x, _ in rows]
        ys = [y for _, y in rows]
        box = Box(min(xs), max(xs) + 1, min(ys), max(ys) + 1)
    missing = [x for x in box.sites() if x not in rows]
    if missing:
        raise ParseError(f"snapshot is missing site {missing[0]}")
    kind = meta.pop("kind", "table")
    seed = int(meta.pop("seed", 0))
    return table_env(box, [rows[x] for x in box.sites()], kind=kind, seed=seed, params=meta)


# -- trajectories ------------------------------------------------------------------


def write_trajectory(t: Trajectory, fmt: str) -> str:
    if fmt == "csv":
        lines = [f"# schema={TRAJECTORY_SCHEMA}", "step,x1,x2,direction"]
        for k, s in enumerate(t.states()):
            lines.append(f"{k},{s.position[0]},{s.position[1]},{s.incoming.name}")
        return "\n".join(lines) + "\n"
    if fmt == "jsonl":
        return "".join(
            json.dumps({"step": k, "x1": s.position[0], "x2": s.position[1], "direction": s.incoming.name}) + "\n"
            for k, s in enumerate(t.states())
        )
    return str(t.initial) + "\n" + "".join(ch + "\n" for ch in t.letters())


def read_trajectory(text: str) -> Trajectory:
    """Read the plain dump: an ``x1 x2 D`` line, then one direction letter
    per line."""
    lines = [(i, ln.strip()) for i, ln in enumerate(text.splitlines(), start=1)]
    lines = [(i, ln) for i, ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ParseError("empty trajectory")
    i0, head = lines[0]
    toks = head.split()
    if len(toks) != 3:
        raise ParseError("first line must be 'x1 x2 D'", i0)
    try:
        initial = WalkerState.of((int(toks[0]), int(toks[1])), Direction.parse(toks[2]))
    except (ValueError, KeyError):
        raise ParseError("first line must be 'x1 x2 D'", i0) from None
    steps = []
    for i, ln in lines[1:]:
        try:
            steps.append(int(Direction.parse(ln)))
        except (ValueError, KeyError):
            raise ParseError(f"not a direction: {ln!r}", i, 1) from None
    return Trajectory(initial, np.array(steps, dtype=np.uint8))


# -- parser ------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, fmt_choices=("csv", "jsonl"), fmt_default="csv"):
    p.add_argument("--config", help="key=value file; command-line options override it")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--horizon", type=_positive_int, default=1000)
    p.add_argument("--ensemble", type=_positive_int, default=1000)
    p.add_argument("--box", type=parse_box, default=Box.centered(20, 20), help="WxH or x0:x1,y0:y1")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=fmt_choices, default=fmt_default)


def _env_options(p: argparse.ArgumentParser):
    p.add_argument("--env", type=_family, default="homogeneous", help="environment family")
    p.add_argument("--env-seed", type=int, help="seed of the environment (default: --seed)")
    p.add_argument("--matrix", default="W", help="matrix file or preset for the homogeneous family")
    p.add_argument("--eps", type=float, help="ellipticity floor for flr and leftright")
    p.add_argument("--zeta", type=parse_zeta, help="z or lo,hi for the forward/backward families")
    p.add_argument("--swap-fb", action="store_true", help="flr: put the straight weight on Backward")
    p.add_argument("--forbid-trap", action="store_true", help="backward-inhom: exclude twin traps")
    p.add_argument("--env-file", help="environment snapshot written by gen-env")
    p.add_argument("--start", type=parse_state, default=WalkerState.of((0, 0), Direction.N), help="x1,x2,D")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prwalk", description="Persistent random walks on Z^2.")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("analyze-matrix", help="classify a constant environment")
    p.add_argument("path", help="file with four rows of four numbers")
    _common(p, ("text", "jsonl"), "text")

    p = sub.add_parser("gen-env", help="write an environment snapshot over a box")
    _common(p, ("text",), "text")
    _env_options(p)

    p = sub.add_parser("simulate", help="write one trajectory")
    _common(p, ("text", "csv", "jsonl"), "text")
    _env_options(p)

    for verb, text in (("recurrence", "return-fraction curve"), ("msd", "mean squared displacement curve")):
        p = sub.add_parser(verb, help=text)
        _common(p)
        _env_options(p)

    p = sub.add_parser("velocity", help="ensemble velocity estimate")
    _common(p, ("text", "jsonl"), "text")
    _env_options(p)

    p = sub.add_parser("clt", help="Gaussian diagnostics of the endpoint")
    _common(p, ("text", "jsonl"), "text")
    _env_options(p)

    p = sub.add_parser("project", help="project a trajectory file")
    _common(p, ("text", "csv"), "text")
    p.add_argument("--trajectory", required=True, help="file written by 'simulate --format text'")
    p.add_argument("--scheme", required=True, choices=[s.value for s in dual.Scheme])

    p = sub.add_parser("dual-check", help="solve and validate the embedding")
    _common(p, ("text",), "text")

    p = sub.add_parser("accept", help="run the acceptance suite")
    _common(p, ("text",), "text")
    p.add_argument("--only", help="comma-separated criterion numbers")
    return parser


def _subparser(parser: argparse.ArgumentParser, verb: str) -> argparse.ArgumentParser:
    for a in parser._actions:
        if isinstance(a, argparse._SubParsersAction):
            return a.choices[verb]
    raise KeyError(verb)


def _config_tokens(sub: argparse.ArgumentParser, cfg: dict) -> List[str]:
    by_dest = {a.dest: a for a in sub._actions if a.option_strings and a.dest not in ("help", "config")}
    positional = {a.dest for a in sub._actions if not a.option_strings}
    tokens: List[str] = []
    for key, value in cfg.items():
        if key in positional:
            raise UsageError(f"{key!r} must be given on the command line")
        action = by_dest.get(key)
        if action is None:
            raise UsageError(f"unknown config key {key!r}")
        opt = action.option_strings[-1]
        if isinstance(action, argparse._StoreTrueAction):
            if value.lower() in ("1", "true", "yes", "on"):
                tokens.append(opt)
            elif value.lower() not in ("0", "false", "no", "off"):
                raise UsageError(f"config key {key!r} expects true or false")
        else:
            tokens.append(f"{opt}={value}")
    return tokens


def parse_args(argv: List[str]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = read_config(args.config)
        sub = _subparser(parser, args.verb)
        tokens = _config_tokens(sub, cfg)
        # argparse keeps the last occurrence, so command-line options win
        rest = argv[argv.index(args.verb) + 1:]
        args = parser.parse_args([args.verb] + tokens + rest)
    return args


# -- environments from options -------------------------------------------------------


def _matrix(name: str) -> TransitionMatrix:
    if name in PRESETS:
        return PRESETS[name]
    path = Path(name)
    if not path.exists():
        raise UsageError(f"--matrix: no preset or file named {name!r} (presets: {', '.join(PRESETS)})")
    return TransitionMatrix.from_text(path.read_text())


def make_env(args) -> Environment:
    if args.env_file:
        return read_snapshot(Path(args.env_file).read_text())
    seed = args.seed if args.env_seed is None else args.env_seed
    fam = args.env

    def need(name):
        v = getattr(args, name)
        if v is None:
            raise UsageError(f"the {fam} family needs --{name.replace('_', '-')}")
        return v

    if fam == "homogeneous":
        return homogeneous_env(_matrix(args.matrix))
    if fam == "symmetric-leftright":
        return symmetric_leftright_env()
    if fam == "flr":
        return flr_env(seed, need("eps"), swap_fb=args.swap_fb)
    if fam == "forward-inhom":
        return forward_inhom_env(seed, need("zeta"))
    if fam == "forward-trap":
        return forward_trap_env(seed, need("zeta"))
    if fam == "backward-inhom":
        return backward_inhom_env(seed, need("zeta"), forbid_trap=args.forbid_trap)
    if fam == "leftright":
        return leftright_env(seed, need("eps"))
    raise UsageError(f"unknown family {fam!r}")


# -- commands ----------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, float):
        if math.isnan(v):
            return "indeterminate"
        if math.isinf(v):
            return "inf"
        return f"{v:.10g}"
    return str(v)


def _vec(v) -> str:
    return "(" + ", ".join(_fmt(float(x)) for x in v) + ")"


def cmd_analyze_matrix(args) -> tuple:
    q = TransitionMatrix.from_text(Path(args.path).read_text())
    verdict = homogeneous.classify_homogeneous(q)
    ds = core.is_doubly_stochastic(q)
    norm = core.deviation_norm(q) if ds else None
    sweep = {eps: core.toth_condition(q, eps) for eps in TOTH_SWEEP}
    conds = core.sufficient_conditions(q) if ds else None
    if args.format == "jsonl":
        rec = verdict.as_dict()
        rec.update(
            doubly_stochastic=ds,
            deviation_norm=norm,
            toth={str(k): v for k, v in sweep.items()},
            sufficient_conditions=None if conds is None else conds._asdict(),
        )
        return json.dumps(rec, sort_keys=True) + "\n", 0
    lines = [
        f"classification: {verdict.classification.value}",
        "ratios: " + ", ".join(_fmt(v) for v in verdict.lambdas),
        f"ratios agree: {_fmt(verdict.lambda_criterion) if verdict.lambda_criterion is not None else 'indeterminate'}",
        "stationary: " + ("none (not primitive)" if verdict.pi is None else _vec(verdict.pi)),
        "velocity: " + ("undetermined" if verdict.velocity is None else _vec(verdict.velocity)),
    ]
    if ds:
        lines.append(f"|Q-W| = {_fmt(norm)}")
        lines.append(
            "norm condition: "
            + ("fails for all eps" if norm >= 1.0 else f"holds for eps <= {_fmt(1.0 - norm)}")
            + " (sweep: " + ", ".join(f"{e:g}:{'yes' if sweep[e] else 'no'}" for e in TOTH_SWEEP) + ")"
        )
        lines.append(
            "sufficient conditions: "
            f"sparse columns {conds.sparse_columns}, normal primitive {conds.normal_primitive}, "
            f"positive diagonal {conds.positive_diagonal}"
        )
    else:
        lines.append("|Q-W|: not defined (not doubly stochastic); norm condition fails")
    return "\n".join(lines) + "\n", 0


def cmd_gen_env(args) -> tuple:
    return write_snapshot(make_env(args), args.box), 0


def cmd_simulate(args) -> tuple:
    env = make_env(args)
    t = simulate(env, args.start, args.horizon, args.seed)
    return write_trajectory(t, args.format), 0


def _report(args) -> estimators.StatReport:
    env = make_env(args)
    return estimators.run_ensemble(env, args.start, args.horizon, args.ensemble, args.seed).report()


def cmd_recurrence(args) -> tuple:
    r = _report(args)
    return (r.to_csv() if args.format == "csv" else r.to_json() + "\n"), 0


cmd_msd = cmd_recurrence


def cmd_velocity(args) -> tuple:
    env = make_env(args)
    v = estimators.velocity_estimate(env, args.start, args.horizon, args.ensemble, args.seed)
    if args.format == "jsonl":
        rec = {"velocity": list(map(float, v.mean)), "stderr": list(map(float, v.stderr)),
               "horizon": v.horizon, "ensemble": v.ensemble}
        return json.dumps(rec) + "\n", 0
    return f"velocity: {_vec(v.mean)} +- {_vec(v.stderr)} (horizon {v.horizon}, ensemble {v.ensemble})\n", 0


def cmd_clt(args) -> tuple:
    env = make_env(args)
    c = estimators.clt_diagnostic(env, args.start, args.horizon, args.ensemble, args.seed)
    if args.format == "jsonl":
        rec = {
            "mean": list(map(float, c.mean)),
            "mean_stderr": list(map(float, c.mean_stderr)),
            "covariance": c.covariance.tolist(),
            "quadrants": list(map(float, c.quadrants)),
            "gaussian_quadrants": list(map(float, c.gaussian_quadrants)),
            "centered": c.centered,
        }
        return json.dumps(rec) + "\n", 0
    lines = [
        f"scaled mean: {_vec(c.mean)} +- {_vec(c.mean_stderr)}",
        f"centered: {c.centered}",
        f"covariance: {_vec(c.covariance[0])} {_vec(c.covariance[1])}",
        f"quadrants (++, -+, --, +-): {_vec(c.quadrants)}",
        f"gaussian quadrants: {_vec(c.gaussian_quadrants)}",
    ]
    return "\n".join(lines) + "\n", 0


def cmd_project(args) -> tuple:
    traj = read_trajectory(Path(args.trajectory).read_text())
    table = dual.solve_embedding()
    ys = dual.project_walk(table, traj, args.scheme)
    if args.format == "csv":
        lines = [f"# schema={PROJECTION_SCHEMA} scheme={args.scheme}", "m,y1,y2"]
        lines += [f"{m},{y[0]},{y[1]}" for m, y in enumerate(ys)]
    else:
        lines = [f"# {PROJECTION_SCHEMA} scheme={args.scheme}"] + [f"{y[0]} {y[1]}" for y in ys]
    return "\n".join(lines) + "\n", 0


def cmd_dual_check(args) -> tuple:
    table = dual.solve_embedding()
    rep = dual.validate_embedding(table, args.box, acceptance.family_envs(args.seed))
    lines = [table.format(), f"box {args.box}: {rep.summary()}"]
    lines += [f"violation: {v}" for v in rep.violations[:20]]
    return "\n".join(lines) + "\n", 0 if rep.ok else 1


def cmd_accept(args) -> tuple:
    only = None
    if args.only:
        try:
            only = [int(v) for v in args.only.split(",")]
        except ValueError:
            raise UsageError(f"--only expects comma-separated numbers, got {args.only!r}") from None
        unknown = [k for k in only if k not in acceptance.CRITERIA]
        if unknown:
            raise UsageError(f"no criterion numbered {unknown[0]}")
    echo = None if args.out else (lambda s: print(s, flush=True))
    results = acceptance.run(only, echo=echo)
    passed = sum(r.passed for r in results)
    text = "" if echo else "\n".join(r.line() for r in results) + "\n"
    text += f"{passed}/{len(results)} criteria passed\n"
    return text, 0 if passed == len(results) else 1


COMMANDS = {
    "analyze-matrix": cmd_analyze_matrix,
    "gen-env": cmd_gen_env,
    "simulate": cmd_simulate,
    "recurrence": cmd_recurrence,
    "msd": cmd_msd,
    "velocity": cmd_velocity,
    "clt": cmd_clt,
    "project": cmd_project,
    "dual-check": cmd_dual_check,
    "accept": cmd_accept,
}


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(f"prwalk: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else 2
    except OSError as exc:
        print(f"prwalk: error: {exc}", file=sys.stderr)
        return 2
    try:
        text, code = COMMANDS[args.verb](args)
    except UsageError as exc:
        print(f"prwalk {args.verb}: error: {exc}", file=sys.stderr)
        return 2
    except (PRWalkError, ValueError, OSError, IndexError) as exc:
        print(f"prwalk {args.verb}: error: {exc}", file=sys.stderr)
        return 1
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
