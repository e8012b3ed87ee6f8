"""Command-line front end.

Exit codes: 0 unique / success, 2 non-unique, 3 inconclusive, 1 error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .dsl.parser import ParseError, parse_field
from .envelope import EnvelopeError, envelope
from .field import FieldError, build_field
from .measure import MeasureOracleError
from .oracle import FunnelWindowError, reachable_funnel, validate_trajectory
from .solver import (
    PreconditionError,
    SolverError,
    VerdictError,
    classical_select,
    make_grid,
    solve_classical,
    solve_filippov,
    witnesses_condition_A,
    witnesses_condition_B,
)
from .uniqueness import INCONCLUSIVE, NON_UNIQUE, UNIQUE, uniqueness_verdict

EXIT_OK, EXIT_ERROR, EXIT_NONUNIQUE, EXIT_INCONCLUSIVE = 0, 1, 2, 3
_VERDICT_EXIT = {UNIQUE: EXIT_OK, NON_UNIQUE: EXIT_NONUNIQUE, INCONCLUSIVE: EXIT_INCONCLUSIVE}


class UsageError(ValueError):
    pass


def _positive(name):
    def conv(s):
        v = float(s)
        if not v > 0:
            raise argparse.ArgumentTypeError(f"{name} must be positive")
        return v
    return conv


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="filippov1d", description="Uniqueness analysis and exact "
                                "solutions for dX/dt = b(X) with discontinuous b.")
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("field", help="field file ('-' for standard input)")
    common.add_argument("--window", nargs=2, type=float, default=(-10.0, 10.0), metavar=("A", "B"))
    common.add_argument("--tol", type=_positive("--tol"), default=1e-8)
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--out", default=None, help="output path (default: standard output)")
    timed = argparse.ArgumentParser(add_help=False)
    timed.add_argument("--x0", type=float, default=0.0)
    timed.add_argument("--t-end", type=_positive("--t-end"), default=1.0)
    timed.add_argument("--dt-out", type=_positive("--dt-out"), default=0.01)

    sub.add_parser("analyze", parents=[common], help="uniqueness verdict")
    s = sub.add_parser("solve", parents=[common, timed], help="unique or selected solution")
    s.add_argument("--classical", action="store_true", help="use the classical selector")
    s.add_argument("--force", action="store_true",
                   help="canonical maximal-delay solution when the verdict is not Unique")
    w = sub.add_parser("witness", parents=[common, timed], help="non-uniqueness witnesses")
    w.add_argument("--count", type=int, default=2)
    e = sub.add_parser("envelope", parents=[common], help="sampled envelope x,m,M")
    e.add_argument("--samples", type=int, default=101)
    o = sub.add_parser("oracle", parents=[common, timed], help="reachable funnel t,lo,hi")
    o.add_argument("--oracle-dt", type=_positive("--oracle-dt"), default=1e-3)
    o.add_argument("--oracle-dx", type=_positive("--oracle-dx"), default=1e-3)
    return p


def _read_field(path: str):
    text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    return parse_field(text)


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")


def _json(doc) -> str:
    return json.dumps(doc, indent=2, default=_json_default)


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def cmd_analyze(args, f) -> int:
    verdict = uniqueness_verdict(f)
    _emit(_json(verdict.to_dict()), args.out)
    return _VERDICT_EXIT[verdict.status]


def _write_trajectories(args, trajs, extra: dict | None = None):
    fmt = args.format or "csv"
    if fmt == "json":
        doc = {"trajectories": [t.to_dict() for t in trajs]}
        if extra:
            doc.update(extra)
        if len(trajs) == 1 and not extra:
            doc = trajs[0].to_dict()
        _emit(_json(doc), args.out)
        return
    if len(trajs) == 1:
        _emit(trajs[0].to_csv(), args.out)
    else:
        # wide layout: one column per witness on the shared grid
        n = max(len(t.t) for t in trajs)
        base = max(trajs, key=lambda t: len(t.t)).t
        header = "t," + ",".join(f"x{i}" for i in range(len(trajs)))
        rows = [header]
        for k in range(n):
            vals = [repr(float(t.x[k])) if k < len(t.x) else "" for t in trajs]
            rows.append(f"{float(base[k])!r}," + ",".join(vals))
        _emit("\n".join(rows) + "\n", args.out)
    if args.out is not None:
        side = {"events": [{"meta": t.meta, "events": [e.to_dict() for e in t.events]} for t in trajs]}
        if len(trajs) == 1:
            side = json.loads(trajs[0].events_json())
        Path(args.out + ".events.json").write_text(_json(side) + "\n", encoding="utf-8")


def cmd_solve(args, f) -> int:
    grid = make_grid(args.t_end, args.dt_out)
    if args.classical:
        sf = classical_select(f)
        traj = solve_classical(sf, args.x0, args.t_end, grid)
    else:
        try:
            traj = solve_filippov(f, args.x0, args.t_end, grid, force=args.force)
        except VerdictError as exc:
            status = exc.verdict.status if exc.verdict is not None else NON_UNIQUE
            print(f"error: {exc}. Run 'filippov1d witness' to list distinct solutions, or pass "
                  "--classical / --force.", file=sys.stderr)
            return _VERDICT_EXIT.get(status, EXIT_NONUNIQUE) or EXIT_NONUNIQUE
    _write_trajectories(args, [traj])
    if traj.t[-1] < args.t_end:
        print(f"note: trajectory left the window at t={traj.t[-1]!r}; truncated", file=sys.stderr)
    return EXIT_OK


def witness_offsets(count: int, t_end: float) -> list[float]:
    """Delays for count-1 moving witnesses: multiples of 0.5, compressed so
    that every delay is below t_end."""
    n = count - 1
    if n <= 0:
        return []
    step = min(0.5, t_end / (n + 1))
    return [step * k for k in range(1, n + 1)]


def cmd_witness(args, f) -> int:
    if args.count < 2:
        raise UsageError("--count must be at least 2")
    verdict = uniqueness_verdict(f)
    if verdict.status == UNIQUE:
        print("error: verdict is Unique; no witnesses exist", file=sys.stderr)
        return EXIT_NONUNIQUE
    if verdict.status != NON_UNIQUE:
        print("error: verdict is Inconclusive; no certified witnesses", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    dt = min(args.dt_out, 1e-3)
    cause = verdict.cause
    if cause["condition"] == "A":
        a = cause["region"][0]
        x0 = args.x0 if (cause["region"][0] <= args.x0 < cause["region"][1]) else a
        trajs = witnesses_condition_A(f, x0=x0, t_end=args.t_end, dt_out=dt, extra=args.count - 2,
                                      validate_tol=args.tol)
    else:
        x0 = cause["point"]
        trajs = witnesses_condition_B(f, x0, witness_offsets(args.count, args.t_end), args.t_end,
                                      dt_out=dt, validate_tol=args.tol)
        trajs = trajs[: args.count]
    # thin to the requested output grid
    if args.dt_out > dt:
        keep = make_grid(args.t_end, args.dt_out)
        for t in trajs:
            idx = np.searchsorted(t.t, keep - 1e-12)
            idx = idx[idx < len(t.t)]
            t.t, t.x = t.t[idx], t.x[idx]
    for t in trajs:
        t.meta["validated"] = validate_trajectory(f, t, args.tol).ok
    _write_trajectories(args, trajs, {"verdict": verdict.to_dict()} if (args.format == "json") else None)
    return EXIT_OK


def cmd_envelope(args, f) -> int:
    lo, hi = f.window
    n = max(args.samples, 2)
    xs = set(np.linspace(lo, hi, n).tolist()) | set(f.breakpoints)
    rows = []
    for x in sorted(xs):
        try:
            env = envelope(f, x)
            rows.append((x, env.m, env.M))
        except EnvelopeError as exc:
            print(f"warning: envelope undecided at x={x!r}: {exc}", file=sys.stderr)
    if (args.format or "csv") == "json":
        _emit(_json([{"x": x, "m": m, "M": M} for x, m, M in rows]), args.out)
    else:
        _emit("x,m,M\n" + "".join(f"{x!r},{m!r},{M!r}\n" for x, m, M in rows), args.out)
    return EXIT_OK


def cmd_oracle(args, f) -> int:
    try:
        fun = reachable_funnel(f, args.x0, args.t_end, args.oracle_dt, args.oracle_dx)
        code = EXIT_OK
    except FunnelWindowError as exc:
        fun = exc.funnel
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_ERROR
    if (args.format or "csv") == "json":
        _emit(_json({"dt": fun.dt, "dx": fun.dx, "truncated": fun.truncated,
                     "times": fun.times, "lo": fun.lo, "hi": fun.hi}), args.out)
    else:
        _emit(fun.to_csv(), args.out)
    return code


COMMANDS = {"analyze": cmd_analyze, "solve": cmd_solve, "witness": cmd_witness,
            "envelope": cmd_envelope, "oracle": cmd_oracle}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        lo, hi = args.window
        if not lo < hi:
            raise UsageError("--window needs A < B")
        spec = _read_field(args.field)
        f = build_field(spec, (lo, hi))
        return COMMANDS[args.command](args, f)
    except ParseError as exc:
        print(f"error: {args.field}: {exc}", file=sys.stderr)
    except (OSError, UsageError, FieldError, MeasureOracleError, PreconditionError,
            SolverError, EnvelopeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
