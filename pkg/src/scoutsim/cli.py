"""Command-line entry point.

Subcommands: validate, simulate, hitting, analyze, renewal, lemma, oracle.
All randomness flows from --seed; nothing is read from the environment, so
rerunning a command with the same arguments reproduces every output byte
(timestamps live in .meta.json sidecars, never in result files).  Exit
codes: 0 success/PASS, 1 usage or precondition failure, 2 I/O failure,
3 statistical FAIL.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import engine, renewal, walks
from .analysis import analyze_protocol, ray_domain
from .errors import BudgetExceededError, PreconditionError
from .protocol import (ProtocolError, ScoutProtocol, builtin, parse_protocol,
                       protocol_hash, validate)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_FAIL = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; the contract says 1
        raise UsageError(message)


def _load_protocol(src: str) -> ScoutProtocol:
    if src.startswith("builtin:"):
        spec = src[len("builtin:"):]
        name, _, argstr = spec.partition("?")
        params = {}
        if argstr:
            for kv in argstr.split(","):
                k, _, v = kv.partition("=")
                if not v:
                    raise UsageError(f"bad builtin parameter {kv!r}")
                params[k] = v
        for key in ("d", "dim", "c", "scouts"):
            if key in params:
                params[key] = int(params[key])
        return builtin(name, params)
    path = Path(src)
    return parse_protocol(path.read_text(encoding="utf-8"))


def _parse_targets(text: str, dim: int) -> list[tuple[int, ...]]:
    targets = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        coords = tuple(int(v) for v in chunk.split(","))
        if len(coords) != dim:
            raise UsageError(f"target {chunk!r} has {len(coords)} coordinates, needs {dim}")
        targets.append(coords)
    if not targets:
        raise UsageError("no targets given")
    return targets


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _write_output(out_dir: str | None, name: str, payload: str, argv: list[str]) -> None:
    if out_dir is None:
        return
    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    (d / name).write_text(payload, encoding="utf-8")
    meta = {"created": datetime.now(timezone.utc).isoformat(), "command": argv}
    (d / (name + ".meta.json")).write_text(_dump_json(meta), encoding="utf-8")


def _curve_csv(curve) -> str:
    lines = ["u,survivors,total"]
    for u, s, t in curve.csv_rows():
        lines.append(f"{u},{s},{t}")
    return "\n".join(lines) + "\n"


def _target_slug(target) -> str:
    return "_".join(str(v).replace("-", "m") for v in target)


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(args, argv) -> int:
    try:
        text = Path(args.file).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        p = parse_protocol(text)
    except ProtocolError as exc:
        print(f"invalid: {exc}")
        return EXIT_USAGE
    report = validate(p)
    if report:
        for v in report:
            print(f"violation: {v.message}")
        return EXIT_USAGE
    print(f"ok: {protocol_hash(p)}")
    return EXIT_OK


def cmd_simulate(args, argv) -> int:
    p = _load_protocol(args.protocol)
    trace = engine.run(p, args.horizon, engine.SeedSpec(args.seed, args.replica))
    if args.format == "json":
        body = {
            "protocol_hash": protocol_hash(p),
            "seed": args.seed,
            "replica": args.replica,
            "configurations": [
                {"time": n,
                 "positions": [list(map(int, q)) for q in trace.positions[n]],
                 "states": [p.state_names[j] for j in trace.state_idx[n]]}
                for n in range(trace.horizon + 1)
            ],
        }
        payload = _dump_json(body)
        name = "trace.json"
    else:
        lines = ["time,scout," + ",".join("xy"[:p.dim][k] for k in range(p.dim)) + ",state"]
        for n in range(trace.horizon + 1):
            for i in range(p.scouts):
                coords = ",".join(str(int(v)) for v in trace.positions[n, i])
                lines.append(f"{n},{i+1},{coords},{p.state_names[trace.state_idx[n, i]]}")
        payload = "\n".join(lines) + "\n"
        name = "trace.csv"
    _write_output(args.out_dir, name, payload, argv)
    if args.out_dir is None:
        sys.stdout.write(payload)
    return EXIT_OK


def cmd_hitting(args, argv) -> int:
    p = _load_protocol(args.protocol)
    targets = _parse_targets(args.targets, p.dim)
    summaries = engine.monte_carlo_hitting_multi(
        p, targets, args.replicas, args.cap, args.seed, threads=args.threads)
    out = []
    for s in summaries:
        verdict = renewal.divergence_report(s.summary)
        body = s.to_json()
        body["divergence"] = verdict
        out.append(body)
        slug = _target_slug(s.target)
        _write_output(args.out_dir, f"survival_{slug}.csv", _curve_csv(s.curve), argv)
        _write_output(args.out_dir, f"summary_{slug}.json", _dump_json(body), argv)
    sys.stdout.write(_dump_json(out))
    return EXIT_OK


def cmd_analyze(args, argv) -> int:
    p = _load_protocol(args.protocol)
    report = analyze_protocol(p, scout=args.scout)
    body = report.to_json()
    body["protocol_hash"] = protocol_hash(p)
    if p.dim == 2:
        dom = ray_domain(p, M=args.ray_width, root_seed=args.seed, scout=args.scout)
        body["ray_domain"] = dom.to_json()
    payload = _dump_json(body)
    _write_output(args.out_dir, "analysis.json", payload, argv)
    sys.stdout.write(payload)
    return EXIT_OK


def cmd_renewal(args, argv) -> int:
    p = _load_protocol(args.protocol)
    trace = engine.run(p, args.horizon, engine.SeedSpec(args.seed, args.replica))
    mr = renewal.extract_renewal(trace)
    lines = ["k,Y,A,R"]
    for k, y, a, r in mr.csv_rows():
        lines.append(f"{k},\"{y}\",{a},{r}")
    payload = "\n".join(lines) + "\n"
    _write_output(args.out_dir, "renewal.csv", payload, argv)
    if args.out_dir is None:
        sys.stdout.write(payload)
    if args.tail:
        res = renewal.meeting_tail(p, k_range=(args.k_min, args.k_max),
                                   trials=args.trials, cap=args.cap,
                                   root_seed=args.seed)
        tail_payload = _dump_json(res.to_json())
        _write_output(args.out_dir, "meeting_tail.json", tail_payload, argv)
        sys.stdout.write(tail_payload)
    return EXIT_OK


def _build_walks(args) -> tuple[walks.LookAroundWalk, walks.LookAroundWalk | None]:
    w1 = walks.LookAroundWalk(walks.parse_law(args.law), args.s0)
    w2 = None
    if args.law2:
        w2 = walks.LookAroundWalk(walks.parse_law(args.law2), args.s02)
    return w1, w2


def cmd_lemma(args, argv) -> int:
    name = args.name
    if name not in walks.CHECKS:
        raise UsageError(f"unknown check {name!r}; choose from {sorted(walks.CHECKS)}")
    w1, w2 = _build_walks(args)
    fn = walks.CHECKS[name]
    if fn is walks.check_escape_under_drift:
        res = fn(w1, args.x, trials=args.trials, horizon=args.horizon,
                 root_seed=args.seed)
    elif fn is walks.check_zero_drift_reach_tail:
        res = fn(w1, args.x, trials=args.trials, cap=args.cap, root_seed=args.seed)
    elif fn is walks.check_exit_time_tail:
        res = fn(w1, args.rho, trials=args.trials, root_seed=args.seed)
    elif fn is walks.check_upper_deviation_bound:
        res = fn(w1, args.mu, args.n, args.y, trials=args.trials,
                 root_seed=args.seed)
    else:
        if w2 is None:
            raise UsageError("this check needs --law2")
        lo, _, hi = args.interval.partition(":")
        res = fn(w1, w2, (float(lo), float(hi)), trials=args.trials,
                 cap=args.cap, root_seed=args.seed)
    body = res.to_json()
    body["lemma"] = name
    payload = _dump_json(body)
    _write_output(args.out_dir, f"check_{name}.json", payload, argv)
    sys.stdout.write(payload)
    return EXIT_OK if res.passed else EXIT_FAIL


def cmd_oracle(args, argv) -> int:
    law = walks.parse_law(args.law)
    law2 = walks.parse_law(args.law2) if args.law2 else None
    prob = walks.exact_dp_oracle(law, int(args.s0), args.horizon, args.event,
                                 law2=law2, s02=int(args.s02))
    body = {"event": args.event, "horizon": args.horizon, "s0": int(args.s0),
            "probability": str(prob), "probability_float": float(prob)}
    payload = _dump_json(body)
    _write_output(args.out_dir, "oracle.json", payload, argv)
    sys.stdout.write(payload)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_common(sp, cap_default=None, replicas_default=1000):
    sp.add_argument("--seed", type=int, default=0, help="root seed (all randomness)")
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--cap", type=int, default=cap_default)
    sp.add_argument("--replicas", type=int, default=replicas_default)
    sp.add_argument("--out-dir", default=None)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--config", default=None,
                    help="flat key=value file supplying defaults")


def build_parser() -> _Parser:
    parser = _Parser(prog="scoutsim",
                     description="Scout-protocol simulation and analysis")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("validate", help="check a protocol file")
    sp.add_argument("file")
    sp.set_defaults(fn=cmd_validate)

    sp = sub.add_parser("simulate", help="run one seeded trace")
    sp.add_argument("--protocol", required=True)
    sp.add_argument("--horizon", type=int, default=1000)
    sp.add_argument("--replica", type=int, default=0)
    _add_common(sp)
    sp.set_defaults(fn=cmd_simulate)

    sp = sub.add_parser("hitting", help="Monte-Carlo hitting times")
    sp.add_argument("--protocol", required=True)
    sp.add_argument("--targets", required=True,
                    help="semicolon-separated points, e.g. '1;-2' or '2,1;0,3'")
    _add_common(sp, cap_default=None, replicas_default=1000)
    sp.set_defaults(fn=cmd_hitting)

    sp = sub.add_parser("analyze", help="exact class/drift/degeneracy report")
    sp.add_argument("--protocol", required=True)
    sp.add_argument("--scout", type=int, default=1)
    sp.add_argument("--ray-width", type=float, default=None)
    _add_common(sp)
    sp.set_defaults(fn=cmd_analyze)

    sp = sub.add_parser("renewal", help="meeting renewal extraction and gap tail")
    sp.add_argument("--protocol", required=True)
    sp.add_argument("--horizon", type=int, default=4096)
    sp.add_argument("--replica", type=int, default=0)
    sp.add_argument("--tail", action="store_true")
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--k-min", type=int, default=1)
    sp.add_argument("--k-max", type=int, default=64)
    _add_common(sp, cap_default=1 << 14)
    sp.set_defaults(fn=cmd_renewal)

    sp = sub.add_parser("lemma", help="statistical tail-law checks")
    sp.add_argument("name")
    sp.add_argument("--law", default="srw")
    sp.add_argument("--law2", default=None)
    sp.add_argument("--s0", type=float, default=0.0)
    sp.add_argument("--s02", type=float, default=0.0)
    sp.add_argument("--x", type=float, default=10.0)
    sp.add_argument("--rho", type=float, default=5.0)
    sp.add_argument("--mu", type=float, default=0.2)
    sp.add_argument("--n", type=int, default=100)
    sp.add_argument("--y", type=float, default=20.0)
    sp.add_argument("--interval", default="-2:2")
    sp.add_argument("--trials", type=int, default=20000)
    sp.add_argument("--horizon", type=int, default=2048)
    _add_common(sp, cap_default=1 << 13)
    sp.set_defaults(fn=cmd_lemma)

    sp = sub.add_parser("oracle", help="exact event probabilities")
    sp.add_argument("--law", required=True)
    sp.add_argument("--law2", default=None)
    sp.add_argument("--s0", type=float, default=0)
    sp.add_argument("--s02", type=float, default=0)
    sp.add_argument("--event", required=True,
                    help="hit:T | lookaround:T | reach:X | exit:R | position:Y | meeting")
    sp.add_argument("--horizon", type=int, required=True)
    _add_common(sp)
    sp.set_defaults(fn=cmd_oracle)

    return parser


def _apply_config(argv: list[str]) -> list[str]:
    """Expand --config FILE into leading --key value pairs (CLI args win)."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise UsageError("--config needs a file path")
    path = Path(argv[i + 1])
    injected: list[str] = []
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}")
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, value = line.partition("=")
        if not value:
            raise UsageError(f"bad config line {raw!r}")
        injected.extend([f"--{key.strip().replace('_', '-')}", value.strip()])
    # insert after the subcommand so subparser options resolve
    head = argv[:1]
    return head + injected + argv[1:]


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        expanded = _apply_config(argv)
        parser = build_parser()
        args = parser.parse_args(expanded)
        return args.fn(args, argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PreconditionError as exc:
        print(f"precondition violation: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ProtocolError as exc:
        print(f"protocol error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
