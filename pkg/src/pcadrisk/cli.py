"""Command-line front end: ``pcadrisk <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields, replace
from pathlib import Path
from typing import Any, Sequence

from . import evaluation as ev_mod
from .fieldgrid import KMH, GridSpec, ScenarioConfig, feature_check, risk_field
from .kinematics import NeighbourKind
from .params import MODELS, PROFILES, read_config, resolve_params, risk_function
from .pcad import FIELD_SEARCH, SearchConfig
from .scenarios import (
    MergingDesign, ObstacleDesign, TrajectoryFormatError, event_to_csv, merging_events, obstacle_events,
    read_event, read_events, replicate, synth_ratings, write_event, write_text_atomic,
)


class CliError(Exception):
    pass


def _dump(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        write_text_atomic(Path(out), text)
    else:
        sys.stdout.write(text)


def _overrides(pairs: Sequence[str] | None) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise CliError(f"--param expects name=value, got {pair!r}")
        key, value = pair.split("=", 1)
        try:
            out[key.strip()] = json.loads(value)
        except json.JSONDecodeError:
            raise CliError(f"--param {key}: value {value!r} is not a number")
    return out


def _params(args: argparse.Namespace):
    config = read_config(args.config) if args.config else None
    return resolve_params(args.model, args.profile, config, _overrides(args.param))


def _search(args: argparse.Namespace, default: SearchConfig = SearchConfig()) -> SearchConfig:
    method = getattr(args, "search", None)
    return replace(default, method=method) if method else default


def _load_events(directory: str):
    path = Path(directory)
    if not path.is_dir():
        raise CliError(f"event directory not found: {directory}")
    events = read_events(path)
    if not events:
        raise CliError(f"no event CSV files in {directory}")
    return events


# -- commands --------------------------------------------------------------

def cmd_risk(args: argparse.Namespace) -> int:
    path = Path(args.trajectory)
    if not path.exists():
        raise CliError(f"trajectory file not found: {path}")
    event = read_event(path)
    risk = risk_function(args.model, _params(args), _search(args))
    lines = event_to_csv(event).splitlines()
    out = [lines[0] + ",risk"]
    for line, snap in zip(lines[1:], event.samples):
        out.append(f"{line},{float(risk(snap))!r}")
    _emit("\n".join(out) + "\n", args.out)
    return 0


def _design(cls, values: dict[str, Any]):
    known = {f.name for f in fields(cls)}
    unknown = set(values) - known
    if unknown:
        raise CliError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in values.items()})


def cmd_simulate(args: argparse.Namespace) -> int:
    config = json.loads(Path(args.design).read_text()) if args.design else {}
    events = []
    if args.dataset in ("merging", "both"):
        events += merging_events(_design(MergingDesign, config.get("merging", {})))
    if args.dataset in ("obstacle", "both"):
        events += obstacle_events(_design(ObstacleDesign, config.get("obstacle", {})))
    if args.rate:
        if args.seed is None:
            raise CliError("--seed is required when generating synthetic ratings")
        if args.participants > 1:
            events = replicate(events, args.participants)
        rated = []
        for offset, kind in enumerate(dict.fromkeys(e.kind for e in events)):
            group = [e for e in events if e.kind is kind]
            profile = "obstacle" if kind.value == "obstacle_pop" else "merging"
            oracle = risk_function(args.rate, resolve_params(args.rate, profile), SearchConfig(method="exact"))
            rated += synth_ratings(group, oracle, args.noise_sd, args.seed + offset, scale=not args.raw)
        events = rated
    out = Path(args.out)
    for event in events:
        write_event(event, out)
    manifest = {"n_events": len(events), "ids": [e.id for e in events], "seed": args.seed}
    write_text_atomic(out / "manifest.json", _dump(manifest))
    print(f"wrote {len(events)} events to {out}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    events = _load_events(args.events)
    params = _params(args)
    report = ev_mod.evaluate(args.model, params, events, search=_search(args), scale=not args.raw,
                             timing=args.timing)
    _emit(_dump({"model": args.model, "profile": args.profile, "report": report.to_dict()}), args.out)
    return 0


def cmd_calibrate(args: argparse.Namespace) -> int:
    if args.seed is None:
        raise CliError("--seed is required for calibration restarts")
    events = _load_events(args.events)
    init = _params(args)
    free = tuple(s for s in args.free.split(",") if s) if args.free else None
    cfg = ev_mod.OptimizerConfig(free=free, restarts=args.restarts, max_evaluations=args.max_evaluations,
                                 seed=args.seed, scale=not args.raw)
    result = ev_mod.calibrate(args.model, events, init, cfg, _search(args, SearchConfig(method="exact")))
    _emit(_dump({"model": args.model, "profile": args.profile, "calibration": result.to_dict()}), args.out)
    return 0


def cmd_field(args: argparse.Namespace) -> int:
    unit = KMH if args.kmh else 1.0
    scenario = ScenarioConfig(
        v_s=args.vs * unit if args.vs is not None else ScenarioConfig.v_s,
        v_n=args.vn * unit if args.vn is not None else ScenarioConfig.v_n,
        a_s=args.a_s, a_n=args.a_n,
        neighbour_kind=NeighbourKind.STATIC_OBJECT if args.static else NeighbourKind.MOVING_VEHICLE,
    )
    if args.static:
        scenario = replace(scenario, v_n=0.0, a_n=0.0)
    grid = GridSpec(tuple(args.x_range), tuple(args.y_range), args.resolution)
    result = risk_field(args.model, _params(args), scenario, grid, _search(args, FIELD_SEARCH))
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        result.write(args.out)
    else:
        sys.stdout.write(_dump(result.header()) + result.to_csv())
    return 0


def cmd_features(args: argparse.Namespace) -> int:
    rows = {m: feature_check(m, resolve_params(m, args.profile)).as_dict() for m in MODELS}
    _emit(_dump(rows), args.out)
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    if args.repetitions < 1:
        raise CliError("--repetitions must be >= 1")
    datasets = {"merging": merging_events(), "obstacle": obstacle_events()}
    if args.events:
        datasets = {Path(args.events).name: _load_events(args.events)}
    report = {}
    for name, events in datasets.items():
        profile = "obstacle" if name == "obstacle" else args.profile
        times = {m: ev_mod.benchmark(m, resolve_params(m, profile), events, args.repetitions) for m in MODELS}
        report[name] = {"ranking": sorted(times, key=times.get)}
        if args.timings:
            report[name]["ms_per_step"] = times
    _emit(_dump(report), args.out)
    return 0


# -- parser ----------------------------------------------------------------

def _model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=MODELS, default="pcad")
    p.add_argument("--profile", choices=PROFILES, default="merging")
    p.add_argument("--config", help="parameter file keyed model.profile.param")
    p.add_argument("--param", action="append", metavar="NAME=VALUE", help="override one parameter")
    p.add_argument("--search", choices=("grid", "exact"), help="PCAD velocity-gap method")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pcadrisk", description="Perceived-risk models and experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("risk", help="risk trace for one trajectory CSV")
    p.add_argument("trajectory")
    _model_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_risk)

    p = sub.add_parser("simulate", help="generate synthetic events")
    p.add_argument("--out", required=True)
    p.add_argument("--dataset", choices=("merging", "obstacle", "both"), default="both")
    p.add_argument("--design", help="JSON with 'merging' and/or 'obstacle' design overrides")
    p.add_argument("--rate", choices=MODELS, help="attach synthetic ratings from this model")
    p.add_argument("--noise-sd", type=float, default=0.0)
    p.add_argument("--participants", type=int, default=1)
    p.add_argument("--raw", action="store_true", help="unscaled ratings")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("evaluate", help="compare a model with rated events")
    p.add_argument("--events", required=True)
    _model_args(p)
    p.add_argument("--raw", action="store_true", help="compare unscaled values")
    p.add_argument("--timing", action="store_true", help="include time per step (not reproducible)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("calibrate", help="fit model parameters to rated events")
    p.add_argument("--events", required=True)
    _model_args(p)
    p.add_argument("--free", help="comma-separated parameters to fit")
    p.add_argument("--restarts", type=int, default=50)
    p.add_argument("--max-evaluations", type=int, default=2000)
    p.add_argument("--raw", action="store_true")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("field", help="risk surface over relative positions")
    _model_args(p)
    p.add_argument("--vs", type=float, help="subject speed (m/s, or km/h with --kmh)")
    p.add_argument("--vn", type=float, help="neighbour speed (m/s, or km/h with --kmh)")
    p.add_argument("--a-s", dest="a_s", type=float, default=0.0)
    p.add_argument("--a-n", dest="a_n", type=float, default=0.0)
    p.add_argument("--kmh", action="store_true", help="speeds given in km/h")
    p.add_argument("--static", action="store_true", help="neighbour is a static object")
    p.add_argument("--x-range", type=float, nargs=2, default=(0.0, 100.0))
    p.add_argument("--y-range", type=float, nargs=2, default=(-12.0, 12.0))
    p.add_argument("--resolution", type=float, default=0.5)
    p.add_argument("--out")
    p.set_defaults(func=cmd_field)

    p = sub.add_parser("features", help="feature sensitivity matrix of all models")
    p.add_argument("--profile", choices=PROFILES, default="merging")
    p.add_argument("--out")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("bench", help="time per computation step")
    p.add_argument("--events", help="event directory (default: both synthetic datasets)")
    p.add_argument("--profile", choices=PROFILES, default="merging")
    p.add_argument("--repetitions", type=int, default=3)
    p.add_argument("--timings", action="store_true", help="include ms per step (not reproducible)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, TrajectoryFormatError, ValueError, OSError) as exc:
        print(f"pcadrisk {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
