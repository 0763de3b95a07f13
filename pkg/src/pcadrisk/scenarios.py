"""Synthetic merging and pop-up obstacle events, synthetic ratings, and event file I/O."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .kinematics import (
    DEFAULT_LENGTH, DEFAULT_MASS, DEFAULT_WIDTH, ZERO, NeighbourKind, SceneSnapshot, Vec2, VehicleState,
    bodies_overlap,
)

CSV_COLUMNS = ("t", "xs", "ys", "vxs", "vys", "axs", "ays", "xn", "yn", "vxn", "vyn", "axn", "ayn", "kind")

MERGING_V0 = 27.78
OBSTACLE_V0 = 25.0
BRAKE_DESIGN_RANGE = (-8.0, -2.0)
# subject braking lag behind the merging vehicle
REACTION_TIME = 0.25


class EventKind(str, enum.Enum):
    MERGING_BRAKE = "merging_brake"
    OBSTACLE_POP = "obstacle_pop"


@dataclass(frozen=True)
class Event:
    id: str
    kind: EventKind
    design: dict[str, Any]
    samples: tuple[SceneSnapshot, ...]
    reference_ratings: dict[str, float] | None = None

    def __post_init__(self) -> None:
        if not self.samples:
            raise ValueError(f"event {self.id} has no samples")
        times = np.array([s.time for s in self.samples])
        if len(times) > 1:
            steps = np.diff(times)
            if np.any(steps <= 0):
                raise ValueError(f"event {self.id}: sample times must strictly increase")
            if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
                raise ValueError(f"event {self.id}: sample spacing must be constant")

    @property
    def dt(self) -> float:
        return self.samples[1].time - self.samples[0].time if len(self.samples) > 1 else 0.0

    @property
    def design_key(self) -> str:
        """Identifies the event type; repetitions of one design share it."""
        if self.kind is EventKind.MERGING_BRAKE:
            return (f"gap={self.design['merge_gap']:g},brake={self.design['brake_intensity']:g},"
                    f"onset={self.design.get('brake_onset', 0.0):g},duration={self.design.get('duration', 0.0):g}")
        x, y = self.design["obstacle_pos"]
        return f"obstacle=({x:g},{y:g})"


class TrajectoryFormatError(ValueError):
    pass


# -- generators ------------------------------------------------------------

def _stop_sampling(subject: VehicleState, neighbour: VehicleState, min_clearance: float) -> bool:
    # event ends before the bodies come within min_clearance of touching
    dx = abs(neighbour.position.x - subject.position.x) - (subject.length + neighbour.length) / 2
    dy = abs(neighbour.position.y - subject.position.y) - (subject.width + neighbour.width) / 2
    return bodies_overlap(subject, neighbour) or (dy < 0 and dx < min_clearance)


def gen_merging_event(merge_gap: float, brake_intensity: float, v0: float = MERGING_V0, dt: float = 0.05,
                      duration: float = 15.0, *, lane_offset: float = 3.5, lateral_speed: float = 1.0,
                      lead_in: float = 1.0, brake_delay: float | None = None,
                      reaction_time: float | None = REACTION_TIME, min_clearance: float = 1.0,
                      event_id: str | None = None, allow_out_of_design: bool = False) -> Event:
    """Cut-in at ``merge_gap`` metres of clearance followed by hard braking.

    The neighbour starts level with the gap in the adjacent lane, drifts
    across at ``lateral_speed`` and brakes once centred in the subject lane,
    or ``brake_delay`` seconds after the lane change starts when given.
    The subject brakes at the same intensity ``reaction_time`` seconds after
    the neighbour does (``None`` holds ``v0`` throughout). Sampling stops
    when the clearance falls below ``min_clearance``.
    """
    if merge_gap <= 0:
        raise ValueError(f"merge_gap must be positive, got {merge_gap}")
    if brake_intensity >= 0:
        raise ValueError(f"brake_intensity must be negative, got {brake_intensity}")
    lo, hi = BRAKE_DESIGN_RANGE
    if not allow_out_of_design and not lo <= brake_intensity <= hi:
        raise ValueError(f"brake_intensity {brake_intensity} outside design range {BRAKE_DESIGN_RANGE}")
    if dt <= 0 or duration <= 0 or v0 <= 0:
        raise ValueError("dt, duration and v0 must be positive")

    x0 = merge_gap + DEFAULT_LENGTH
    t_lane = lead_in + lane_offset / lateral_speed
    if brake_delay is not None and brake_delay < 0:
        raise ValueError(f"brake_delay must be >= 0, got {brake_delay}")
    t_brake = t_lane if brake_delay is None else lead_in + brake_delay
    if reaction_time is not None and reaction_time < 0:
        raise ValueError(f"reaction_time must be >= 0, got {reaction_time}")
    t_stop = v0 / -brake_intensity

    def braking(t: float, onset: float) -> tuple[float, float, float]:
        # displacement, speed and acceleration of a vehicle braking to rest
        tb = t - onset
        if tb <= 0:
            return v0 * t, v0, 0.0
        if tb < t_stop:
            return v0 * t + 0.5 * brake_intensity * tb * tb, v0 + brake_intensity * tb, brake_intensity
        return v0 * onset + v0 * t_stop / 2, 0.0, 0.0

    def subject_at(t: float) -> VehicleState:
        if reaction_time is None:
            return VehicleState(Vec2(v0 * t, 0.0), Vec2(v0, 0.0))
        x, vx, ax = braking(t, t_brake + reaction_time)
        return VehicleState(Vec2(x, 0.0), Vec2(vx, 0.0), Vec2(ax, 0.0))

    def neighbour_at(t: float) -> VehicleState:
        if t < lead_in:
            y, vy = lane_offset, 0.0
        elif t < t_lane:
            y, vy = lane_offset - lateral_speed * (t - lead_in), -lateral_speed
        else:
            y, vy = 0.0, 0.0
        x, vx, ax = braking(t, t_brake)
        return VehicleState(Vec2(x0 + x, y), Vec2(vx, vy), Vec2(ax, 0.0))

    samples = []
    for k in range(int(round(duration / dt)) + 1):
        t = k * dt
        subject = subject_at(t)
        neighbour = neighbour_at(t)
        if _stop_sampling(subject, neighbour, min_clearance):
            break
        samples.append(SceneSnapshot(subject, neighbour, NeighbourKind.MOVING_VEHICLE, t))
    design = dict(merge_gap=merge_gap, brake_intensity=brake_intensity, v0=v0, dt=dt, duration=duration,
                  lane_offset=lane_offset, lateral_speed=lateral_speed, lead_in=lead_in,
                  brake_onset=t_brake, reaction_time=reaction_time)
    eid = event_id or f"merging_g{merge_gap:g}_a{brake_intensity:g}"
    return Event(eid, EventKind.MERGING_BRAKE, design, tuple(samples))


def gen_obstacle_event(obstacle_pos: tuple[float, float], v0: float = OBSTACLE_V0, dt: float = 0.05,
                       duration: float = 1.0, *, min_clearance: float = 1.0,
                       obstacle_size: tuple[float, float] = (DEFAULT_LENGTH, DEFAULT_WIDTH),
                       event_id: str | None = None) -> Event:
    """Static obstacle appearing at ``obstacle_pos`` (centre, relative to the subject centre) at t = 0."""
    ox, oy = obstacle_pos
    obstacle = VehicleState(Vec2(ox, oy), ZERO, ZERO, obstacle_size[0], obstacle_size[1], DEFAULT_MASS)
    start = VehicleState(Vec2(0.0, 0.0), Vec2(v0, 0.0))
    if ox <= 0 or bodies_overlap(start, obstacle):
        raise ValueError(f"obstacle at {obstacle_pos} is not ahead of the subject")
    samples = []
    for k in range(int(round(duration / dt)) + 1):
        t = k * dt
        subject = VehicleState(Vec2(v0 * t, 0.0), Vec2(v0, 0.0))
        if k > 0 and _stop_sampling(subject, obstacle, min_clearance):
            break
        samples.append(SceneSnapshot(subject, obstacle, NeighbourKind.STATIC_OBJECT, t))
    design = dict(obstacle_pos=[ox, oy], v0=v0, dt=dt, duration=duration,
                  obstacle_size=list(obstacle_size))
    eid = event_id or f"obstacle_x{ox:g}_y{oy:g}"
    return Event(eid, EventKind.OBSTACLE_POP, design, tuple(samples))


@dataclass(frozen=True)
class MergingDesign:
    gaps: tuple[float, ...] = (9.0, 17.0, 25.0)
    intensities: tuple[float, ...] = (-2.0, -5.0, -8.0)
    repetitions: int = 2
    brake_delays: tuple[float | None, ...] = (None,)
    v0: float = MERGING_V0
    dt: float = 0.05
    duration: float = 15.0


@dataclass(frozen=True)
class ObstacleDesign:
    # 7 distances x 11 lateral offsets = 77 positions, an approximation of
    # the original layout; every obstacle overlaps the straight-ahead path
    distances: tuple[float, ...] = (15.0, 25.0, 35.0, 45.0, 55.0, 65.0, 75.0)
    offsets: tuple[float, ...] = tuple(float(v) for v in np.round(np.linspace(-1.8, 1.8, 11), 2))
    v0: float = OBSTACLE_V0
    dt: float = 0.05
    duration: float = 1.0


def merging_events(design: MergingDesign = MergingDesign()) -> list[Event]:
    events = []
    for rep in range(design.repetitions):
        for delay in design.brake_delays:
            tag = "" if delay is None else f"_d{delay:g}"
            for gap in design.gaps:
                for a in design.intensities:
                    ev = gen_merging_event(gap, a, design.v0, design.dt, design.duration, brake_delay=delay,
                                           event_id=f"merging_g{gap:g}_a{a:g}{tag}_r{rep}")
                    events.append(replace(ev, design={**ev.design, "repetition": rep}))
    return events


def obstacle_events(design: ObstacleDesign = ObstacleDesign()) -> list[Event]:
    return [
        gen_obstacle_event((x, y), design.v0, design.dt, design.duration, event_id=f"obstacle_x{x:g}_y{y:g}")
        for x in design.distances
        for y in design.offsets
    ]


# -- traces and ratings ----------------------------------------------------

def risk_trace(event: Event, risk: Callable[[SceneSnapshot], float]) -> np.ndarray:
    return np.array([risk(s) for s in event.samples], dtype=float)


def replicate(events: Sequence[Event], n: int) -> list[Event]:
    """Repeat each event for ``n`` synthetic participants (ids suffixed ``_p<k>``)."""
    return [
        replace(ev, id=f"{ev.id}_p{k}", design={**ev.design, "participant": k})
        for k in range(n)
        for ev in events
    ]


def synth_ratings(events: Sequence[Event], oracle: Callable[[SceneSnapshot], float], noise_sd: float,
                  seed: int, *, scale: bool = True) -> list[Event]:
    """Attach oracle-derived reference ratings with Gaussian noise.

    ``oracle`` maps a snapshot to risk. Event and peak values follow the
    usual reductions; with ``scale`` they are min-max scaled to 0-10 per
    event kind before noise, and the noisy result is clipped to [0, 10].
    Without ``scale`` the raw values get noise and are clipped at 0.
    """
    from .evaluation import event_value, minmax_scale, peak_value, predict_traces

    rng = np.random.default_rng(seed)
    traces = predict_traces(events, oracle)
    ev_vals = np.array([event_value(tr, ev.kind) for tr, ev in zip(traces, events)])
    pk_vals = np.array([peak_value(tr, ev.kind) for tr, ev in zip(traces, events)])
    if scale:
        groups = [ev.kind.value for ev in events]
        ev_vals = minmax_scale(ev_vals, groups)
        pk_vals = minmax_scale(pk_vals, groups)
    noise = rng.normal(0.0, 1.0, size=(len(events), 2)) * noise_sd
    hi = 10.0 if scale else np.inf
    ev_noisy = np.clip(ev_vals + noise[:, 0], 0.0, hi)
    pk_noisy = np.clip(pk_vals + noise[:, 1], 0.0, hi)
    return [
        replace(ev, reference_ratings={"event_rating": float(e), "peak_rating": float(p)})
        for ev, e, p in zip(events, ev_noisy, pk_noisy)
    ]


# -- file I/O --------------------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


def event_to_csv(event: Event) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for s in event.samples:
        a, b = s.subject, s.neighbour
        writer.writerow([
            _fmt(s.time),
            _fmt(a.position.x), _fmt(a.position.y), _fmt(a.velocity.x), _fmt(a.velocity.y),
            _fmt(a.acceleration.x), _fmt(a.acceleration.y),
            _fmt(b.position.x), _fmt(b.position.y), _fmt(b.velocity.x), _fmt(b.velocity.y),
            _fmt(b.acceleration.x), _fmt(b.acceleration.y),
            s.neighbour_kind.value,
        ])
    return buf.getvalue()


def event_sidecar(event: Event) -> dict[str, Any]:
    s0 = event.samples[0]
    dims = {
        role: {"length": v.length, "width": v.width, "mass": v.mass}
        for role, v in (("subject", s0.subject), ("neighbour", s0.neighbour))
    }
    return {
        "id": event.id,
        "kind": event.kind.value,
        "design": event.design,
        "dims": dims,
        "reference_ratings": event.reference_ratings,
    }


def write_text_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    tmp.replace(path)


def write_event(event: Event, directory: str | Path) -> Path:
    """Write ``<id>.csv`` and ``<id>.json``; returns the CSV path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    csv_path = directory / f"{event.id}.csv"
    write_text_atomic(csv_path, event_to_csv(event))
    write_text_atomic(directory / f"{event.id}.json", json.dumps(event_sidecar(event), indent=2, sort_keys=True) + "\n")
    return csv_path


def _parse_rows(text: str, source: str) -> list[dict[str, str]]:
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise TrajectoryFormatError(f"{source}:1: empty trajectory file")
    header = [h.strip() for h in lines[0].split(",")]
    if tuple(header) != CSV_COLUMNS:
        raise TrajectoryFormatError(f"{source}:1: expected header {','.join(CSV_COLUMNS)}")
    rows = []
    for lineno, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != len(CSV_COLUMNS):
            raise TrajectoryFormatError(f"{source}:{lineno}: expected {len(CSV_COLUMNS)} fields, got {len(cells)}")
        row = dict(zip(CSV_COLUMNS, cells))
        for col in CSV_COLUMNS[:-1]:
            try:
                value = float(row[col])
            except ValueError:
                raise TrajectoryFormatError(f"{source}:{lineno}: column {col!r} is not a number: {row[col]!r}")
            if not math.isfinite(value):
                raise TrajectoryFormatError(f"{source}:{lineno}: column {col!r} is not finite")
        try:
            NeighbourKind(row["kind"].strip())
        except ValueError:
            raise TrajectoryFormatError(f"{source}:{lineno}: unknown kind {row['kind']!r}")
        rows.append(row)
    if not rows:
        raise TrajectoryFormatError(f"{source}: no samples")
    return rows


def read_event(csv_path: str | Path, sidecar: str | Path | None = None) -> Event:
    """Load an event CSV and, when present, its JSON sidecar (same stem)."""
    csv_path = Path(csv_path)
    rows = _parse_rows(csv_path.read_text(), str(csv_path))
    side_path = Path(sidecar) if sidecar else csv_path.with_suffix(".json")
    meta: dict[str, Any] = json.loads(side_path.read_text()) if side_path.exists() else {}
    dims = meta.get("dims", {})
    sd = dims.get("subject", {})
    nd = dims.get("neighbour", {})

    samples = []
    for lineno, row in enumerate(rows, 2):
        f = {k: float(v) for k, v in row.items() if k != "kind"}
        kind = NeighbourKind(row["kind"].strip())
        subject = VehicleState(Vec2(f["xs"], f["ys"]), Vec2(f["vxs"], f["vys"]), Vec2(f["axs"], f["ays"]),
                               sd.get("length", DEFAULT_LENGTH), sd.get("width", DEFAULT_WIDTH),
                               sd.get("mass", DEFAULT_MASS))
        neighbour = VehicleState(Vec2(f["xn"], f["yn"]), Vec2(f["vxn"], f["vyn"]), Vec2(f["axn"], f["ayn"]),
                                 nd.get("length", DEFAULT_LENGTH), nd.get("width", DEFAULT_WIDTH),
                                 nd.get("mass", DEFAULT_MASS))
        try:
            samples.append(SceneSnapshot(subject, neighbour, kind, f["t"]))
        except ValueError as exc:
            raise TrajectoryFormatError(f"{csv_path}:{lineno}: {exc}")
    kind_name = meta.get("kind")
    if kind_name is None:
        kind_name = (EventKind.OBSTACLE_POP if samples[0].is_static else EventKind.MERGING_BRAKE).value
    try:
        return Event(meta.get("id", csv_path.stem), EventKind(kind_name), meta.get("design", {}),
                     tuple(samples), meta.get("reference_ratings"))
    except ValueError as exc:
        raise TrajectoryFormatError(f"{csv_path}: {exc}")


def read_events(directory: str | Path) -> list[Event]:
    return [read_event(p) for p in sorted(Path(directory).glob("*.csv"))]


def iter_design_keys(events: Iterable[Event]) -> list[str]:
    return sorted({ev.design_key for ev in events})
