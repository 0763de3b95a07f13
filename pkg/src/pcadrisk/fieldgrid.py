"""Risk surfaces over relative-position grids and model feature probes.

Grid coordinates give the neighbour's rear-centre relative to the subject's
front-centre; the subject front sits at the origin, heading along +X.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np

from .kinematics import (
    DEFAULT_LENGTH, DEFAULT_WIDTH, ZERO, NeighbourKind, SceneSnapshot, Vec2, VehicleState, bodies_overlap,
)
from .params import ModelParams, risk_function
from .pcad import FIELD_SEARCH, SearchConfig

KMH = 1 / 3.6


@dataclass(frozen=True)
class ScenarioConfig:
    v_s: float = 100 * KMH
    v_n: float = 50 * KMH
    a_s: float = 0.0
    a_n: float = 0.0
    neighbour_kind: NeighbourKind = NeighbourKind.MOVING_VEHICLE
    subject_size: tuple[float, float] = (DEFAULT_LENGTH, DEFAULT_WIDTH)
    neighbour_size: tuple[float, float] = (DEFAULT_LENGTH, DEFAULT_WIDTH)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["neighbour_kind"] = self.neighbour_kind.value
        d["subject_size"] = list(self.subject_size)
        d["neighbour_size"] = list(self.neighbour_size)
        return d


@dataclass(frozen=True)
class GridSpec:
    x_range: tuple[float, float] = (0.0, 100.0)
    y_range: tuple[float, float] = (-12.0, 12.0)
    resolution: float = 0.5

    def __post_init__(self) -> None:
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")
        if self.x_range[1] < self.x_range[0] or self.y_range[1] < self.y_range[0]:
            raise ValueError("ranges must be (low, high)")

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        def axis(lo: float, hi: float) -> np.ndarray:
            n = int(np.floor((hi - lo) / self.resolution + 1e-9)) + 1
            return lo + self.resolution * np.arange(n)
        return axis(*self.x_range), axis(*self.y_range)


@dataclass(frozen=True)
class RiskFieldGrid:
    x: np.ndarray
    y: np.ndarray
    values: np.ndarray  # shape (len(y), len(x)), row-major by y
    resolution: float
    model_id: str
    scenario_config: ScenarioConfig
    masked: np.ndarray = field(repr=False, default=None)

    def __post_init__(self) -> None:
        if self.values.shape != (len(self.y), len(self.x)):
            raise ValueError("grid values do not match the axes")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid values must be finite")

    def at(self, x: float, y: float) -> float:
        i = int(np.argmin(np.abs(self.y - y)))
        j = int(np.argmin(np.abs(self.x - x)))
        return float(self.values[i, j])

    def header(self) -> dict[str, Any]:
        return {
            "model_id": self.model_id,
            "x_range": [float(self.x[0]), float(self.x[-1])],
            "y_range": [float(self.y[0]), float(self.y[-1])],
            "resolution": self.resolution,
            "shape": list(self.values.shape),
            "scenario_config": self.scenario_config.to_dict(),
        }

    def to_csv(self) -> str:
        lines = ["x,y,value"]
        for i, yv in enumerate(self.y):
            for j, xv in enumerate(self.x):
                lines.append(f"{float(xv)!r},{float(yv)!r},{float(self.values[i, j])!r}")
        return "\n".join(lines) + "\n"

    def write(self, csv_path: str | Path) -> tuple[Path, Path]:
        from .scenarios import write_text_atomic

        csv_path = Path(csv_path)
        json_path = csv_path.with_suffix(".json")
        write_text_atomic(csv_path, self.to_csv())
        write_text_atomic(json_path, json.dumps(self.header(), indent=2, sort_keys=True) + "\n")
        return csv_path, json_path


def place(scenario: ScenarioConfig, x: float, y: float) -> SceneSnapshot:
    """Snapshot with the neighbour rear-centre at (x, y) from the subject front."""
    ls, ws = scenario.subject_size
    ln, wn = scenario.neighbour_size
    subject = VehicleState(Vec2(-ls / 2, 0.0), Vec2(scenario.v_s, 0.0), Vec2(scenario.a_s, 0.0), ls, ws)
    pos = Vec2(x + ln / 2, y)
    if scenario.neighbour_kind is NeighbourKind.STATIC_OBJECT:
        neighbour = VehicleState(pos, ZERO, ZERO, ln, wn)
    else:
        neighbour = VehicleState(pos, Vec2(scenario.v_n, 0.0), Vec2(scenario.a_n, 0.0), ln, wn)
    return SceneSnapshot(subject, neighbour, scenario.neighbour_kind)


def risk_field(model_id: str, params: ModelParams, scenario: ScenarioConfig = ScenarioConfig(),
               grid: GridSpec = GridSpec(), search: SearchConfig = FIELD_SEARCH) -> RiskFieldGrid:
    """Evaluate a model with the neighbour at every grid cell.

    Cells where the bodies overlap are set to the grid maximum.
    """
    risk = risk_function(model_id, params, search)
    xs, ys = grid.axes()
    values = np.zeros((len(ys), len(xs)))
    masked = np.zeros_like(values, dtype=bool)
    for i, y in enumerate(ys):
        for j, x in enumerate(xs):
            snap = place(scenario, float(x), float(y))
            if bodies_overlap(snap.subject, snap.neighbour):
                masked[i, j] = True
            else:
                values[i, j] = risk(snap)
    if masked.any():
        values[masked] = values[~masked].max() if (~masked).any() else 0.0
    return RiskFieldGrid(xs, ys, values, grid.resolution, model_id, scenario, masked)


# -- feature probes --------------------------------------------------------

FEATURES = ("relative_velocity", "neighbour_acceleration", "subject_velocity", "lateral_position")

# probe positions ahead of the subject, inside the lane
PROBE_GRID = GridSpec(x_range=(5.0, 40.0), y_range=(0.0, 0.0), resolution=5.0)
PROBE_LATERAL = (0.0, 0.4, 0.8)


@dataclass(frozen=True)
class FeatureRow:
    model_id: str
    relative_velocity: bool
    neighbour_acceleration: bool
    subject_velocity: bool
    lateral_position: bool

    def as_dict(self) -> dict[str, bool]:
        return {name: getattr(self, name) for name in FEATURES}


def _varies(grids: list[RiskFieldGrid]) -> bool:
    # insensitive means bitwise-identical grids
    first = grids[0].values
    return any(not np.array_equal(first, g.values) for g in grids[1:])


def feature_probes(model_id: str, params: ModelParams,
                   search: SearchConfig = FIELD_SEARCH) -> dict[str, list[RiskFieldGrid]]:
    """Grids for each probed feature; a feature is used when its grids differ."""
    base = ScenarioConfig()

    def grids(configs: list[ScenarioConfig], spec: GridSpec = PROBE_GRID) -> list[RiskFieldGrid]:
        return [risk_field(model_id, params, c, spec, search) for c in configs]

    common = [replace(base, v_s=v * KMH, v_n=v * KMH) for v in (20.0, 60.0, 100.0)]
    static = [replace(base, v_s=v * KMH, v_n=0.0, neighbour_kind=NeighbourKind.STATIC_OBJECT)
              for v in (20.0, 60.0, 100.0)]
    lateral = [risk_field(model_id, params, base, replace(PROBE_GRID, y_range=(y, y)), search)
               for y in PROBE_LATERAL]
    # compare lateral rows by value only
    lateral = [replace(g, y=lateral[0].y) for g in lateral]
    return {
        "relative_velocity": grids([replace(base, v_n=v * KMH) for v in (50.0, 70.0, 90.0)]),
        "neighbour_acceleration": grids([replace(base, a_n=a) for a in (0.0, -4.0, -8.0)]),
        "subject_velocity_common": grids(common),
        "subject_velocity_static": grids(static),
        "lateral_position": lateral,
    }


def feature_check(model_id: str, params: ModelParams, search: SearchConfig = FIELD_SEARCH) -> FeatureRow:
    probes = feature_probes(model_id, params, search)
    return FeatureRow(
        model_id=model_id,
        relative_velocity=_varies(probes["relative_velocity"]),
        neighbour_acceleration=_varies(probes["neighbour_acceleration"]),
        subject_velocity=_varies(probes["subject_velocity_common"]) or _varies(probes["subject_velocity_static"]),
        lateral_position=_varies(probes["lateral_position"]),
    )
