"""Scaling, error metrics, calibration, cross-validation and timing."""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Hashable, Sequence

import numpy as np
from scipy import optimize

from .params import CALIBRATION_BOXES, ModelParams, params_from_dict, params_to_dict, risk_function
from .pcad import SearchConfig, clear_caches
from .scenarios import Event, EventKind, risk_trace


class ConstantGroupWarning(UserWarning):
    pass


def minmax_scale(values: Sequence[float], groups: Sequence[Hashable] | None = None) -> np.ndarray:
    """Map each group linearly onto [0, 10]; constant groups map to 0 with a warning."""
    v = np.asarray(values, dtype=float)
    keys = [None] * len(v) if groups is None else list(groups)
    if len(keys) != len(v):
        raise ValueError("values and groups differ in length")
    out = np.zeros_like(v)
    for key in dict.fromkeys(keys):
        idx = np.array([k == key for k in keys])
        lo, hi = v[idx].min(), v[idx].max()
        if hi > lo:
            out[idx] = 10.0 * (v[idx] - lo) / (hi - lo)
        else:
            warnings.warn(f"group {key!r} is constant; scaled to 0", ConstantGroupWarning, stacklevel=2)
    return out


def rmse(predicted: Sequence[float], reference: Sequence[float]) -> float:
    p = np.asarray(predicted, dtype=float)
    r = np.asarray(reference, dtype=float)
    if p.shape != r.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {r.shape}")
    if p.size == 0:
        raise ValueError("rmse of empty vectors")
    return float(np.sqrt(np.mean((p - r) ** 2)))


def event_value(trace: Sequence[float], kind: EventKind) -> float:
    trace = np.asarray(trace, dtype=float)
    if trace.size == 0:
        raise ValueError("empty trace")
    if EventKind(kind) is EventKind.OBSTACLE_POP:
        return float(trace[0])
    return float(trace.max())


def peak_value(trace: Sequence[float], kind: EventKind | None = None) -> float:
    trace = np.asarray(trace, dtype=float)
    if trace.size == 0:
        raise ValueError("empty trace")
    return float(trace.max())


def adjusted_r_square(predicted: Sequence[float], reference: Sequence[float], n_predictors: int = 1) -> float:
    """R² of a least-squares line through event-type means, adjusted for ``n_predictors``."""
    x = np.asarray(predicted, dtype=float)
    y = np.asarray(reference, dtype=float)
    n = len(x)
    if x.shape != y.shape:
        raise ValueError("length mismatch")
    if n <= n_predictors + 1:
        raise ValueError(f"need more than {n_predictors + 1} event types, got {n}")
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0:
        raise ValueError("reference means are constant")
    if np.ptp(x) == 0:
        r2 = 0.0
    else:
        slope, intercept = np.polyfit(x, y, 1)
        r2 = 1.0 - float(np.sum((y - (slope * x + intercept)) ** 2)) / ss_tot
    return 1.0 - (1.0 - r2) * (n - 1) / (n - n_predictors - 1)


# -- predictions -----------------------------------------------------------

def predict_traces(events: Sequence[Event], risk: Callable) -> list[np.ndarray]:
    """Risk traces per event; replicated events sharing samples are computed once."""
    cache: dict[int, np.ndarray] = {}
    out = []
    for ev in events:
        key = id(ev.samples)
        if key not in cache:
            cache[key] = risk_trace(ev, risk)
        out.append(cache[key])
    return out


@dataclass(frozen=True)
class Predictions:
    event: np.ndarray
    peak: np.ndarray
    groups: tuple[str, ...]

    def scaled(self) -> Predictions:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConstantGroupWarning)
            return Predictions(minmax_scale(self.event, self.groups), minmax_scale(self.peak, self.groups),
                               self.groups)


def predict(events: Sequence[Event], risk: Callable) -> Predictions:
    traces = predict_traces(events, risk)
    return Predictions(
        np.array([event_value(t, ev.kind) for t, ev in zip(traces, events)]),
        np.array([peak_value(t, ev.kind) for t, ev in zip(traces, events)]),
        tuple(ev.kind.value for ev in events),
    )


def _references(events: Sequence[Event]) -> tuple[np.ndarray, np.ndarray]:
    missing = [ev.id for ev in events if not ev.reference_ratings]
    if missing:
        raise ValueError(f"events without reference ratings: {missing[:3]}")
    return (np.array([ev.reference_ratings["event_rating"] for ev in events]),
            np.array([ev.reference_ratings["peak_rating"] for ev in events]))


def detection_rate(events: Sequence[Event], risk: Callable) -> float:
    if not events:
        raise ValueError("detection rate of an empty event list is undefined")
    values = predict(events, risk).event
    return float(np.mean(values > 0))


def type_means(values: np.ndarray, events: Sequence[Event]) -> tuple[list[str], np.ndarray]:
    keys = sorted({ev.design_key for ev in events})
    idx = {k: i for i, k in enumerate(keys)}
    sums = np.zeros(len(keys))
    counts = np.zeros(len(keys))
    for v, ev in zip(values, events):
        sums[idx[ev.design_key]] += v
        counts[idx[ev.design_key]] += 1
    return keys, sums / counts


@dataclass(frozen=True)
class EvaluationReport:
    rmse_event: float
    rmse_peak: float
    adjusted_r_square: float | None
    detection_rate: float
    n_events: int
    time_per_step: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.detection_rate <= 1.0:
            raise ValueError("detection_rate outside [0, 1]")
        if self.rmse_event < 0 or self.rmse_peak < 0:
            raise ValueError("negative rmse")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def table(self, model_id: str = "") -> str:
        rows = [("RMSE_event", self.rmse_event), ("RMSE_peak", self.rmse_peak),
                ("Adjusted R^2", self.adjusted_r_square), ("R_det", self.detection_rate),
                ("Time per step (ms)", self.time_per_step), ("Events", self.n_events)]
        width = max(len(name) for name, _ in rows)
        lines = [f"{'indicator':<{width}}  {model_id}".rstrip()]
        for name, value in rows:
            text = "-" if value is None else (f"{value:.4g}" if isinstance(value, float) else str(value))
            lines.append(f"{name:<{width}}  {text}")
        return "\n".join(lines)


def evaluate_predictions(pred: Predictions, events: Sequence[Event], scale: bool = True) -> EvaluationReport:
    ref_event, ref_peak = _references(events)
    shown = pred.scaled() if scale else pred
    _, pm = type_means(shown.event, events)
    _, rm = type_means(ref_event, events)
    try:
        r2 = adjusted_r_square(pm, rm)
    except ValueError:
        r2 = None
    return EvaluationReport(
        rmse_event=rmse(shown.event, ref_event),
        rmse_peak=rmse(shown.peak, ref_peak),
        adjusted_r_square=r2,
        detection_rate=float(np.mean(pred.event > 0)),
        n_events=len(events),
    )


def evaluate(model_id: str, params: ModelParams, events: Sequence[Event], *,
             search: SearchConfig = SearchConfig(), scale: bool = True, timing: bool = False) -> EvaluationReport:
    """Compare model outputs with the events' reference ratings."""
    if not events:
        raise ValueError("no events to evaluate")
    report = evaluate_predictions(predict(events, risk_function(model_id, params, search)), events, scale)
    if timing:
        report = EvaluationReport(**{**report.to_dict(),
                                     "time_per_step": benchmark(model_id, params, events, 1, search)})
    return report


# -- calibration -----------------------------------------------------------

@dataclass(frozen=True)
class OptimizerConfig:
    free: tuple[str, ...] | None = None  # None: every parameter with a box
    restarts: int = 50
    max_evaluations: int = 2000
    fatol: float = 1e-6
    xatol: float = 1e-4
    initial_step: float = 0.1  # fraction of each box width
    seed: int = 0
    scale: bool = True


@dataclass
class CalibrationResult:
    params: ModelParams
    objective: float
    iterations: int
    converged: bool
    evaluations: int = 0
    history: list[float] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {"params": params_to_dict(self.params), "objective": self.objective,
                "iterations": self.iterations, "converged": self.converged, "evaluations": self.evaluations}


def objective(model_id: str, params: ModelParams, events: Sequence[Event], *,
              search: SearchConfig = SearchConfig(), scale: bool = True) -> float:
    """RMSE_event + RMSE_peak against the events' reference ratings."""
    report = evaluate_predictions(predict(events, risk_function(model_id, params, search)), events, scale)
    return report.rmse_event + report.rmse_peak


def calibrate(model_id: str, events: Sequence[Event], init: ModelParams,
              cfg: OptimizerConfig = OptimizerConfig(), search: SearchConfig = SearchConfig(method="exact"),
              ) -> CalibrationResult:
    """Box-constrained Nelder-Mead with seeded random restarts.

    The first restart starts from ``init``; later ones from uniform draws in
    the box. Points outside the box are clipped and penalised.
    """
    boxes = CALIBRATION_BOXES[model_id]
    free = tuple(cfg.free) if cfg.free is not None else tuple(boxes)
    unknown = set(free) - set(boxes)
    if unknown:
        raise ValueError(f"no calibration box for {sorted(unknown)}")
    _references(events)
    lo = np.array([boxes[k][0] for k in free])
    hi = np.array([boxes[k][1] for k in free])
    width = hi - lo
    base = params_to_dict(init)

    def to_params(u: np.ndarray) -> ModelParams:
        x = lo + width * np.clip(u, 0.0, 1.0)
        return params_from_dict(model_id, {k: float(v) for k, v in zip(free, x)}, init)

    best = {"f": math.inf, "u": None}
    history: list[float] = []
    n_eval = 0

    def f(u: np.ndarray) -> float:
        nonlocal n_eval
        n_eval += 1
        outside = float(np.sum(np.clip(u - 1.0, 0, None) + np.clip(-u, 0, None)))
        try:
            value = objective(model_id, to_params(u), events, search=search, scale=cfg.scale)
        except ValueError:
            return 1e6
        value += 100.0 * outside
        if value < best["f"]:
            best["f"], best["u"] = value, np.clip(u, 0.0, 1.0)
        return value

    rng = np.random.default_rng(cfg.seed)
    u0 = np.clip((np.array([base[k] for k in free]) - lo) / width, 0.0, 1.0)
    iterations = 0
    converged = False
    for restart in range(max(cfg.restarts, 1)):
        start = u0 if restart == 0 else rng.uniform(0.0, 1.0, len(free))
        simplex = [start]
        for i in range(len(free)):
            p = start.copy()
            p[i] += cfg.initial_step if p[i] + cfg.initial_step <= 1.0 else -cfg.initial_step
            simplex.append(p)
        res = optimize.minimize(
            f, start, method="Nelder-Mead",
            callback=lambda _u: history.append(best["f"]),
            options=dict(maxfev=cfg.max_evaluations, fatol=cfg.fatol, xatol=cfg.xatol,
                         initial_simplex=np.array(simplex)),
        )
        iterations += int(res.nit)
        converged = converged or bool(res.success)
        if best["f"] < cfg.fatol:
            break
    params = to_params(best["u"]) if best["u"] is not None else init
    return CalibrationResult(params, float(best["f"]), iterations, converged and math.isfinite(best["f"]),
                             n_eval, history)


def cross_validate(model_id: str, train_events: Sequence[Event], test_events: Sequence[Event],
                   init: ModelParams, cfg: OptimizerConfig = OptimizerConfig(),
                   search: SearchConfig = SearchConfig(method="exact"),
                   ) -> tuple[CalibrationResult, EvaluationReport]:
    result = calibrate(model_id, train_events, init, cfg, search)
    report = evaluate(model_id, result.params, test_events, search=search, scale=cfg.scale)
    return result, report


# -- timing ----------------------------------------------------------------

def benchmark(model_id: str, params: ModelParams, events: Sequence[Event], repetitions: int = 3,
              search: SearchConfig = SearchConfig()) -> float:
    """Mean wall-clock milliseconds per computation step."""
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    if not events:
        raise ValueError("no events to benchmark")
    risk = risk_function(model_id, params, search)
    samples = [s for ev in events for s in ev.samples]
    elapsed = 0.0
    for _ in range(repetitions):
        clear_caches()
        start = time.perf_counter()
        for s in samples:
            risk(s)
        elapsed += time.perf_counter() - start
    return 1e3 * elapsed / (repetitions * len(samples))
