"""Comparison models: regression (RPR), probabilistic risk field (PPDRF), driving risk field (DRF)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kinematics import SceneSnapshot, VehicleState, propagate

# -- RPR -------------------------------------------------------------------

RPR_GAP_LIMIT = 33.0
RPR_BRAKE_RANGE = (-8.0, -2.0)


@dataclass(frozen=True)
class RprParams:
    c0: float = 12.10
    c1: float = -3.70
    c2: float = -0.36


def rpr_event(gap_min: float, ydl: float, bi_max: float, gen: int) -> float:
    """Event-level regression rating on the 0-10 scale."""
    if gap_min <= 0:
        raise ValueError(f"gap_min must be positive, got {gap_min}")
    value = 9.384 - 2.473 * math.log(gap_min) - 0.038 * ydl - 0.201 * bi_max + 0.470 * gen
    return min(max(value, 0.0), 10.0)


def rpr_detects(snapshot: SceneSnapshot) -> bool:
    """Neighbour centre lies ahead within the subject's own width."""
    s, n = snapshot.subject, snapshot.neighbour
    return n.position.x > s.position.x and abs(n.position.y - s.position.y) < s.width / 2


def rpr_valid(snapshot: SceneSnapshot) -> bool:
    """Whether the snapshot lies inside the range the regression was fitted on."""
    gap = snapshot.neighbour.position.x - snapshot.subject.position.x
    a = snapshot.neighbour.acceleration.x
    return 0 < gap < RPR_GAP_LIMIT and RPR_BRAKE_RANGE[0] <= a <= RPR_BRAKE_RANGE[1]


def rpr_continuous(snapshot: SceneSnapshot, params: RprParams) -> float:
    if not rpr_detects(snapshot):
        return 0.0
    gap = snapshot.neighbour.position.x - snapshot.subject.position.x
    value = params.c0 + params.c1 * math.log(gap) + params.c2 * snapshot.neighbour.acceleration.x
    return max(value, 0.0)


# -- PPDRF -----------------------------------------------------------------

@dataclass(frozen=True)
class PpdrfParams:
    sigma_ax: float = 2.01
    sigma_ay: float = 0.02
    d_steepness: float = 0.14
    k_scale: float = 1.0
    tau_set: tuple[float, ...] = (0.5, 1.0, 2.0, 3.0)

    def __post_init__(self) -> None:
        if not (self.sigma_ax > 0 and self.sigma_ay > 0 and self.d_steepness > 0):
            raise ValueError("PPDRF sigmas and steepness must be positive")
        if not 0 <= self.k_scale <= 1:
            raise ValueError("k_scale must lie in [0, 1]")
        if not self.tau_set or min(self.tau_set) <= 0:
            raise ValueError("tau_set must be non-empty and positive")


def _gauss(x: float, mu: float, sigma: float) -> float:
    z = (x - mu) / sigma
    return math.exp(-0.5 * z * z) / (sigma * math.sqrt(2 * math.pi))


def required_acceleration(snapshot: SceneSnapshot, tau: float) -> tuple[float, float]:
    """Neighbour acceleration that puts both centres together after ``tau``.

    The subject keeps its current acceleration over the horizon.
    """
    s, n = snapshot.subject, snapshot.neighbour
    dp = s.position - n.position
    dv = n.velocity - s.velocity
    k = 0.5 * tau * tau
    return ((dp.x - dv.x * tau) / k + s.acceleration.x,
            (dp.y - dv.y * tau) / k + s.acceleration.y)


def ppdrf_collision_probability(snapshot: SceneSnapshot, params: PpdrfParams, tau: float) -> float:
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    ax, ay = required_acceleration(snapshot, tau)
    mu = snapshot.neighbour.acceleration
    p = _gauss(ax, mu.x, params.sigma_ax) * _gauss(ay, mu.y, params.sigma_ay)
    return min(p, 1.0)


def ppdrf_collision_probability_mc(snapshot: SceneSnapshot, params: PpdrfParams, tau: float,
                                   n_samples: int = 20000, seed: int = 0) -> float:
    """Monte-Carlo overlap probability at horizon ``tau``.

    Samples neighbour accelerations around the current one, propagates both
    bodies and counts rectangle overlap. Slow; meant for cross-checks.
    """
    rng = np.random.default_rng(seed)
    mu = snapshot.neighbour.acceleration
    ax = rng.normal(mu.x, params.sigma_ax, n_samples)
    ay = rng.normal(mu.y, params.sigma_ay, n_samples)
    s = propagate(snapshot.subject, tau)
    n = snapshot.neighbour
    nx = n.position.x + n.velocity.x * tau + 0.5 * ax * tau * tau
    ny = n.position.y + n.velocity.y * tau + 0.5 * ay * tau * tau
    hit = (np.abs(nx - s.position.x) <= (s.length + n.length) / 2) & (
        np.abs(ny - s.position.y) <= (s.width + n.width) / 2)
    return float(hit.mean())


def mass_ratio(subject: VehicleState, neighbour: VehicleState) -> float:
    return neighbour.mass / (subject.mass + neighbour.mass)


def ppdrf_kinetic_risk(snapshot: SceneSnapshot, params: PpdrfParams) -> float:
    if snapshot.is_static:
        return 0.0
    probs = [ppdrf_collision_probability(snapshot, params, tau) for tau in params.tau_set]
    best = int(np.argmax(probs))
    tau = params.tau_set[best]
    s, n = snapshot.subject, snapshot.neighbour
    dv = (s.velocity + s.acceleration * tau) - (n.velocity + n.acceleration * tau)
    beta = mass_ratio(s, n)
    return 0.5 * s.mass * beta ** 2 * dv.dot(dv) * probs[best]


def ppdrf_potential_risk(snapshot: SceneSnapshot, params: PpdrfParams) -> float:
    if not snapshot.is_static:
        return 0.0
    s = snapshot.subject
    distance = (s.position - snapshot.neighbour.position).norm()
    dv = s.velocity - snapshot.neighbour.velocity
    prob = max(math.exp(-distance / params.d_steepness), 0.001)
    return 0.5 * params.k_scale * s.mass * dv.dot(dv) * prob


def ppdrf_risk(snapshot: SceneSnapshot, params: PpdrfParams) -> float:
    return ppdrf_kinetic_risk(snapshot, params) + ppdrf_potential_risk(snapshot, params)


# -- DRF -------------------------------------------------------------------

@dataclass(frozen=True)
class DrfParams:
    steepness_s: float = 0.15
    preview_t_la: float = 1.20
    widen_m: float = 3.98e-8
    base_c: float = 0.45
    severity_c: float = 1.0
    cell_size: float = 0.1

    def __post_init__(self) -> None:
        if not (self.preview_t_la > 0 and self.base_c > 0 and self.severity_c > 0 and self.cell_size > 0):
            raise ValueError("DRF preview, base width, severity and cell size must be positive")
        if self.widen_m < 0 or self.steepness_s < 0:
            raise ValueError("DRF widening rate and steepness must be >= 0")


def drf_probability(x: np.ndarray, y: np.ndarray, v_sx: float, params: DrfParams) -> np.ndarray:
    """Probability field in the subject frame; zero outside ``0 < x < v_sx * t_la``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    preview = v_sx * params.preview_t_la
    height = params.steepness_s * (x - preview) ** 2
    sigma = params.widen_m * x + params.base_c
    p = height * np.exp(-(y ** 2) / (2 * sigma ** 2))
    return np.where((x > 0) & (x < preview), p, 0.0)


def drf_risk(snapshot: SceneSnapshot, params: DrfParams) -> float:
    s, n = snapshot.subject, snapshot.neighbour
    h = params.cell_size
    nx = max(1, int(round(n.length / h)))
    ny = max(1, int(round(n.width / h)))
    # cell centres of the neighbour footprint, subject-centred
    xs = n.position.x - s.position.x + (np.arange(nx) + 0.5) * (n.length / nx) - n.length / 2
    ys = n.position.y - s.position.y + (np.arange(ny) + 0.5) * (n.width / ny) - n.width / 2
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    p = drf_probability(gx, gy, s.velocity.x, params)
    cell_area = (n.length / nx) * (n.width / ny)
    return float(p.sum() * cell_area * params.severity_c)

