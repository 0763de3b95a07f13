"""Potential collision avoidance difficulty (PCAD) model.

Risk is the smallest 2D change of the (perceived) subject velocity that
stops the neighbour from looming, scaled by a power of subject speed.
Perceived velocities add an acceleration anticipation term and an
"imaginary" velocity along the line joining the two vehicles, whose length
is the expected speed of a truncated zero-mean Gaussian along that ray.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .kinematics import SceneSnapshot, Vec2, ZERO, bodies_overlap
from .looming import DegenerateGeometry, looming_mask, pair_geometry


class Role(str, enum.Enum):
    SUBJECT = "subject"
    NEIGHBOUR = "neighbour"


# imaginary velocity points toward the other vehicle: neighbour along
# (p_s - p_n), subject against it
DIRECTION_SIGN = {Role.NEIGHBOUR: 1.0, Role.SUBJECT: -1.0}


@dataclass(frozen=True)
class Bounds:
    """Truncation box of the imaginary velocity distribution (m/s)."""

    forward: float = 30.0
    backward: float = -10.0
    left: float = 6.0
    right: float = -6.0

    def __post_init__(self) -> None:
        if not (self.backward < 0 < self.forward and self.right < 0 < self.left):
            raise ValueError(f"bounds must straddle zero: {self}")

    def exit_length(self, direction: Vec2) -> float:
        """Distance along a unit ray from the origin to the edge of the box."""
        lengths = []
        if direction.x > 0:
            lengths.append(self.forward / direction.x)
        elif direction.x < 0:
            lengths.append(self.backward / direction.x)
        if direction.y > 0:
            lengths.append(self.left / direction.y)
        elif direction.y < 0:
            lengths.append(self.right / direction.y)
        return min(lengths)


@dataclass(frozen=True)
class PcadParams:
    sigma_n_x: float = 0.0
    sigma_n_y: float = 0.0
    sigma_s_x: float = 0.0
    sigma_s_y: float = 0.0
    t_a_s: float = 0.0
    t_a_n: float = 0.0
    alpha: float = 0.0
    v_ref: float = 27.78
    bounds: Bounds = Bounds()

    def __post_init__(self) -> None:
        for name in ("sigma_n_x", "sigma_n_y", "sigma_s_x", "sigma_s_y", "t_a_s", "t_a_n", "alpha"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {value}")
        if not self.v_ref > 0:
            raise ValueError(f"v_ref must be positive, got {self.v_ref}")

    def sigmas(self, role: Role) -> tuple[float, float]:
        if role is Role.SUBJECT:
            return self.sigma_s_x, self.sigma_s_y
        return self.sigma_n_x, self.sigma_n_y

    def accumulation_time(self, role: Role) -> float:
        return self.t_a_s if role is Role.SUBJECT else self.t_a_n


@dataclass(frozen=True)
class SearchConfig:
    """Velocity-gap grid search settings.

    ``v_x_range``/``v_y_range`` are offsets (m/s) from the perceived subject
    velocity. ``None`` sizes the window from the relative speed, which always
    contains an escape: matching the neighbour's velocity is never looming.
    ``method="exact"`` swaps the grid for the closed-form cone projection.
    """

    v_x_range: tuple[float, float] | None = None
    v_y_range: tuple[float, float] | None = None
    coarse_step: float = 0.25
    fine_step: float = 0.02
    method: str = "grid"
    eps: float = 0.0

    def __post_init__(self) -> None:
        if not (0 < self.fine_step <= self.coarse_step):
            raise ValueError("need 0 < fine_step <= coarse_step")
        for rng in (self.v_x_range, self.v_y_range):
            if rng is not None and not rng[0] < rng[1]:
                raise ValueError(f"degenerate search range {rng}")
        if self.method not in ("grid", "exact"):
            raise ValueError(f"unknown method {self.method!r}")


FIELD_SEARCH = SearchConfig(coarse_step=0.5, fine_step=0.05)


@dataclass(frozen=True)
class GapResult:
    gap_magnitude: float
    boundary_velocity: Vec2
    in_safe_set: bool


class NoEscapeVelocity(RuntimeError):
    """No safe subject velocity exists inside the search window."""


# -- perceived velocity ----------------------------------------------------

def acceleration_velocity(a: Vec2, t_a: float) -> Vec2:
    if t_a < 0:
        raise ValueError(f"accumulation time must be >= 0, got {t_a}")
    return a * t_a


def imaginary_speed_expectation(direction: Vec2, sigma_x: float, sigma_y: float,
                                bounds: Bounds = Bounds()) -> float:
    """Expected length of the truncated-Gaussian imaginary velocity along a ray.

    The integrand is the product of the two truncated zero-mean densities
    evaluated at ``l * direction``; normalising by its integral over the ray
    gives the ray-conditional mean of ``l``.
    """
    if abs(direction.norm() - 1.0) > 1e-9:
        raise ValueError(f"direction must be a unit vector, got {direction}")
    return _ray_mean(direction.x, direction.y, sigma_x, sigma_y, bounds)


@functools.lru_cache(maxsize=65536)
def _ray_mean(ux: float, uy: float, sigma_x: float, sigma_y: float, bounds: Bounds) -> float:
    direction = Vec2(ux, uy)
    # per-axis precision along the ray; a zero sigma on an axis the ray
    # moves along pins the distribution at the origin
    precision = 0.0
    for u, sigma in ((direction.x, sigma_x), (direction.y, sigma_y)):
        if u == 0.0:
            continue
        if sigma == 0.0:
            return 0.0
        precision += (u / sigma) ** 2
    if precision == 0.0:
        return 0.0
    scale = 1.0 / math.sqrt(precision)
    upper = min(bounds.exit_length(direction), 40.0 * scale)

    def density(l: float) -> float:
        return math.exp(-0.5 * precision * l * l)

    opts = dict(epsabs=0.0, epsrel=1e-10, limit=200)
    mass, _ = integrate.quad(density, 0.0, upper, **opts)
    moment, _ = integrate.quad(lambda l: l * density(l), 0.0, upper, **opts)
    return moment / mass


def clear_caches() -> None:
    """Drop memoised ray means (used to time cold computations)."""
    _ray_mean.cache_clear()


def imaginary_velocity(p_s: Vec2, p_n: Vec2, params: PcadParams, role: Role) -> Vec2:
    offset = p_s - p_n
    if offset.norm() == 0.0:
        raise DegenerateGeometry("coincident positions")
    direction = offset.unit() * DIRECTION_SIGN[role]
    sigma_x, sigma_y = params.sigmas(role)
    return direction * imaginary_speed_expectation(direction, sigma_x, sigma_y, params.bounds)


def perceived_velocity(snapshot: SceneSnapshot, params: PcadParams, role: Role) -> Vec2:
    if role is Role.NEIGHBOUR and snapshot.is_static:
        return ZERO
    state = snapshot.subject if role is Role.SUBJECT else snapshot.neighbour
    v_a = acceleration_velocity(state.acceleration, params.accumulation_time(role))
    v_i = imaginary_velocity(snapshot.subject.position, snapshot.neighbour.position, params, role)
    return state.velocity + v_a + v_i


# -- safe set and velocity gap --------------------------------------------

def safe_set_contains(candidate_v_s: Vec2, snapshot: SceneSnapshot, v_n: Vec2 | None = None,
                      eps: float = 0.0) -> bool:
    """Whether the neighbour stops looming if the subject moved at ``candidate_v_s``."""
    v_n = snapshot.neighbour.velocity if v_n is None else v_n
    r, centre = pair_geometry(snapshot)
    w = candidate_v_s - v_n
    return not bool(looming_mask(r, centre, np.array(w.x), np.array(w.y), eps))


def _lattice(lo: float, hi: float, step: float) -> np.ndarray:
    return np.arange(math.ceil(lo / step - 1e-9), math.floor(hi / step + 1e-9) + 1) * step


def _pick(dx: np.ndarray, dy: np.ndarray, dist: np.ndarray) -> int:
    # smallest distance, ties to lowest v_x then v_y
    return int(np.lexsort((dy, dx, dist))[0])


def _gap_grid(r, centre, w0: Vec2, cfg: SearchConfig) -> tuple[float, Vec2]:
    h, hf = cfg.coarse_step, cfg.fine_step
    if cfg.v_x_range is None or cfg.v_y_range is None:
        reach = w0.norm() + 2 * h
    xr = cfg.v_x_range if cfg.v_x_range is not None else (-reach, reach)
    yr = cfg.v_y_range if cfg.v_y_range is not None else (-reach, reach)

    def safe(dx, dy):
        return ~looming_mask(r, centre, w0.x + dx, w0.y + dy, cfg.eps)

    gx, gy = np.meshgrid(_lattice(*xr, h), _lattice(*yr, h), indexing="ij")
    dx, dy = gx.ravel(), gy.ravel()
    ok = safe(dx, dy)
    if not ok.any():
        raise NoEscapeVelocity("no safe velocity inside the search window")
    dx, dy = dx[ok], dy[ok]
    dist = np.hypot(dx, dy)
    # any coarse point this close may neighbour the true optimum
    near = dist <= dist.min() + math.sqrt(2) * h + hf

    blocks_x, blocks_y = [dx], [dy]
    for cx, cy in zip(dx[near], dy[near]):
        fx = _lattice(max(cx - 1.5 * h, xr[0]), min(cx + 1.5 * h, xr[1]), hf)
        fy = _lattice(max(cy - 1.5 * h, yr[0]), min(cy + 1.5 * h, yr[1]), hf)
        mx, my = np.meshgrid(fx, fy, indexing="ij")
        blocks_x.append(mx.ravel())
        blocks_y.append(my.ravel())
    fx, fy = np.concatenate(blocks_x), np.concatenate(blocks_y)
    ok = safe(fx, fy)
    fx, fy = fx[ok], fy[ok]
    fdist = np.hypot(fx, fy)
    k = _pick(fx, fy, fdist)
    return float(fdist[k]), Vec2(float(fx[k]), float(fy[k]))


def _gap_exact(r, centre, w0: Vec2) -> tuple[float, Vec2]:
    # the looming region is a convex cone: inside the wedge of the extreme
    # reference-pair directions and on the closing side of the centre line.
    # Distance to its complement is the distance to the nearest bounding line.
    units = r / np.hypot(r[:, 0], r[:, 1])[:, None]
    mid = units.sum(axis=0)
    ang = np.arctan2(mid[0] * units[:, 1] - mid[1] * units[:, 0], units @ mid)
    lines = [units[int(np.argmin(ang))], units[int(np.argmax(ang))],
             np.array([-centre[1], centre[0]]) / np.hypot(*centre)]
    w = np.array([w0.x, w0.y])
    dists = [abs(d[0] * w[1] - d[1] * w[0]) for d in lines]
    k = int(np.argmin(dists))
    d = lines[k]
    foot = (w @ d) * d
    return float(dists[k]), Vec2(float(foot[0] - w[0]), float(foot[1] - w[1]))


def avoidance_difficulty(snapshot: SceneSnapshot, v_s_perceived: Vec2, v_n_perceived: Vec2,
                         cfg: SearchConfig = SearchConfig()) -> GapResult:
    """Distance from the perceived subject velocity to the safe velocity set.

    The safe set is built from the snapshot geometry and the perceived
    neighbour velocity.
    """
    r, centre = pair_geometry(snapshot)
    w0 = v_s_perceived - v_n_perceived
    if not looming_mask(r, centre, np.array(w0.x), np.array(w0.y), cfg.eps):
        return GapResult(0.0, v_s_perceived, True)
    if cfg.method == "exact":
        gap, offset = _gap_exact(r, centre, w0)
    else:
        gap, offset = _gap_grid(r, centre, w0, cfg)
    return GapResult(gap, v_s_perceived + offset, gap == 0.0)


def weighting(v_s: Vec2, v_ref: float, alpha: float) -> float:
    if v_ref <= 0 or alpha < 0:
        raise ValueError("need v_ref > 0 and alpha >= 0")
    return (v_s.norm() / v_ref) ** alpha


def pcad_gap(snapshot: SceneSnapshot, params: PcadParams, cfg: SearchConfig = SearchConfig()) -> GapResult:
    if bodies_overlap(snapshot.subject, snapshot.neighbour):
        raise DegenerateGeometry("subject and neighbour bodies overlap")
    v_s = perceived_velocity(snapshot, params, Role.SUBJECT)
    v_n = perceived_velocity(snapshot, params, Role.NEIGHBOUR)
    return avoidance_difficulty(snapshot, v_s, v_n, cfg)


def pcad_risk(snapshot: SceneSnapshot, params: PcadParams, cfg: SearchConfig = SearchConfig()) -> float:
    gap = pcad_gap(snapshot, params, cfg)
    return gap.gap_magnitude * weighting(snapshot.subject.velocity, params.v_ref, params.alpha)
