"""Looming detection: constant bearing plus closing distance.

A neighbour is looming when the bearing rates of the four reference-point
pairs straddle zero (it holds its place in the field of view) and the
centre distance is shrinking.
"""

from __future__ import annotations

import numpy as np

from .kinematics import SceneSnapshot, Vec2, reference_points


class DegenerateGeometry(ValueError):
    """Raised when two points used in a rate computation coincide."""


def bearing_rate(p_a: Vec2, p_b: Vec2, v_a: Vec2, v_b: Vec2) -> float:
    """Rate of the line-of-sight angle from a to b, clockwise positive."""
    dp = p_a - p_b
    d2 = dp.dot(dp)
    if d2 == 0.0:
        raise DegenerateGeometry("coincident points in bearing rate")
    return (v_a - v_b).cross(dp) / d2


def distance_rate(p_s: Vec2, p_n: Vec2, v_s: Vec2, v_n: Vec2) -> float:
    """Rate of change of centre distance; negative means closing."""
    dp = p_s - p_n
    d = dp.norm()
    if d == 0.0:
        raise DegenerateGeometry("coincident centres in distance rate")
    return dp.dot(v_s - v_n) / d


def bearing_rates(snapshot: SceneSnapshot, v_s: Vec2, v_n: Vec2) -> list[float]:
    refs = reference_points(snapshot)
    return [bearing_rate(ps, pn, v_s, v_n) for ps, pn in refs.pairs()]


def is_looming(
    snapshot: SceneSnapshot,
    v_s_override: Vec2 | None = None,
    v_n_override: Vec2 | None = None,
    eps: float = 0.0,
) -> bool:
    v_s = snapshot.subject.velocity if v_s_override is None else v_s_override
    v_n = snapshot.neighbour.velocity if v_n_override is None else v_n_override
    rates = bearing_rates(snapshot, v_s, v_n)
    crossing = min(rates) * max(rates) < -eps
    closing = distance_rate(snapshot.subject.position, snapshot.neighbour.position, v_s, v_n) < -eps
    return crossing and closing


# -- vectorised form over many candidate relative velocities ---------------

def pair_geometry(snapshot: SceneSnapshot) -> tuple[np.ndarray, np.ndarray]:
    """Reference-pair offsets (4, 2) and the centre offset (2,), subject minus neighbour."""
    refs = reference_points(snapshot)
    r = np.array([(ps - pn).as_tuple() for ps, pn in refs.pairs()])
    if np.any(np.einsum("ij,ij->i", r, r) == 0.0):
        raise DegenerateGeometry("coincident reference points")
    centre = (snapshot.subject.position - snapshot.neighbour.position).as_tuple()
    if centre == (0.0, 0.0):
        raise DegenerateGeometry("coincident centres")
    return r, np.asarray(centre, dtype=float)


def looming_mask(r: np.ndarray, centre: np.ndarray, wx: np.ndarray, wy: np.ndarray,
                 eps: float = 0.0) -> np.ndarray:
    """Elementwise looming test for relative velocities ``(wx, wy) = v_s - v_n``.

    Same arithmetic as :func:`is_looming`, broadcast over arrays.
    """
    d2 = np.einsum("ij,ij->i", r, r)
    rates = [(r[k, 0] * wy - r[k, 1] * wx) / d2[k] for k in range(len(r))]
    lo = np.minimum.reduce(rates)
    hi = np.maximum.reduce(rates)
    dist = np.hypot(centre[0], centre[1])
    ddot = (centre[0] * wx + centre[1] * wy) / dist
    return (lo * hi < -eps) & (ddot < -eps)
