"""Perceived driving risk: the PCAD model and three comparison models."""

from .kinematics import NeighbourKind, SceneSnapshot, Vec2, VehicleState
from .looming import DegenerateGeometry, is_looming
from .pcad import GapResult, PcadParams, SearchConfig, pcad_gap, pcad_risk
from .baselines import DrfParams, PpdrfParams, RprParams, drf_risk, ppdrf_risk, rpr_continuous, rpr_event
from .params import default_params, resolve_params, risk_function

__all__ = [
    "DegenerateGeometry", "DrfParams", "GapResult", "NeighbourKind", "PcadParams", "PpdrfParams", "RprParams",
    "SceneSnapshot", "SearchConfig", "Vec2", "VehicleState", "default_params", "drf_risk", "is_looming",
    "pcad_gap", "pcad_risk", "ppdrf_risk", "resolve_params", "risk_function", "rpr_continuous", "rpr_event",
]
