"""Calibrated parameter profiles, config loading and the model registry.

Config files are JSON (nested ``{"pcad": {"merging": {...}}}`` or flat
dotted keys) or plain ``model.profile.param = value`` lines.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Callable, Union

from .baselines import DrfParams, PpdrfParams, RprParams, drf_risk, ppdrf_risk, rpr_continuous
from .kinematics import SceneSnapshot
from .pcad import PcadParams, SearchConfig, pcad_risk

MODELS = ("pcad", "rpr", "ppdrf", "drf")
PROFILES = ("merging", "obstacle")

ModelParams = Union[PcadParams, RprParams, PpdrfParams, DrfParams]

PARAM_TYPES: dict[str, type] = {
    "pcad": PcadParams,
    "rpr": RprParams,
    "ppdrf": PpdrfParams,
    "drf": DrfParams,
}

# Calibrated values per dataset profile. Entries left
# blank for a profile keep the neutral defaults (zero sigma, alpha = 0).
PROFILE_VALUES: dict[str, dict[str, dict[str, float]]] = {
    "pcad": {
        "merging": dict(sigma_n_x=4.28, sigma_n_y=3.86, sigma_s_x=0.80, sigma_s_y=1.70,
                        t_a_s=0.13, t_a_n=0.01, alpha=0.52, v_ref=27.78),
        "obstacle": dict(sigma_s_x=6.58, sigma_s_y=1.20, alpha=0.0, v_ref=25.0),
    },
    "rpr": {
        "merging": dict(c0=12.10, c1=-3.70, c2=-0.36),
        "obstacle": dict(c0=20.70, c1=-3.68, c2=0.0),
    },
    "ppdrf": {
        "merging": dict(sigma_ax=2.01, sigma_ay=0.02),
        "obstacle": dict(d_steepness=0.14),
    },
    "drf": {
        "merging": dict(steepness_s=0.15, preview_t_la=1.20, widen_m=3.98e-8, base_c=0.45),
        "obstacle": dict(steepness_s=0.005, preview_t_la=8.12, widen_m=3.66e-4, base_c=1.10),
    },
}

# parameters the calibrator may move, with box constraints
CALIBRATION_BOXES: dict[str, dict[str, tuple[float, float]]] = {
    "pcad": dict(sigma_n_x=(0.0, 15.0), sigma_n_y=(0.0, 15.0), sigma_s_x=(0.0, 15.0),
                 sigma_s_y=(0.0, 15.0), t_a_s=(0.0, 2.0), t_a_n=(0.0, 2.0), alpha=(0.0, 2.5)),
    "rpr": dict(c0=(-50.0, 50.0), c1=(-20.0, 20.0), c2=(-5.0, 5.0)),
    "ppdrf": dict(sigma_ax=(1e-3, 10.0), sigma_ay=(1e-3, 10.0), d_steepness=(1e-3, 50.0)),
    "drf": dict(steepness_s=(0.0, 5.0), preview_t_la=(0.1, 15.0), widen_m=(0.0, 0.1), base_c=(0.05, 5.0)),
}


def default_params(model_id: str, profile: str = "merging") -> ModelParams:
    _check_model(model_id)
    if profile not in PROFILES:
        raise ValueError(f"unknown profile {profile!r}; expected one of {PROFILES}")
    return PARAM_TYPES[model_id](**PROFILE_VALUES[model_id][profile])


def params_to_dict(params: ModelParams) -> dict[str, Any]:
    out = {}
    for f in fields(params):
        value = getattr(params, f.name)
        if f.name == "bounds":
            value = {g.name: getattr(value, g.name) for g in fields(value)}
        elif isinstance(value, tuple):
            value = list(value)
        out[f.name] = value
    return out


def params_from_dict(model_id: str, values: dict[str, Any], base: ModelParams | None = None) -> ModelParams:
    _check_model(model_id)
    cls = PARAM_TYPES[model_id]
    base = cls() if base is None else base
    known = {f.name for f in fields(cls)}
    unknown = set(values) - known
    if unknown:
        raise ValueError(f"unknown {model_id} parameters: {sorted(unknown)}")
    updates = dict(values)
    if "bounds" in updates and isinstance(updates["bounds"], dict):
        updates["bounds"] = replace(base.bounds, **updates["bounds"])
    if "tau_set" in updates:
        updates["tau_set"] = tuple(updates["tau_set"])
    return replace(base, **updates)


def _parse_scalar(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text.strip().strip('"')


def read_config(path: str | Path) -> dict[str, dict[str, dict[str, Any]]]:
    """Read a parameter file into ``{model: {profile: {param: value}}}``."""
    text = Path(path).read_text()
    flat: dict[str, Any] = {}
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = None
    if isinstance(data, dict):
        _flatten(data, "", flat)
    else:
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'model.profile.param = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            flat[key] = _parse_scalar(value)
    nested: dict[str, dict[str, dict[str, Any]]] = {}
    for key, value in flat.items():
        parts = key.split(".")
        if len(parts) < 3:
            raise ValueError(f"config key {key!r} must look like model.profile.param")
        model, profile, param = parts[0], parts[1], ".".join(parts[2:])
        target = nested.setdefault(model, {}).setdefault(profile, {})
        if param.startswith("bounds."):
            target.setdefault("bounds", {})[param.split(".", 1)[1]] = value
        else:
            target[param] = value
    return nested


def _flatten(node: dict, prefix: str, out: dict) -> None:
    for key, value in node.items():
        name = f"{prefix}.{key}" if prefix else key
        if isinstance(value, dict) and name.count(".") < 2:
            _flatten(value, name, out)
        elif isinstance(value, dict):
            for sub, v in value.items():
                out[f"{name}.{sub}"] = v
        else:
            out[name] = value


def resolve_params(model_id: str, profile: str, config: dict | None = None,
                   overrides: dict[str, Any] | None = None) -> ModelParams:
    """Built-in profile, then config file values, then explicit overrides."""
    params = default_params(model_id, profile)
    if config:
        params = params_from_dict(model_id, config.get(model_id, {}).get(profile, {}), params)
    if overrides:
        params = params_from_dict(model_id, overrides, params)
    return params


def _check_model(model_id: str) -> None:
    if model_id not in MODELS:
        raise ValueError(f"unknown model {model_id!r}; expected one of {MODELS}")


@dataclass(frozen=True)
class ModelSpec:
    model_id: str
    params: ModelParams
    search: SearchConfig = SearchConfig()

    def risk(self, snapshot: SceneSnapshot) -> float:
        return risk_function(self.model_id, self.params, self.search)(snapshot)


def risk_function(model_id: str, params: ModelParams,
                  search: SearchConfig = SearchConfig()) -> Callable[[SceneSnapshot], float]:
    _check_model(model_id)
    if model_id == "pcad":
        return lambda snap: pcad_risk(snap, params, search)
    if model_id == "rpr":
        return lambda snap: rpr_continuous(snap, params)
    if model_id == "ppdrf":
        return lambda snap: ppdrf_risk(snap, params)
    return lambda snap: drf_risk(snap, params)
