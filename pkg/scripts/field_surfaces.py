"""Risk surfaces of all four models for a few merging-style scenarios.

Writes one CSV + JSON header per model and scenario, then prints the peak
value and how much of the grid carries non-zero risk.
"""

import argparse
from pathlib import Path

import numpy as np

from pcadrisk.fieldgrid import KMH, GridSpec, ScenarioConfig, risk_field
from pcadrisk.params import MODELS, default_params

SCENARIOS = {
    "equal_speed": ScenarioConfig(v_s=100 * KMH, v_n=100 * KMH),
    "slower_neighbour": ScenarioConfig(v_s=100 * KMH, v_n=50 * KMH),
    "braking_neighbour": ScenarioConfig(v_s=100 * KMH, v_n=100 * KMH, a_n=-4.0),
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("fields"))
    ap.add_argument("--resolution", type=float, default=1.0)
    args = ap.parse_args()
    grid = GridSpec(x_range=(0.0, 80.0), y_range=(-8.0, 8.0), resolution=args.resolution)
    for name, scenario in SCENARIOS.items():
        for model in MODELS:
            field = risk_field(model, default_params(model, "merging"), scenario, grid)
            field.write(args.out / f"{name}_{model}.csv")
            share = float(np.mean(field.values > 0))
            print(f"{name:<18} {model:<6} peak {field.values.max():10.4g}  non-zero {share:6.1%}")


if __name__ == "__main__":
    main()
