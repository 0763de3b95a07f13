"""Objective profiles of the PCAD sigmas on zero-noise merging ratings.

Each sigma is scaled alone while the others stay at their true values; a
flat profile means the merging design cannot pin that parameter down.
"""

import argparse
from dataclasses import replace

import numpy as np

from pcadrisk.evaluation import objective
from pcadrisk.params import default_params, risk_function
from pcadrisk.pcad import SearchConfig
from pcadrisk.scenarios import merging_events, synth_ratings

SIGMAS = ("sigma_n_x", "sigma_n_y", "sigma_s_x", "sigma_s_y")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--factors", type=float, nargs="+", default=[0.7, 0.85, 1.0, 1.15, 1.3])
    args = ap.parse_args()
    search = SearchConfig(method="exact")
    true = default_params("pcad", "merging")
    events = synth_ratings(merging_events(), risk_function("pcad", true, search), 0.0, 0, scale=True)
    print("factor      " + "  ".join(f"{f:>8.2f}" for f in args.factors))
    for name in SIGMAS:
        row = [objective("pcad", replace(true, **{name: getattr(true, name) * f}), events, search=search)
               for f in args.factors]
        print(f"{name:<11} " + "  ".join(f"{v:8.4f}" for v in row) + f"   range {np.ptp(row):.4f}")


if __name__ == "__main__":
    main()
