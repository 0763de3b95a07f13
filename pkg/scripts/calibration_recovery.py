"""Fit each model to synthetic ratings it generated itself and report parameter recovery."""

import argparse
import time

from pcadrisk.evaluation import OptimizerConfig, calibrate
from pcadrisk.params import default_params, params_from_dict, params_to_dict, risk_function
from pcadrisk.pcad import SearchConfig
from pcadrisk.scenarios import merging_events, obstacle_events, replicate, synth_ratings

FREE = {
    "rpr": ("c0", "c1", "c2"),
    "ppdrf": ("sigma_ax", "sigma_ay", "d_steepness"),
    "drf": ("steepness_s", "preview_t_la", "widen_m", "base_c"),
    "pcad": ("sigma_n_x", "sigma_n_y", "sigma_s_x", "sigma_s_y"),
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--model", choices=sorted(FREE), default="rpr")
    ap.add_argument("--profile", choices=("merging", "obstacle"), default="merging")
    ap.add_argument("--noise-sd", type=float, default=0.5)
    ap.add_argument("--participants", type=int, default=23)
    ap.add_argument("--restarts", type=int, default=2)
    ap.add_argument("--seed", type=int, default=11)
    args = ap.parse_args()

    search = SearchConfig(method="exact")
    true = default_params(args.model, args.profile)
    base = merging_events() if args.profile == "merging" else obstacle_events()
    free = FREE[args.model] if args.profile == "merging" or args.model != "pcad" else ("sigma_s_x", "sigma_s_y")
    scale = args.model != "rpr"
    events = synth_ratings(replicate(base, args.participants), risk_function(args.model, true, search),
                           args.noise_sd, args.seed, scale=scale)
    d = params_to_dict(true)
    init = params_from_dict(args.model, {k: d[k] * (1.3 if i % 2 else 0.75) for i, k in enumerate(free)}, true)

    start = time.perf_counter()
    result = calibrate(args.model, events, init,
                       OptimizerConfig(free=free, restarts=args.restarts, seed=0, scale=scale), search)
    print(f"{args.model}/{args.profile}: {len(events)} events, objective {result.objective:.4f}, "
          f"{time.perf_counter() - start:.0f} s")
    for k in free:
        got, want = getattr(result.params, k), getattr(true, k)
        print(f"  {k:<14} true {want:9.4f}  fitted {got:9.4f}  error {got / want - 1:+.1%}")


if __name__ == "__main__":
    main()
