"""Time per computation step of every model on both synthetic datasets."""

import argparse

from pcadrisk.evaluation import benchmark
from pcadrisk.params import MODELS, default_params
from pcadrisk.scenarios import merging_events, obstacle_events


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repetitions", type=int, default=3)
    args = ap.parse_args()
    for name, events in (("merging", merging_events()), ("obstacle", obstacle_events())):
        print(f"{name} ({len(events)} events)")
        for model in MODELS:
            ms = benchmark(model, default_params(model, name), events, repetitions=args.repetitions)
            print(f"  {model:<6} {ms:10.4f} ms/step")


if __name__ == "__main__":
    main()
