"""Agreement between the looming predicate and simulated constant-velocity collisions.

Splits the disagreements by whether the bodies first touch through a lateral
face (side-swipe) or through a facing front/rear edge.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))
from oracles import random_road_snapshots, simulate_collisions  # noqa: E402

from pcadrisk.looming import is_looming  # noqa: E402


def first_contact_axis(snap) -> str:
    p = np.array((snap.neighbour.position - snap.subject.position).as_tuple())
    w = np.array((snap.neighbour.velocity - snap.subject.velocity).as_tuple())
    half = np.array([(snap.subject.length + snap.neighbour.length) / 2, (snap.subject.width + snap.neighbour.width) / 2])
    entry = []
    for k in range(2):
        if abs(p[k]) <= half[k]:
            entry.append(0.0)
        elif w[k] * p[k] < 0:
            entry.append((abs(p[k]) - half[k]) / abs(w[k]))
        else:
            entry.append(np.inf)
    return "lateral" if entry[1] > entry[0] else "longitudinal"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-n", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    snaps = random_road_snapshots(args.n, args.seed)
    predicted = np.array([is_looming(s) for s in snaps])
    hit = simulate_collisions(snaps)
    wrong = np.flatnonzero(predicted != hit)
    print(f"agreement {np.mean(predicted == hit):.2%} over {len(snaps)} snapshots")
    kinds = {"missed": 0, "false alarm": 0}
    faces = {"lateral": 0, "longitudinal": 0}
    for i in wrong:
        kinds["missed" if hit[i] else "false alarm"] += 1
        if hit[i]:
            faces[first_contact_axis(snaps[i])] += 1
    print(f"disagreements {len(wrong)}: {kinds}; missed contacts by final entry axis {faces}")


if __name__ == "__main__":
    main()
