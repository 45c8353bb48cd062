"""Hodge diagonal, chi via the pairing, and chi via torus orbits for a fan corpus.

    python3 scripts/corpus_table.py [--blowups K] [--seed S] [--json]
"""

import argparse
import json
import random
import time

from a1euler.gw import gw_equal, to_canonical_string
from a1euler.k0var import orbit_chi
from a1euler.pairing import chi_a1, hodge_table
from a1euler.toric import builtin, star_subdivision

BASE = ["pt", "P1", "P2", "P3", "P1xP1", "hirzebruch:1", "hirzebruch:2", "hirzebruch:3"]


def corpus(blowups: int, seed: int):
    rng = random.Random(seed)
    fans = [builtin(n) for n in BASE]
    surfaces = [f for f in fans if f.dim == 2]
    for _ in range(blowups):
        fan = rng.choice(surfaces)
        for _ in range(rng.randint(1, 3)):
            fan, _ = star_subdivision(fan, rng.choice(fan.max_cones))
        fans.append(fan)
    return fans


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--blowups", type=int, default=4, help="extra random iterated blow-ups of surfaces")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()

    rows = []
    for fan in corpus(args.blowups, args.seed):
        t0 = time.perf_counter()
        table = hodge_table(fan)
        chi = chi_a1(fan)
        orb = orbit_chi(fan)
        rows.append({"fan": str(fan), "rays": fan.n_rays, "hodge": table.diagonal(),
                     "chi": to_canonical_string(chi, invariants=False),
                     "orbits": to_canonical_string(orb, invariants=False),
                     "agree": gw_equal(chi, orb), "signature": chi.signature,
                     "seconds": round(time.perf_counter() - t0, 3)})
    if args.json:
        print(json.dumps(rows, indent=2, ensure_ascii=False))
        return
    print(f"{'fan':42} {'hodge':14} {'chi':14} {'orbits':14} agree  sec")
    for r in rows:
        print(f"{r['fan'][:42]:42} {str(r['hodge']):14} {r['chi']:14} {r['orbits']:14} "
              f"{str(r['agree']):6} {r['seconds']}")


if __name__ == "__main__":
    main()
