"""Blow-up relation residuals on the built-in grid plus random expression triples."""

import argparse
import random

from a1euler.gw import ZERO, gw_equal, to_canonical_string
from a1euler.k0var import bittner_grid, bittner_residual, dimension, parse_expr

LEAVES = ["pt", "P^1", "P^2", "P^3", "A^1", "A^2", "Gm", "toric(P2)", "toric(hirzebruch:1)"]


def random_expr(rng: random.Random, depth: int) -> str:
    if depth == 0 or rng.random() < 0.3:
        return rng.choice(LEAVES)
    op = rng.choice(["*", "+", "bl", "pb"])
    a, b = random_expr(rng, depth - 1), random_expr(rng, depth - 1)
    if op == "bl":
        return f"bl({a}; {b}; {rng.randint(2, 4)})"
    if op == "pb":
        return f"pb({a}; {rng.randint(1, 3)})"
    return f"({a} {op} {b})"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--random", type=int, default=200, help="number of random triples")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args()

    triples = list(bittner_grid())
    rng = random.Random(args.seed)
    for _ in range(args.random):
        x, y = parse_expr(random_expr(rng, 3)), parse_expr(random_expr(rng, 2))
        triples.append((x, y, rng.randint(2, 4)))

    bad = 0
    for x, y, c in triples:
        r = bittner_residual(x, y, c)
        ok = gw_equal(r, ZERO)
        bad += not ok
        if args.verbose or not ok:
            print(f"{'ok ' if ok else 'BAD'} dim {dimension(x)}/{dimension(y)} c={c}: X={x} Y={y} "
                  f"residual={to_canonical_string(r, invariants=False)}")
    print(f"{len(triples)} triples, {bad} nonzero residuals")
    raise SystemExit(1 if bad else 0)


if __name__ == "__main__":
    main()
