"""How the Čech dimensions depend on the character box radius.

Prints, for a few sheaves, the dimensions at radius 1..R next to the
default radius, to show where the scan stabilizes.
"""

import argparse

from a1euler.cech import cech_cohomology, default_character_box
from a1euler.sheaf import differential_forms, line_bundle
from a1euler.toric import builtin


def sheaves():
    p2, f2 = builtin("P2"), builtin("hirzebruch:2")
    yield "O(-3) on P2", line_bundle(p2, [-3, 0, 0])
    yield "O(-6) on P2", line_bundle(p2, [-6, 0, 0])
    yield "O(4) on P2", line_bundle(p2, [4, 0, 0])
    yield "Omega1 on F2", differential_forms(f2, 1)
    yield "O(2,-3) on F2", line_bundle(f2, [2, 0, -3, 0])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-radius", type=int, default=10)
    args = ap.parse_args()
    for name, s in sheaves():
        default = default_character_box(s)
        print(f"{name}: default radius {default}")
        for r in range(1, args.max_radius + 1):
            dims = cech_cohomology(s, box=r, check_stability=False, with_basis=False).dims
            mark = " <- default" if r == default else ""
            print(f"  R={r:2d} {dims}{mark}")


if __name__ == "__main__":
    main()
