#!/usr/bin/env python3
"""Depth profiles for the bundled example lamplighters.

Enumerates the wreath-product ball to the requested radius, computes the
exact depth of every element, and prints per-shell maxima plus all dead ends.

Usage:
    python scripts/depth_profile_run.py --base line    --radius 7
    python scripts/depth_profile_run.py --base dinf    --radius 13
    python scripts/depth_profile_run.py --base oct2    --radius 10
    python scripts/depth_profile_run.py --base square4 --radius 8
"""

from __future__ import annotations

import argparse
import sys
import time

from lamplighter import groups as G, wreath as W

BASES = {
    "line": lambda: G.make_abelian(1, [], [[1]]),
    "tree": lambda: G.make_free(1, "t"),
    "dinf": lambda: G.make_free_product(
        G.make_cyclic(2, [1]), G.make_cyclic(2, [1], letter="c")
    ),
    "oct2": lambda: G.make_free_product(
        G.make_cyclic(8, [1]), G.make_cyclic(2, [1], letter="c")
    ),
    "square4": lambda: G.make_free_product(
        G.make_cyclic(4, [1]), G.make_cyclic(4, [1], letter="c")
    ),
}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--base", choices=sorted(BASES), default="line")
    ap.add_argument("--radius", type=int, default=7)
    ap.add_argument("--kmax", type=int, default=8)
    ap.add_argument("--cap", type=int, default=2_000_000)
    args = ap.parse_args(argv)

    lamps = G.make_cyclic(2, [1], letter="a")
    model = W.LamplighterModel(lamps, BASES[args.base]())
    t0 = time.time()
    profile = W.depth_profile(
        model, args.radius, args.kmax, cap=args.cap, partial_ok=True
    )
    status = "complete" if profile.complete else "PARTIAL"
    print(
        f"base={args.base} radius={args.radius} elements={len(profile.rows)} "
        f"({status}, {time.time()-t0:.1f}s)"
    )
    print("shell maxima:", profile.max_depth_per_shell())
    dead = [r for r in profile.rows if r.depth >= 1]
    print(f"dead ends with depth >= 1: {len(dead)}")
    for row in dead[:40]:
        flag = "" if row.depth_exact else " (lower bound)"
        print(f"  {row.element_id}  len={row.word_length} depth={row.depth}{flag}")
    if len(dead) > 40:
        print(f"  ... {len(dead) - 40} more")
    return 0


if __name__ == "__main__":
    sys.exit(main())
