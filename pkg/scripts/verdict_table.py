#!/usr/bin/env python3
"""Depth dichotomy table for lamplighters over free products of cyclic groups.

For each pair of cyclic factors Z/a * Z/b with cyclic generators, prints the
two Hamiltonian differences, their sum, the bounded/unbounded verdict, and
the abelian classification case.

Usage:
    python scripts/verdict_table.py [--max-order N] [--format csv|text]
"""

from __future__ import annotations

import argparse
import csv
import sys

from lamplighter import groups as G, wreath as W


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-order", type=int, default=10)
    ap.add_argument("--format", choices=["csv", "text"], default="text")
    args = ap.parse_args(argv)

    rows = []
    for a in range(2, args.max_order + 1):
        for b in range(2, args.max_order + 1):
            H = G.make_cyclic(a, [1])
            K = G.make_cyclic(b, [1], letter="c")
            rep = W.theorem_b_verdict(H, K)
            case, _ = W.classify_abelian_free_product(H, K)
            rows.append(
                (a, b, rep.h_first, rep.h_second, rep.total,
                 "bounded" if rep.uniformly_bounded else "unbounded", case)
            )

    header = ["o_H", "o_K", "h_H", "h_K", "sum", "verdict", "case"]
    if args.format == "csv":
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    else:
        print(" ".join(f"{h:>8}" for h in header))
        for row in rows:
            print(" ".join(f"{str(c):>8}" for c in row))
    return 0


if __name__ == "__main__":
    sys.exit(main())
