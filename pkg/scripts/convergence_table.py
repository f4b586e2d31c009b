#!/usr/bin/env python3
"""Mesh-refinement rate study for the explicit scheme.

Runs media meshes n_m0 * 2^k (stent fixed at twice the media count)
against a reference three halvings finer, stepping each level at the
sharp stability limit so dt scales with h^2.
"""

import argparse
from pathlib import Path

from stentsim import convergence_study, paper_params
from stentsim.output import write_table_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/convergence.csv")
    ap.add_argument("--n-m0", type=int, default=10)
    ap.add_argument("--levels", type=int, default=3)
    ap.add_argument("--t-end", type=float, default=1.0)
    args = ap.parse_args()

    table = convergence_study(paper_params(), n_m0=args.n_m0,
                              levels=args.levels, t_end=args.t_end)
    print(f"{'h_m':>10s} {'field':>5s} {'norm':>8s} {'error':>13s} {'rate':>7s}")
    for level, h, fld, norm, err, rel, rate in table.rows():
        rate_s = f"{rate:7.3f}" if rate != "" else " " * 7
        print(f"{h:10.5f} {fld:>5s} {norm:>8s} {err:13.6e} {rate_s}")
    path = write_table_csv(Path(args.out),
                           ["level", "h_m", "field", "norm", "error",
                            "rate_to_next"],
                           [(lv, h, f, n, e, r) for lv, h, f, n, e, _, r
                            in table.rows()])
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
