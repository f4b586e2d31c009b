#!/usr/bin/env python3
"""Accuracy of the decoupling strategies and of the stent/media mesh
ratio, against one fine monolithic reference.

The default scale reproduces the baseline comparison (50/25 elements,
6454 steps over unit time, reference 20x finer in space with a step
count 400x larger); pass --quick for a desk-scale variant.
"""

import argparse

from stentsim import (
    compare_algorithms,
    make_reference,
    paper_params,
    stepping_study,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--quick", action="store_true",
                    help="small meshes and a coarser reference")
    args = ap.parse_args()
    p = paper_params()

    if args.quick:
        n_m, n_s, n_steps, ref_scale, ref_mult = 8, 16, 1000, 4, 20
        t_end = 0.5
    else:
        n_m, n_s, n_steps, ref_scale, ref_mult = 25, 50, 6454, 20, 400
        t_end = 1.0
    stride = max(1, n_steps // 14)
    snaps = [k * stride * t_end / n_steps for k in range(n_steps // stride + 1)]

    print(f"reference: {ref_scale * n_s}/{ref_scale * n_m} elements, "
          f"{ref_mult * n_steps} steps")
    ref = make_reference(p, ref_scale * n_s, ref_scale * n_m,
                         ref_mult * n_steps, t_end, snaps, record_every=5000)

    comp = compare_algorithms(p, ref, n_s, n_m, n_steps, t_end, snaps)
    print(f"\n{'variant':>11s} {'rel err c':>12s} {'rel err c1':>12s} "
          f"{'rel err c2':>12s}")
    for name, rep in (("alg1", comp.alg1), ("alg2", comp.alg2),
                      ("monolithic", comp.monolithic)):
        print(f"{name:>11s} {rep.c.rel_linf_l2:12.4e} "
              f"{rep.c1.rel_linf_l2:12.4e} {rep.c2.rel_linf_l2:12.4e}")

    reports = stepping_study(p, ref, n_m, [1, 2], n_steps, t_end, snaps)
    print(f"\n{'n_s/n_m':>8s} {'rel err c':>12s} {'rel err c1':>12s} "
          f"{'rel err c2':>12s}")
    for q in (1, 2):
        rep = reports[q]
        print(f"{q:8d} {rep.c.rel_linf_l2:12.4e} "
              f"{rep.c1.rel_linf_l2:12.4e} {rep.c2.rel_linf_l2:12.4e}")
    gains = [reports[1].field(f).rel_linf_l2 / reports[2].field(f).rel_linf_l2
             for f in ("c", "c1", "c2")]
    print(f"\nerror reduction from doubling the stent mesh: "
          f"c {gains[0]:.2f}x, c1 {gains[1]:.2f}x, c2 {gains[2]:.2f}x")


if __name__ == "__main__":
    main()
