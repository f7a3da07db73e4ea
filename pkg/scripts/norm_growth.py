"""Carleson norm and condition (C) of the stacked negative control as the count grows."""
import argparse

from ultrasep.harness import gen_non_carleson
from ultrasep.sequences import carleson_condition_inf, carleson_norm


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--counts", type=int, nargs="+", default=[2, 5, 10, 20, 50, 100, 150, 200, 400])
    args = ap.parse_args()
    print("count,norm,condition_c")
    for n in args.counts:
        s = gen_non_carleson(n)
        print(f"{n},{carleson_norm(s).norm_estimate:.6g},{carleson_condition_inf(s):.3e}")


if __name__ == "__main__":
    main()
