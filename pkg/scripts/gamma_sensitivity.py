"""points_per_annulus max m, the annulus bound and the measured norm for several gamma on random sequences."""
import argparse

import numpy as np

from ultrasep.harness import gen_random_separated
from ultrasep.sequences import carleson_bound_from_annuli, carleson_norm, points_per_annulus


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--count", type=int, default=40)
    ap.add_argument("--gammas", type=float, nargs="+", default=[0.3, 0.5, 0.7])
    args = ap.parse_args()
    print("gamma,mean_m,mean_bound,mean_norm")
    seqs = [gen_random_separated(args.count, 0.2, seed) for seed in range(args.seeds)]
    norms = np.array([carleson_norm(s).norm_estimate for s in seqs])
    for g in args.gammas:
        ms = np.array([points_per_annulus(s, g)[1] for s in seqs])
        bounds = np.array([carleson_bound_from_annuli(m, g) for m in ms])
        print(f"{g},{ms.mean():.3f},{bounds.mean():.3f},{norms.mean():.3f}")


if __name__ == "__main__":
    main()
