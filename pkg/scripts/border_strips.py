"""Survey of border strips over a window sweep: points per top strip, and strips from distinct annuli that meet."""
import argparse
import itertools

import numpy as np

from ultrasep.disc import annulus_index
from ultrasep.harness import gen_random_separated, sweep_windows
from ultrasep.partitions import classify_window_points, restricted_good_partition
from ultrasep.tubes import SIDES, border_strip, count_points_in_strip, segment_segment_distance


def strips_meet(s1, s2):
    gap = segment_segment_distance(
        np.array([s1.segment[0]]), np.array([s1.segment[1]]), np.array([s2.segment[0]]), np.array([s2.segment[1]])
    )[0, 0]
    return gap < (s1.width + s2.width) / 2


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--count", type=int, default=50)
    ap.add_argument("--r", type=float, default=0.1, help="strip width factor")
    ap.add_argument("--gamma", type=float, default=0.5)
    args = ap.parse_args()
    crowded = anchors = met = pairs = 0
    for seed in range(args.seeds):
        s = gen_random_separated(args.count, 0.2, seed)
        p = restricted_good_partition(s, args.gamma)
        for w in sweep_windows(s, 8):
            e_w = classify_window_points(s, p, w).e_w
            for a in e_w:
                top = border_strip(s[a], w, "top", args.r)
                anchors += 1
                crowded += count_points_in_strip(s, [x for x in p.part_a if x != a], top) > 1
            for a, b in itertools.combinations(e_w, 2):
                if annulus_index(s[a], args.gamma) == annulus_index(s[b], args.gamma):
                    continue
                for sa, sb in itertools.product(SIDES, SIDES):
                    pairs += 1
                    met += strips_meet(border_strip(s[a], w, sa, args.r), border_strip(s[b], w, sb, args.r))
    print(f"top strips holding more than one other point: {crowded}/{anchors}")
    print(f"strip pairs from distinct annuli that meet: {met}/{pairs}")


if __name__ == "__main__":
    main()
