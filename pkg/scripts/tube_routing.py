"""Success rate of tube routing per partition kind on random separated sequences."""
import argparse
import time

from ultrasep.errors import TubeOverlapError, TubeUnreachableError
from ultrasep.harness import ExperimentConfig, build_pair_tubes, gen_random_separated, separating_function, working_delta
from ultrasep.partitions import build_partition


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--count", type=int, default=50)
    ap.add_argument("--delta", type=float, default=0.2)
    ap.add_argument("--kinds", nargs="+", default=["restricted", "good", "hoffman"])
    args = ap.parse_args()
    for kind in args.kinds:
        cfg = ExperimentConfig(partition_kind=kind)
        failures, t0 = [], time.perf_counter()
        for seed in range(args.trials):
            s = gen_random_separated(args.count, args.delta, seed)
            p = build_partition(s, kind, cfg.gamma)
            delta = working_delta(s, cfg)
            f = separating_function(s, p, cfg, delta)
            try:
                build_pair_tubes(s, p, delta, f.r, f.r_large)
            except (TubeOverlapError, TubeUnreachableError) as exc:
                failures.append((seed, type(exc).__name__))
        print(f"{kind:10s} {len(failures)}/{args.trials} failed in {time.perf_counter() - t0:.1f}s {failures[:10]}")


if __name__ == "__main__":
    main()
