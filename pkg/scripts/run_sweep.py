"""Full pipeline on a batch of random separated sequences; one summary line per sequence."""
import argparse

from ultrasep.harness import ExperimentConfig, gen_random_separated, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--count", type=int, default=30)
    ap.add_argument("--delta", type=float, default=0.2)
    ap.add_argument("--partition", default="restricted", choices=("good", "hoffman", "restricted"))
    ap.add_argument("--levels", type=int, default=12)
    args = ap.parse_args()
    cfg = ExperimentConfig(partition_kind=args.partition, sweep_levels=args.levels)
    for seed in range(args.seeds):
        rep = run_experiment(gen_random_separated(args.count, args.delta, seed), cfg)
        failed = ",".join(rep.failed_clauses()) or "-"
        print(
            f"seed={seed} norm={rep.carleson['norm_estimate']:.3f} C={rep.condition_c:.3e} "
            f"eta={rep.function['eta']:.3e} r={min(rep.function['r_small'], rep.function['r_large']):.3f} "
            f"verdict={'pass' if rep.verdict else 'fail'} failed={failed}"
        )


if __name__ == "__main__":
    main()
