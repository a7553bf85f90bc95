"""AR(1) check: the LSE deviation variance should approach 1 - a**2 for any noise level."""
import argparse
import time

from semilin import LSE, OPTIMAL, ExperimentConfig, FunctionSpec, GammaDist, ModelSpec, NoiseSpec
from semilin import limit_variance_optimal, run_monte_carlo


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--a", type=float, default=0.5)
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--variances", type=float, nargs="+", default=[1.0, 4.0])
    args = p.parse_args()
    print(f"closed form 1 - a^2 = {1 - args.a ** 2:.4f}")
    for var in args.variances:
        model = ModelSpec(args.a, FunctionSpec("linear"), NoiseSpec("iid-bounded", GammaDist("uniform", var)))
        start = time.perf_counter()
        s = run_monte_carlo(ExperimentConfig(model, (LSE, OPTIMAL), n=args.n, reps=args.reps,
                                             master_seed=args.seed))
        lse = s.scheme("LSE")
        print(f"sigma^2={var:g}: var={lse.at(1.0).variance:.4f}  mean V_n={lse.V_mean:.4f}  "
              f"({time.perf_counter() - start:.1f}s)")
    lv = limit_variance_optimal(ModelSpec(args.a), seed=args.seed)
    print(f"truncated-energy limit: {lv.value:.4f} (half r {lv.value_half_r:.4f}, half n {lv.value_half_n:.4f})")


if __name__ == "__main__":
    main()
