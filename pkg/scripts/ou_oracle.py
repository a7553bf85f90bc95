"""Ornstein-Uhlenbeck drift: sqrt(T)(a_hat_T - a) should have variance near 2a."""
import argparse

from semilin import LSE, ContinuousModelSpec, ExperimentConfig, FunctionSpec, Intensity, run_monte_carlo
from semilin.continuous import strong_error


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--a", type=float, default=0.8)
    p.add_argument("--T", type=float, default=500.0)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--reps", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    model = ContinuousModelSpec(args.a, FunctionSpec("linear"), Intensity(1.0))
    s = run_monte_carlo(ExperimentConfig(model, (LSE,), T=args.T, dt=args.dt, reps=args.reps,
                                         master_seed=args.seed))
    lse = s.scheme("LSE")
    print(f"var={lse.at(1.0).variance:.4f}  mean V_T={lse.V_mean:.4f}  classical 2a={2 * args.a:.4f}")
    coarse, fine = strong_error(model, 1.0, 0.05, args.seed)
    print(f"Euler-Maruyama strong error at dt=0.05: {coarse:.2e}, at dt=0.025: {fine:.2e}")


if __name__ == "__main__":
    main()
