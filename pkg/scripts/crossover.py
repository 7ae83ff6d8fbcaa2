"""Median/linear risk ratio as the noise level shrinks like n^(-1/4)."""
import argparse

from medlab.noise import get_model
from medlab.phantoms import canonical_step
from medlab.risk import crossover_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", default="512,1024,2048,4096,8192")
    ap.add_argument("--power", type=float, default=-0.25, help="sigma_n = n**power")
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    ladder = [int(v) for v in args.n.split(",")]
    res = crossover_experiment(ladder, lambda n: n ** args.power, get_model("gaussian"), canonical_step(),
                               args.reps, args.seed)
    print("n,sigma,linear,median,ratio,ratio_se,h_linear,h_median")
    for r in res.rows:
        print(f"{r.n},{r.sigma:.4f},{r.linear:.3e},{r.median:.3e},{r.ratio:.4f},{r.ratio_se:.4f},"
              f"{r.h_linear:.4g},{r.h_median:.4g}")
    if res.regime_warning:
        print("warning: sigma_n * n does not grow on this ladder")


if __name__ == "__main__":
    main()
