"""Min-over-width risk of the three filters on the noisy step, d = 1."""
import argparse
import time

from medlab.noise import get_model
from medlab.phantoms import canonical_step
from medlab.risk import rate_csv, rate_experiment, risk_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--filters", default="linear,median,two-scale")
    ap.add_argument("--n", default="512,1024,2048,4096,8192")
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--sigma", type=float, default=1.0)
    ap.add_argument("--out", default=None, help="risk CSV")
    args = ap.parse_args()
    ladder = [int(v) for v in args.n.split(",")]
    reports, fits = [], []
    for kind in args.filters.split(","):
        t0 = time.perf_counter()
        reps, fit = rate_experiment(kind, canonical_step(), get_model("gaussian"), args.sigma, ladder,
                                    args.reps, args.seed)
        reports += reps
        fits.append((kind, fit))
        print(f"{kind:10s} slope {fit.slope:+.3f}  r2 {fit.r_squared:.4f}  ({time.perf_counter() - t0:.1f} s)")
        for r in reps:
            print(f"    n={r.n:5d}  argmin={r.argmin}  risk={r.best().mse:.5f} +- {r.best().mse_se:.1e}")
    print(rate_csv(fits), end="")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(risk_csv(reports))


if __name__ == "__main__":
    main()
