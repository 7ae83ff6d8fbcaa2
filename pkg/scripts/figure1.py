"""Expected linear and median outputs across the jump of the step (n = 512, h = 1/8)."""
import argparse

import numpy as np

from medlab.noise import get_model
from medlab.phantoms import canonical_step
from medlab.risk import FilterSpec, bias_profile


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=512)
    ap.add_argument("--h", type=float, default=0.125)
    ap.add_argument("--sigmas", default="0.01,0.1,0.2,1")
    ap.add_argument("--reps", type=int, default=10000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--svg", default=None)
    args = ap.parse_args()
    n, h = args.n, args.h
    i = n // 2 - int(n * h) // 2
    g, f = get_model("gaussian"), canonical_step()
    curves = {}
    for s in (float(v) for v in args.sigmas.split(",")):
        for kind in ("linear", "median"):
            prof = bias_profile(FilterSpec(kind, h), f, g, s, n, args.reps, args.seed)
            curves[(kind, s)] = prof
            print(f"sigma={s:<5g} {kind:6s} E[T({i})] = {prof.mean[i - 1]:+.4f} +- {prof.stderr[i - 1]:.1e}")
    if args.svg:
        import matplotlib
        matplotlib.use("svg")
        import matplotlib.pyplot as plt
        plt.rcParams["svg.hashsalt"] = "medlab"
        fig, ax = plt.subplots(figsize=(7, 4))
        x = np.arange(1, n + 1)
        lo, hi = n // 2 - 2 * int(n * h), n // 2 + 2 * int(n * h)
        ax.plot(x[lo:hi], curves[("linear", 1.0)].mean[lo:hi], "g--", label="linear")
        for (kind, s), prof in curves.items():
            if kind == "median":
                ax.plot(x[lo:hi], prof.mean[lo:hi], label=f"median, sigma={s:g}")
        ax.set_xlabel("grid index")
        ax.legend()
        fig.savefig(args.svg, metadata={"Date": None})


if __name__ == "__main__":
    main()
