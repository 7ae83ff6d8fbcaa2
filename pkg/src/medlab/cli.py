"""Command-line front end: ``medlab <subcommand> [flags]``.

Exit status is 0 on success, 2 for configuration errors and 1 when a
computation fails.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np

from . import median_stats as ms
from .filters import iterated_median, linear_filter, median_filter, two_scale_median
from .grid import GridSample
from .noise import contaminated_median_sample, get_model, population_contaminated_median
from .phantoms import resolve_phantom
from .risk import (FilterSpec, bias_profile, crossover_experiment, h_grid, rate_csv, rate_experiment, risk_csv,
                   sweep_h, two_scale_grid)


class ConfigError(Exception):
    def __init__(self, flag: str, message: str):
        super().__init__(f"{flag}: {message}")
        self.flag = flag


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class Schedule:
    """sigma_n = scale * n**power; a plain number is power 0."""

    scale: float
    power: float
    text: str

    def __call__(self, n: int) -> float:
        return self.scale * n ** self.power


_SCHEDULE = re.compile(r"^\s*(?:([0-9.eE+-]+)\s*\*\s*)?n\s*\^\s*\(?\s*([-+0-9./eE]+)\s*\)?\s*$")


def parse_sigma(text: str) -> Schedule:
    """'1', '0.5' or a schedule such as 'n^-1/4' or '2*n^-0.5'."""
    try:
        value = float(text)
    except ValueError:
        m = _SCHEDULE.match(text)
        if not m:
            raise ConfigError("--sigma", f"expected a number or c*n^p, got {text!r}")
        try:
            scale = float(m.group(1)) if m.group(1) else 1.0
            power = float(Fraction(m.group(2)))
        except (ValueError, ZeroDivisionError):
            raise ConfigError("--sigma", f"cannot read schedule {text!r}")
        if scale < 0:
            raise ConfigError("--sigma", "scale must be nonnegative")
        return Schedule(scale, power, text)
    if not math.isfinite(value) or value < 0:
        raise ConfigError("--sigma", f"noise level must be a finite number >= 0, got {text!r}")
    return Schedule(value, 0.0, text)


def _int_list(flag, text, lo=1):
    try:
        vals = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(flag, f"expected comma-separated integers, got {text!r}")
    if not vals or any(v < lo for v in vals):
        raise ConfigError(flag, f"expected integers >= {lo}, got {text!r}")
    return vals


def _float_list(flag, text):
    try:
        vals = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(flag, f"expected comma-separated numbers, got {text!r}")
    if not vals or any(not 0 < v < 1 for v in vals):
        raise ConfigError(flag, f"widths must lie in (0, 1), got {text!r}")
    return vals


def _model(name):
    try:
        return get_model(name)
    except ValueError as exc:
        raise ConfigError("--model", str(exc))


def _phantom(name, dim):
    try:
        ph = resolve_phantom(name)
    except ValueError as exc:
        raise ConfigError("--phantom", str(exc))
    if dim is not None and ph.dim != dim:
        raise ConfigError("--phantom", f"{name!r} is {ph.dim}-D but --dim is {dim}")
    return ph


def _filter(text):
    try:
        spec = FilterSpec.parse(text)
    except ValueError as exc:
        raise ConfigError("--filter", str(exc))
    if spec.kind == "chain" and (not spec.widths or any(not 0 < w < 1 for w in spec.widths)):
        raise ConfigError("--filter", "chain widths must lie in (0, 1)")
    return spec


def _positive(flag, value, lo=1):
    if value < lo:
        raise ConfigError(flag, f"must be >= {lo}, got {value}")
    return value


def _width_grid(args, spec: FilterSpec, n: int):
    """Explicit --h/--h1/--h2 lists, else the default geometric grids."""
    if spec.kind == "two-scale":
        h1s = _float_list("--h1", args.h1) if args.h1 else None
        h2s = _float_list("--h2", args.h2) if args.h2 else None
        grid = two_scale_grid(n, h1s, h2s)
        if not grid:
            raise ConfigError("--h1", f"no admissible (h1, h2) pair at n={n}")
        return grid
    if spec.kind in ("linear", "median"):
        if args.h:
            hs = _float_list("--h", args.h)
            if any(h < 1 / n for h in hs):
                raise ConfigError("--h", f"widths must be >= 1/n = {1 / n:g}")
            return hs
        return h_grid(n)
    raise ConfigError("--filter", f"{spec.label} has no width to sweep")


def _dump(args) -> str | None:
    if not args.dump_config:
        return None
    # output locations and the thread count do not change results
    skip = {"func", "dump_config", "out", "fit_out", "svg", "threads"}
    parts = [args.command] + [f"--{k.replace('_', '-')}={v}" for k, v in sorted(vars(args).items())
                              if k not in skip and k != "command" and v is not None]
    return " ".join(parts)


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _svg(path, draw: Callable):
    import matplotlib
    matplotlib.use("svg")
    import matplotlib.pyplot as plt
    plt.rcParams["svg.hashsalt"] = "medlab"
    fig, ax = plt.subplots(figsize=(6, 4))
    draw(ax)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)


# -- subcommands ------------------------------------------------------------

def cmd_rates(args):
    spec = _filter(args.filter)
    ph = _phantom(args.phantom, args.dim)
    model = _model(args.model)
    sigma = parse_sigma(args.sigma)
    ladder = _int_list("--n", args.n, lo=4)
    reps = _positive("--reps", args.reps, 2)
    if len(ladder) < 3:
        raise ConfigError("--n", "a rate fit needs at least three grid sizes")
    for n in ladder:
        _width_grid(args, spec, n)
    reports, fit = rate_experiment(spec.label, ph, model, sigma, ladder, reps, args.seed, args.threads,
                                   grid_fn=lambda n: _width_grid(args, spec, n))
    _write(args.out, risk_csv(reports, _dump(args)))
    if args.fit_out:
        _write(args.fit_out, rate_csv([(f"rates-{spec.label}", fit)]))
    if args.svg:
        def draw(ax):
            ns = [r.n for r in reports]
            ax.loglog(ns, [r.best().mse for r in reports], "o-", label="min risk")
            ax.loglog(ns, [math.exp(fit.intercept) * n ** fit.slope for n in ns], "--",
                      label=f"slope {fit.slope:.3f}")
            ax.set_xlabel("n")
            ax.set_ylabel("risk")
            ax.legend()
        _svg(args.svg, draw)
    print(f"slope={fit.slope:.4f} intercept={fit.intercept:.4f} r2={fit.r_squared:.4f}")


def cmd_sweep(args):
    spec = _filter(args.filter)
    ph = _phantom(args.phantom, args.dim)
    model = _model(args.model)
    sigma = parse_sigma(args.sigma)
    n = _positive("--n", args.n, 4)
    reps = _positive("--reps", args.reps, 2)
    grid = _width_grid(args, spec, n)
    rep = sweep_h(spec, ph, model, sigma(n), n, grid, reps, args.seed, args.threads)
    _write(args.out, risk_csv([rep], _dump(args)))
    if args.svg:
        def draw(ax):
            if spec.kind == "two-scale":
                for h2 in sorted({r.h2 for r in rep.records}):
                    rs = [r for r in rep.records if r.h2 == h2]
                    ax.loglog([r.h1 for r in rs], [r.mse for r in rs], ".-", label=f"h2={h2:.3g}")
                ax.set_xlabel("h1 (fraction of unit side)")
            else:
                ax.loglog([r.h1 for r in rep.records], [r.mse for r in rep.records], "o-")
                ax.set_xlabel("h (fraction of unit side)")
            ax.set_ylabel("risk")
        _svg(args.svg, draw)
    best = rep.best()
    print(f"argmin={rep.argmin} min_risk={best.mse:.6g} se={best.mse_se:.2g}")


def cmd_profile(args):
    spec = _filter(args.filter)
    ph = _phantom(args.phantom, args.dim)
    model = _model(args.model)
    sigma = parse_sigma(args.sigma)
    n = _positive("--n", args.n, 4)
    reps = _positive("--reps", args.reps, 2)
    if spec.kind == "two-scale":
        if not (args.h1 and args.h2):
            raise ConfigError("--h1", "the two-scale profile needs --h1 and --h2")
        spec = spec.with_widths(_float_list("--h1", args.h1)[0], _float_list("--h2", args.h2)[0])
    elif spec.kind in ("linear", "median"):
        if not args.h:
            raise ConfigError("--h", "the profile needs a single width --h")
        spec = spec.with_widths(_float_list("--h", args.h)[0])
    prof = bias_profile(spec, ph, model, sigma(n), n, reps, args.seed, args.threads)
    buf = io.StringIO()
    dump = _dump(args)
    if dump:
        buf.write(f"# {dump}\n")
    w = csv.writer(buf, lineterminator="\n")
    if ph.dim == 1:
        w.writerow(["i", "mean", "stderr", "truth"])
        for i in range(n):
            w.writerow([i + 1, repr(float(prof.mean[i])), repr(float(prof.stderr[i])), repr(float(prof.truth[i]))])
    else:
        w.writerow(["i", "j", "mean", "stderr", "truth"])
        for (a, b), v in np.ndenumerate(prof.mean):
            w.writerow([a + 1, b + 1, repr(float(v)), repr(float(prof.stderr[a, b])), repr(float(prof.truth[a, b]))])
    _write(args.out, buf.getvalue())
    if args.svg and ph.dim == 1:
        def draw(ax):
            i = np.arange(1, n + 1)
            ax.plot(i, prof.truth, "k-", lw=1, label="f")
            ax.plot(i, prof.mean, "-", label=f"E[{spec.label}]")
            ax.set_xlabel("grid index i")
            ax.legend()
        _svg(args.svg, draw)
    worst = float(np.max(np.abs(prof.mean - prof.truth)))
    print(f"max_abs_bias={worst:.6g}")


def cmd_crossover(args):
    ph = _phantom(args.phantom, args.dim)
    model = _model(args.model)
    sigma = parse_sigma(args.sigma)
    ladder = _int_list("--n", args.n, lo=4)
    reps = _positive("--reps", args.reps, 2)
    res = crossover_experiment(ladder, sigma, model, ph, reps, args.seed, args.threads)
    buf = io.StringIO()
    dump = _dump(args)
    if dump:
        buf.write(f"# {dump}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "sigma", "linear", "linear_se", "median", "median_se", "ratio", "ratio_se",
                "h_linear", "h_median", "regime_warning"])
    for r in res.rows:
        w.writerow([r.n, repr(r.sigma), repr(r.linear), repr(r.linear_se), repr(r.median), repr(r.median_se),
                    repr(r.ratio), repr(r.ratio_se), repr(r.h_linear), repr(r.h_median), int(res.regime_warning)])
    _write(args.out, buf.getvalue())
    if args.svg:
        def draw(ax):
            ax.semilogx([r.n for r in res.rows], [r.ratio for r in res.rows], "o-")
            ax.set_xlabel("n")
            ax.set_ylabel("median risk / linear risk")
        _svg(args.svg, draw)
    if res.regime_warning:
        print("warning: sigma_n * n does not grow across the ladder", file=sys.stderr)
    print("ratios=" + ",".join(f"{r.ratio:.4f}" for r in res.rows))


ORACLES = ("alpha", "nu", "median-moment", "quantile-moment", "contaminated-median", "contaminated-sample",
           "repeated-median-cdf", "beta-cdf")


def cmd_oracle(args):
    op = args.op
    if op in ("alpha", "nu"):
        zeta = math.inf if args.zeta in ("inf", "infinity") else float(args.zeta)
        try:
            if op == "alpha":
                print(repr(ms.alpha_of_zeta(zeta)))
            else:
                if args.sigma is None:
                    raise ConfigError("--sigma", "nu needs --sigma")
                print(repr(ms.nu_n(zeta, float(args.sigma))))
        except ValueError as exc:
            raise ConfigError("--zeta", str(exc))
        return
    model = _model(args.model)
    if op == "median-moment":
        try:
            est = ms.median_second_moment_mc(model, args.m, _positive("--reps", args.reps, 2), args.seed)
        except ValueError as exc:
            raise ConfigError("--m", str(exc))
        print(f"{args.m},{est.csv()},{repr(args.m * est.estimate)}")
    elif op == "quantile-moment":
        try:
            est, ratio = ms.quantile_second_moment_mc(model, args.m, args.p, _positive("--reps", args.reps, 2),
                                                      args.seed)
        except ValueError as exc:
            raise ConfigError("--p", str(exc))
        print(f"{args.m},{args.p!r},{est.csv()},{ratio!r}")
    elif op == "contaminated-median":
        try:
            mu = population_contaminated_median(args.eps, args.delta, model)
        except ValueError as exc:
            raise ConfigError("--eps", str(exc))
        print(f"{args.eps!r},{args.delta!r},{mu!r}")
    elif op == "contaminated-sample":
        reps = _positive("--reps", args.reps, 1)
        try:
            draws = contaminated_median_sample(args.n_good, args.m_bad, args.delta, model, args.seed, size=reps)
        except ValueError as exc:
            raise ConfigError("--m-bad", str(exc))
        draws = np.atleast_1d(draws)
        print(f"{float(np.mean(draws))!r},{float(np.std(draws, ddof=1) / math.sqrt(len(draws))) if len(draws) > 1 else 0.0!r},{reps},{args.seed}")
    elif op == "repeated-median-cdf":
        print(f"{args.m},{args.x!r},{ms.repeated_median_cdf(model, args.m, args.x)!r}")
    elif op == "beta-cdf":
        print(f"{args.m},{args.x!r},{ms.beta_composition_cdf(args.m, args.x)!r}")


def cmd_denoise(args):
    spec = _filter(args.filter)
    try:
        sample = GridSample.load(args.input)
    except (OSError, ValueError) as exc:
        raise ConfigError("--in", str(exc))
    if spec.kind == "two-scale":
        if not (args.h1 and args.h2):
            raise ConfigError("--h1", "two-scale needs --h1 and --h2")
        h1, h2 = float(args.h1), float(args.h2)
        if not 0 < h1 < h2 < 1:
            raise ConfigError("--h1", f"need 0 < h1 < h2 < 1, got {h1}, {h2}")
        try:
            out = two_scale_median(sample, h1, h2)
        except ValueError as exc:
            raise ConfigError("--h1", str(exc))
    elif spec.kind == "chain":
        out = iterated_median(sample, list(spec.widths))
    elif spec.kind in ("linear", "median"):
        if not args.h:
            raise ConfigError("--h", f"{spec.kind} needs --h")
        h = _float_list("--h", args.h)[0]
        out = (linear_filter if spec.kind == "linear" else median_filter)(sample, h)
    else:
        out = sample
    _write(args.out, out.to_csv())
    print(f"wrote {'stdout' if args.out in (None, '-') else args.out} dim={out.dim} n={out.n}")


# -- parser -----------------------------------------------------------------

def _common(p, sweep=True):
    p.add_argument("--phantom", default="step",
                   help="test function: step | disc | square[:side] | random1d:<seed> | random2d:<seed>")
    p.add_argument("--dim", type=int, choices=(1, 2), default=None,
                   help="grid dimension; checked against the phantom (default: the phantom's)")
    p.add_argument("--model", default="gaussian", help="noise law: gaussian | laplace | cauchy | uniform")
    p.add_argument("--sigma", default="1",
                   help="noise level (same units as the signal), or a schedule c*n^p such as n^-1/4")
    p.add_argument("--reps", type=int, default=200, help="Monte Carlo replicates (count)")
    p.add_argument("--seed", type=int, default=7, help="experiment seed (integer)")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (count; default: available cores); output does not depend on it")
    p.add_argument("--out", default=None, help="output CSV path (default: stdout)")
    p.add_argument("--svg", default=None, help="optional SVG plot path")
    p.add_argument("--dump-config", action="store_true", help="echo the resolved flags as a comment atop the CSV")
    if sweep:
        p.add_argument("--filter", default="median",
                       help="linear | median | two-scale | chain:<w1,w2,...> (widths as fractions of the unit side)")
        p.add_argument("--h", default=None,
                       help="window width(s) as fractions of the unit side, comma-separated (default: sqrt(2) grid from 1/n to 1/4)")
        p.add_argument("--h1", default=None, help="two-scale block width(s), fraction of the unit side")
        p.add_argument("--h2", default=None, help="two-scale coarse-median width(s), fraction of the unit side")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="medlab", description="Running-median and box-filter risk laboratory.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("rates", help="min-over-width risk across a ladder of grid sizes, with a log-log fit")
    _common(p)
    p.add_argument("--n", default="512,1024,2048,4096,8192", help="grid sizes per side (comma-separated count)")
    p.add_argument("--fit-out", default=None, help="optional rate-fit CSV path")
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("sweep", help="risk at every width of a grid, at one grid size")
    _common(p)
    p.add_argument("--n", type=int, default=1024, help="grid size per side (count)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("profile", help="pointwise mean of a filter output (bias profile)")
    _common(p)
    p.add_argument("--n", type=int, default=512, help="grid size per side (count)")
    p.set_defaults(func=cmd_profile, reps=10000)

    p = sub.add_parser("crossover", help="best median/linear risk ratio under a noise schedule")
    _common(p, sweep=False)
    p.add_argument("--n", default="512,1024,2048,4096,8192", help="grid sizes per side (comma-separated count)")
    p.set_defaults(func=cmd_crossover, sigma="n^-1/4")

    p = sub.add_parser("oracle", help="closed forms and Monte Carlo oracles for median statistics")
    p.add_argument("op", choices=ORACLES, help="quantity to compute")
    p.add_argument("--zeta", default="inf", help="tail index (real > 1, or inf)")
    p.add_argument("--sigma", default=None, help="noise level for nu (real > 0)")
    p.add_argument("--model", default="gaussian", help="noise law: gaussian | laplace | cauchy | uniform")
    p.add_argument("--m", type=int, default=101, help="sample size (count); order m of the repeated median")
    p.add_argument("--p", type=float, default=0.5, help="quantile level in (0, 1)")
    p.add_argument("--reps", type=int, default=10000, help="Monte Carlo replicates (count)")
    p.add_argument("--seed", type=int, default=7, help="seed (integer)")
    p.add_argument("--eps", type=float, default=0.2, help="contamination fraction in [0, 1/2)")
    p.add_argument("--delta", type=float, default=5.0, help="contamination shift (signal units)")
    p.add_argument("--n-good", type=int, default=80, help="clean sample size (count)")
    p.add_argument("--m-bad", type=int, default=20, help="contaminated sample size (count)")
    p.add_argument("--x", type=float, default=0.0, help="evaluation point (noise units, or probability for beta-cdf)")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("denoise", help="filter a grid sample file")
    p.add_argument("--in", dest="input", required=True, help="input grid CSV")
    p.add_argument("--out", default=None, help="output grid CSV (default: stdout)")
    p.add_argument("--filter", default="median",
                   help="identity | linear | median | two-scale | chain:<w1,w2,...> (widths as fractions of the unit side)")
    p.add_argument("--h", default=None, help="window width, fraction of the unit side")
    p.add_argument("--h1", default=None, help="two-scale block width, fraction of the unit side")
    p.add_argument("--h2", default=None, help="two-scale coarse-median width, fraction of the unit side")
    p.set_defaults(func=cmd_denoise)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "threads", None) is not None and args.threads < 1:
        print(f"medlab: error: --threads: must be >= 1, got {args.threads}", file=sys.stderr)
        return 2
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"medlab: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        print(f"medlab: runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
