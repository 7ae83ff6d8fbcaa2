"""Monte Carlo risk estimation, width sweeps, rate fits and the low-noise crossover.

Replicate ``r`` of an experiment with seed ``s`` draws its noise from
``SeedSequence(s, spawn_key=(r,))``, so results do not depend on how
replicates are scheduled. Within one sweep every width sees the same noise.
"""
from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import filters
from .grid import disc_half_widths, grid_points, grid_radius
from .phantoms import block_centred_step

CHUNK = 8
RISK_COLUMNS = ["experiment", "filter", "phantom", "model", "dim", "n", "sigma", "h1", "h2",
                "reps", "seed", "mse", "mse_se", "bias_sq", "var"]
RATE_COLUMNS = ["experiment", "slope", "intercept", "r2"]


@dataclass(frozen=True)
class FilterSpec:
    kind: str
    h: float | None = None
    h2: float | None = None
    widths: tuple = ()

    KINDS = ("identity", "linear", "median", "two-scale", "chain")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown filter {self.kind!r}; choose from {', '.join(self.KINDS)}")
        if self.kind in ("linear", "median") and self.h is not None and not 0 < self.h < 1:
            raise ValueError(f"h must lie in (0, 1), got {self.h}")
        if self.kind == "two-scale" and self.h is not None and self.h2 is not None:
            if not 0 < self.h < self.h2 < 1:
                raise ValueError(f"need 0 < h1 < h2 < 1, got {self.h}, {self.h2}")

    @classmethod
    def parse(cls, text: str) -> FilterSpec:
        if text.startswith("chain:"):
            widths = tuple(float(w) for w in text[6:].split(",") if w.strip())
            return cls("chain", widths=widths)
        return cls(text)

    def with_widths(self, h, h2=None) -> FilterSpec:
        return replace(self, h=h, h2=h2)

    @property
    def label(self) -> str:
        if self.kind == "chain":
            return "chain:" + ",".join(f"{w:g}" for w in self.widths)
        return self.kind

    def apply(self, values: np.ndarray, n: int) -> np.ndarray:
        if self.kind == "identity":
            return values.copy()
        if self.kind == "linear":
            return filters.box_mean(values, n, self.h)
        if self.kind == "median":
            return filters.running_median(values, n, self.h)
        if self.kind == "two-scale":
            return filters.two_scale_median(values, self.h, self.h2)
        return filters.iterated_median(values, list(self.widths))

    def cache_key(self, n: int, dim: int):
        """Configurations with equal keys produce identical outputs."""
        if self.kind in ("linear", "median"):
            return (self.kind, _window_key(n, dim, self.h))
        if self.kind == "two-scale":
            spec = filters.TwoScaleSpec(n, self.h, self.h2)
            return (self.kind, spec.block, _window_key(spec.n_coarse, dim, self.h2))
        if self.kind == "chain":
            return (self.kind, tuple(_window_key(n, dim, w) for w in self.widths))
        return (self.kind,)


def _window_key(n, dim, h):
    return grid_radius(n, h) if dim == 1 else tuple(disc_half_widths(n * h))


def h_grid(n: int, lo: float | None = None, hi: float = 0.25, ratio: float = math.sqrt(2)) -> list[float]:
    """Geometric widths lo, lo*ratio, ... up to hi (default lo = 1/n)."""
    lo = 1.0 / n if lo is None else lo
    out = []
    k = 0
    while True:
        if ratio == math.sqrt(2):
            h = lo * 2 ** (k // 2) * (math.sqrt(2) if k % 2 else 1.0)
        else:
            h = lo * ratio ** k
        if h > hi * (1 + 1e-12):
            break
        out.append(h)
        k += 1
    return out


def two_scale_grid(n: int, h1s: Sequence[float] | None = None, h2s: Sequence[float] | None = None) -> list[tuple]:
    """All (h1, h2) from the geometric grids with h1 < h2 and at least 3 coarse cells."""
    h1s = h_grid(n) if h1s is None else h1s
    h2s = h_grid(n) if h2s is None else h2s
    pairs = []
    for h1 in h1s:
        for h2 in h2s:
            if h1 < h2:
                try:
                    filters.TwoScaleSpec(n, h1, h2)
                except ValueError:
                    continue
                pairs.append((h1, h2))
    return pairs


@dataclass(frozen=True)
class RiskRecord:
    h1: float | None
    h2: float | None
    mse: float
    mse_se: float
    bias_sq: float
    bias_sq_se: float
    var: float
    var_se: float
    phantom: str = ""

    @property
    def h(self):
        return self.h1

    @property
    def combined_se(self) -> float:
        return self.mse_se + self.bias_sq_se + self.var_se


@dataclass
class RiskReport:
    filter: str
    phantom: str
    model: str
    dim: int
    n: int
    sigma: float
    reps: int
    seed: int
    records: list = field(default_factory=list)
    experiment: str = "sweep"

    def __post_init__(self):
        self.records.sort(key=lambda r: (r.h1 if r.h1 is not None else -1.0, r.h2 if r.h2 is not None else -1.0))

    def best(self) -> RiskRecord:
        return min(self.records, key=lambda r: r.mse)

    @property
    def argmin(self):
        b = self.best()
        return b.h1 if b.h2 is None else (b.h1, b.h2)

    def rows(self):
        for r in self.records:
            yield [self.experiment, self.filter, self.phantom, self.model, self.dim, self.n,
                   repr(float(self.sigma)), _fmt(r.h1), _fmt(r.h2), self.reps, self.seed,
                   repr(r.mse), repr(r.mse_se), repr(r.bias_sq), repr(r.var)]


def _fmt(x):
    return "" if x is None else repr(float(x))


@dataclass
class _Acc:
    """Running sums of filter outputs on their native grid, plus per-replicate MSE.

    Two-scale outputs are constant on coarse cells, so they are accumulated
    on the coarse grid and expanded when the record is built.
    """

    sum_t: np.ndarray
    sum_t2: np.ndarray
    mse: list
    cells: filters.TwoScaleSpec | None = None

    @classmethod
    def empty(cls, shape, cells=None):
        return cls(np.zeros(shape), np.zeros(shape), [], cells)

    def add(self, out, mse):
        self.sum_t += out
        self.sum_t2 += out * out
        self.mse.append(mse)

    def merge(self, other):
        self.sum_t += other.sum_t
        self.sum_t2 += other.sum_t2
        self.mse.extend(other.mse)

    def fine(self, arr):
        return arr if self.cells is None else filters.upsample(arr, self.cells)


def replicate_rng(seed: int, rep: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(rep,)))


def _default_threads():
    return os.cpu_count() or 1


@dataclass
class _CellSums:
    """Per-cell count, sum and sum of squares of the truth, for coarse-grid MSEs."""

    count: np.ndarray
    f1: np.ndarray
    f2: np.ndarray

    @classmethod
    def build(cls, clean, ts):
        cell = ts.cell_of()
        n1 = ts.n_coarse
        if clean.ndim == 1:
            ids = cell
        else:
            ids = (cell[:, None] * n1 + cell[None, :]).ravel()
        shape = (n1,) * clean.ndim
        flat = clean.ravel()
        cnt = np.bincount(ids, minlength=n1 ** clean.ndim).reshape(shape)
        f1 = np.bincount(ids, weights=flat, minlength=n1 ** clean.ndim).reshape(shape)
        f2 = np.bincount(ids, weights=flat * flat, minlength=n1 ** clean.ndim).reshape(shape)
        return cls(cnt, f1, f2)

    def mse(self, coarse, total):
        return float(np.sum(self.count * coarse * coarse - 2 * coarse * self.f1 + self.f2) / total)


def _simulate(configs, truths, model, sigma, n, dim, reps, seed, threads):
    """Accumulate outputs of each (FilterSpec, truth key) over replicates.

    ``truths`` maps truth keys to clean arrays; ``configs`` is a list of
    (FilterSpec, truth_key). Returns one _Acc per config, in order.
    """
    shape = (n,) * dim
    total_pts = n ** dim
    keys = [(spec.cache_key(n, dim), tk) for spec, tk in configs]
    unique = list(dict.fromkeys(keys))
    rep_spec = {k: configs[keys.index(k)][0] for k in unique}

    plans = {}
    for tk in truths:
        plan = {"median": [], "other": [], "two": {}}
        for key in unique:
            if key[1] != tk:
                continue
            spec = rep_spec[key]
            if spec.kind == "median":
                plan["median"].append((key, spec.h))
            elif spec.kind == "two-scale":
                ts = filters.TwoScaleSpec(n, spec.h, spec.h2)
                plan["two"].setdefault(ts.block, []).append((key, spec.h2, ts))
            else:
                plan["other"].append((key, spec))
        plans[tk] = plan
    cell_sums = {}
    for tk, plan in plans.items():
        for b, items in plan["two"].items():
            cell_sums[(tk, b)] = _CellSums.build(truths[tk], items[0][2])

    def new_accs():
        accs = {}
        for tk, plan in plans.items():
            for key, _ in plan["median"] + plan["other"]:
                accs[key] = _Acc.empty(shape)
            for items in plan["two"].values():
                for key, _, ts in items:
                    accs[key] = _Acc.empty((ts.n_coarse,) * dim, ts)
        return accs

    def run_chunk(start):
        accs = new_accs()
        for rep in range(start, min(start + CHUNK, reps)):
            z = model.sample(replicate_rng(seed, rep), shape) if sigma > 0 else np.zeros(shape)
            for tk, clean in truths.items():
                plan = plans[tk]
                y = clean + sigma * z
                for key, spec in plan["other"]:
                    out = spec.apply(y, n)
                    accs[key].add(out, float(np.mean((out - clean) ** 2)))
                if plan["median"]:
                    outs = filters.running_medians(y, n, [h for _, h in plan["median"]])
                    for (key, _), out in zip(plan["median"], outs):
                        accs[key].add(out, float(np.mean((out - clean) ** 2)))
                for b, items in plan["two"].items():
                    ts0 = items[0][2]
                    coarse = filters.block_medians(y, ts0)
                    outs = filters.running_medians(coarse, ts0.n_coarse, [h2 for _, h2, _ in items])
                    sums = cell_sums[(tk, b)]
                    for (key, _, _), out in zip(items, outs):
                        accs[key].add(out, sums.mse(out, total_pts))
        return accs

    starts = list(range(0, reps, CHUNK))
    total = new_accs()
    threads = threads or _default_threads()
    if threads <= 1:
        for s in starts:
            part = run_chunk(s)
            for k in unique:
                total[k].merge(part[k])
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for w in range(0, len(starts), threads):
                for part in pool.map(run_chunk, starts[w:w + threads]):
                    for k in unique:
                        total[k].merge(part[k])
    return [total[k] for k in keys]


def _moments(acc: _Acc, reps: int, truth: np.ndarray):
    """Pointwise mean error and replicate variance on the fine grid."""
    mean_t = acc.sum_t / reps
    if reps > 1:
        var_t = np.maximum(acc.sum_t2 - reps * mean_t ** 2, 0.0) / (reps - 1)
    else:
        var_t = np.zeros_like(mean_t)
    return acc.fine(mean_t) - truth, acc.fine(var_t)


def _record(acc: _Acc, reps: int, truth, h1, h2, phantom="") -> RiskRecord:
    mse_rep = np.asarray(acc.mse)
    mse = float(mse_rep.mean())
    mse_se = float(mse_rep.std(ddof=1) / math.sqrt(reps)) if reps > 1 else math.inf
    mean_e, var_i = _moments(acc, reps, truth)
    bias_sq = float(np.mean(mean_e ** 2))
    var = float(np.mean(var_i))
    s_i = np.sqrt(var_i / reps)
    # delta-method error of the plug-in squared bias, including its upward bias var_i/reps
    bias_sq_se = float(np.mean(2 * np.abs(mean_e) * s_i + s_i ** 2))
    var_se = var * math.sqrt(2.0 / (reps - 1)) if reps > 1 else math.inf
    return RiskRecord(h1, h2, mse, mse_se, bias_sq, bias_sq_se, var, var_se, phantom)


def _truth(phantom, n):
    return np.asarray(phantom(grid_points(n, phantom.dim)), dtype=np.float64)


def estimate_risk(spec: FilterSpec, phantom, model, sigma: float, n: int, reps: int, seed: int,
                  threads: int | None = None) -> RiskRecord:
    """Monte Carlo estimate of the grid-averaged MSE of one filter configuration."""
    if reps < 2:
        raise ValueError("need at least two replicates")
    truth = _truth(phantom, n)
    acc, = _simulate([(spec, 0)], {0: truth}, model, sigma, n, phantom.dim, reps, seed, threads)
    h2 = spec.h2 if spec.kind == "two-scale" else None
    return _record(acc, reps, truth, spec.h, h2, phantom.name)


def _family(phantom, spec: FilterSpec, n: int, worst_case: bool):
    """Phantoms over which the worst-case risk of ``spec`` is taken.

    For the two-scale filter on the step, the jump location relative to the
    block grid matters; the block-centred step is added as the least
    favourable member.
    """
    fam = [phantom]
    if worst_case and spec.kind == "two-scale" and phantom.dim == 1 and phantom.name == "step":
        fam.append(block_centred_step(n, filters.TwoScaleSpec(n, spec.h, spec.h2).block))
    return fam


def sweep_h(kind: str | FilterSpec, phantom, model, sigma: float, n: int, grid, reps: int, seed: int,
            threads: int | None = None, worst_case: bool = True, experiment: str = "sweep") -> RiskReport:
    """Risk at every width in ``grid`` (pairs (h1, h2) for the two-scale filter).

    Each record reports the maximum risk over the phantom family (see
    ``_family``); with ``worst_case=False`` only ``phantom`` is used.
    """
    base = kind if isinstance(kind, FilterSpec) else FilterSpec.parse(kind)
    if not grid:
        raise ValueError("empty width grid")
    if reps < 2:
        raise ValueError("need at least two replicates")
    configs, truths, meta = [], {}, []
    for g in grid:
        spec = base.with_widths(*g) if base.kind == "two-scale" else base.with_widths(g)
        if base.kind in ("linear", "median") and g < 1.0 / n * (1 - 1e-12):
            raise ValueError(f"width {g} below 1/n")
        for ph in _family(phantom, spec, n, worst_case):
            if ph.name not in truths:
                truths[ph.name] = _truth(ph, n)
            configs.append((spec, ph.name))
            meta.append((g, ph.name))
    accs = _simulate(configs, truths, model, sigma, n, phantom.dim, reps, seed, threads)
    best = {}
    for (g, name), acc in zip(meta, accs):
        h1, h2 = (g if base.kind == "two-scale" else (g, None))
        rec = _record(acc, reps, truths[name], h1, h2, name)
        if g not in best or rec.mse > best[g].mse:
            best[g] = rec
    return RiskReport(base.label, phantom.name, model.name, phantom.dim, n, sigma, reps, seed,
                      list(best.values()), experiment)


@dataclass(frozen=True)
class RateFit:
    points: tuple
    slope: float
    intercept: float
    r_squared: float


def rate_fit(points) -> RateFit:
    """Least-squares fit of log(risk) against log(n)."""
    pts = tuple((float(a), float(b)) for a, b in points)
    if len(pts) < 3:
        raise ValueError("need at least three points")
    if any(b <= 0 for _, b in pts) or any(a <= 0 for a, _ in pts):
        raise ValueError("n and risk must be positive")
    x = np.log([a for a, _ in pts])
    y = np.log([b for _, b in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return RateFit(pts, float(slope), float(intercept), r2)


def default_grid(kind: str, n: int):
    return two_scale_grid(n) if kind == "two-scale" else h_grid(n)


def rate_experiment(kind: str, phantom, model, sigma, ladder, reps: int, seed: int,
                    threads: int | None = None, grid_fn: Callable | None = None):
    """Sweep every n in the ladder and fit the decay of the minimal risk.

    ``sigma`` is a number or a function of n. Returns (reports, fit).
    """
    reports = []
    for n in ladder:
        s = sigma(n) if callable(sigma) else sigma
        grid = grid_fn(n) if grid_fn else default_grid(kind, n)
        reports.append(sweep_h(kind, phantom, model, s, n, grid, reps, seed, threads, experiment="rates"))
    fit = rate_fit([(r.n, r.best().mse) for r in reports])
    return reports, fit


@dataclass(frozen=True)
class Profile:
    mean: np.ndarray
    stderr: np.ndarray
    truth: np.ndarray


def bias_profile(spec: FilterSpec, phantom, model, sigma: float, n: int, reps: int, seed: int,
                 threads: int | None = None) -> Profile:
    """Pointwise Monte Carlo mean of the filter output with standard errors."""
    truth = _truth(phantom, n)
    acc, = _simulate([(spec, 0)], {0: truth}, model, sigma, n, phantom.dim, reps, seed, threads)
    mean_e, var_i = _moments(acc, reps, truth)
    return Profile(truth + mean_e, np.sqrt(var_i / reps), truth)


@dataclass(frozen=True)
class CrossoverRow:
    n: int
    sigma: float
    linear: float
    linear_se: float
    median: float
    median_se: float
    h_linear: float
    h_median: float

    @property
    def ratio(self) -> float:
        return self.median / self.linear

    @property
    def ratio_se(self) -> float:
        return self.ratio * math.hypot(self.median_se / self.median, self.linear_se / self.linear)


@dataclass
class CrossoverResult:
    rows: list
    regime_warning: bool
    reports: list = field(default_factory=list)


def crossover_experiment(ladder, sigma_schedule: Callable, model, phantom, reps: int, seed: int,
                         threads: int | None = None, grid_fn: Callable | None = None) -> CrossoverResult:
    """Best linear and median risks per n under a noise schedule sigma_n.

    ``regime_warning`` is set when sigma_n * n fails to grow across the ladder.
    """
    rows, reports = [], []
    for n in ladder:
        s = float(sigma_schedule(n))
        grid = grid_fn(n) if grid_fn else h_grid(n)
        lin = sweep_h("linear", phantom, model, s, n, grid, reps, seed, threads, experiment="crossover")
        med = sweep_h("median", phantom, model, s, n, grid, reps, seed, threads, experiment="crossover")
        bl, bm = lin.best(), med.best()
        rows.append(CrossoverRow(n, s, bl.mse, bl.mse_se, bm.mse, bm.mse_se, bl.h1, bm.h1))
        reports += [lin, med]
    first, last = ladder[0], ladder[-1]
    warn = not sigma_schedule(last) * last > sigma_schedule(first) * first
    return CrossoverResult(rows, warn, reports)


def risk_csv(reports, dump_config: str | None = None) -> str:
    buf = io.StringIO()
    if dump_config:
        buf.write(f"# {dump_config}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RISK_COLUMNS)
    for rep in reports:
        for row in rep.rows():
            w.writerow(row)
    return buf.getvalue()


def rate_csv(entries) -> str:
    """``entries``: iterable of (experiment, RateFit)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RATE_COLUMNS)
    for name, fit in entries:
        w.writerow([name, repr(fit.slope), repr(fit.intercept), repr(fit.r_squared)])
    return buf.getvalue()
