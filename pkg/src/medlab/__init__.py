"""Running medians versus box filters on noisy piecewise-smooth signals."""
from .filters import iterated_median, linear_filter, median_filter, two_scale_median
from .grid import GridSample, add_noise, grid_points, sample_phantom, window_indices
from .median_stats import alpha_of_zeta, nu_n
from .noise import get_model
from .phantoms import canonical_disc, canonical_step, resolve_phantom
from .risk import FilterSpec, estimate_risk, rate_experiment, sweep_h

__all__ = [
    "GridSample", "FilterSpec", "add_noise", "alpha_of_zeta", "canonical_disc", "canonical_step",
    "estimate_risk", "get_model", "grid_points", "iterated_median", "linear_filter", "median_filter",
    "nu_n", "rate_experiment", "resolve_phantom", "sample_phantom", "sweep_h", "two_scale_median",
    "window_indices",
]
