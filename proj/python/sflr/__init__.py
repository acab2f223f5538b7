"""Smoothing-spline regression and kriging prediction for lattice-sampled
functional data.

The heavy lifting lives in the compiled extension ``sflr._core``; this package
re-exports its operations under their public names.
"""

from ._core import (
    __version__,
    experiment_csv,
    fit,
    fit_gcv,
    krige_curve,
    kriging_weights,
    lattice,
    penalty_matrix,
    simulate,
    time_grid,
    trace_inequality,
)

__all__ = [
    "__version__",
    "experiment_csv",
    "fit",
    "fit_gcv",
    "krige_curve",
    "kriging_weights",
    "lattice",
    "penalty_matrix",
    "simulate",
    "time_grid",
    "trace_inequality",
]
