"""Linear multivariate Hawkes processes with excitation and inhibition."""

from ._core import (
    fisher_exact,
    fit_two_phase,
    generate_synthetic_problem,
    h_dag,
    simulate,
    surrogate_loglik,
    threshold_to_dag,
)

__all__ = [
    "fisher_exact",
    "fit_two_phase",
    "generate_synthetic_problem",
    "h_dag",
    "simulate",
    "surrogate_loglik",
    "threshold_to_dag",
]
