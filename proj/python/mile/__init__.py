"""Joint maximum-likelihood estimation over parameters and latent variables."""

try:
    from ._mile import (
        bootstrap_median_sd,
        digamma,
        fit,
        log_gamma,
        run_experiment,
        simulate,
        trigamma,
    )
except ImportError:  # in-tree build: extension module on sys.path directly
    from _mile import (
        bootstrap_median_sd,
        digamma,
        fit,
        log_gamma,
        run_experiment,
        simulate,
        trigamma,
    )

__all__ = [
    "bootstrap_median_sd",
    "digamma",
    "fit",
    "log_gamma",
    "run_experiment",
    "simulate",
    "trigamma",
]
