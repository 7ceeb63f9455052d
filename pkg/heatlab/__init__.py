"""
Spectral heat content of subordinate and killed Brownian motions on an interval.

Modules:
- specfun: closed-form constants and special-function helpers
- subordinator: one-sided stable law (sampling, density, cdf)
- paths: skeleton simulation and Brownian-bridge extrema
- supremum: supremum tails by closed form, quadrature and Monte Carlo
- heatcontent: heat content by eigenvalue series, reduction identity and Monte Carlo
- asymptotics: small-time expansions, residuals and coefficient fits
"""

from .state import (
    HeatLabError, DomainError, SeriesDivergenceError, TailDomainError,
    IllConditionedFitError, MetadataMismatchError, UnsupportedRegimeError,
    StableIndex, Interval, ProcessKind, Provenance, HeatCurve, Expansion, FitResult
)

__version__ = "1.0.0"

__all__ = [
    # Errors
    'HeatLabError', 'DomainError', 'SeriesDivergenceError', 'TailDomainError',
    'IllConditionedFitError', 'MetadataMismatchError', 'UnsupportedRegimeError',

    # Models
    'StableIndex', 'Interval', 'ProcessKind', 'Provenance', 'HeatCurve', 'Expansion', 'FitResult'
]
