"""Exception hierarchy shared across the package.

The CLI maps these onto distinct process exit codes, so keep the split
between ingestion, optimization and pricing failures intact.
"""


class ChaosRatesError(Exception):
    """Base class for all package errors."""


class SpecificationError(ChaosRatesError):
    """A model specification is invalid (missing coefficient functions,
    degenerate volatility structure, out-of-range decay rates, rejected
    parameter combinations)."""


class DomainError(ChaosRatesError):
    """A numeric argument is outside the operation's domain."""


class PricingError(ChaosRatesError):
    """A pricing or implied-volatility operation cannot be completed
    (no-arbitrage band violated, no root in the search bracket)."""


class IngestionError(ChaosRatesError):
    """Market data files are missing, malformed or internally inconsistent."""


class OptimizationFailure(ChaosRatesError):
    """Every restart of a multi-start optimization diverged."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


class UndefinedStatisticError(ChaosRatesError):
    """A test statistic is undefined for the given inputs (e.g. zero
    long-run variance of a loss differential)."""
