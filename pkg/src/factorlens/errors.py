"""Exception types raised across the package.

Every error carries enough context (file, row, field, factor, day) to be
actionable without a debugger; the service layer maps these onto HTTP codes.
"""
from __future__ import annotations


class FactorLensError(Exception):
    """Base class for all package errors."""


# ---------------------------------------------------------------------------
# Data loading / validation
# ---------------------------------------------------------------------------

class MissingColumnError(FactorLensError):
    def __init__(self, path: str, column: str):
        self.path, self.column = path, column
        super().__init__(f"{path}: missing required column '{column}'")


class DimensionMismatchError(FactorLensError):
    def __init__(self, path: str, detail: str):
        self.path = path
        super().__init__(f"{path}: dimension mismatch: {detail}")


class NonMonotoneDatesError(FactorLensError):
    def __init__(self, path: str, detail: str):
        self.path = path
        super().__init__(f"{path}: trading days not strictly increasing: {detail}")


class NonPositivePriceError(FactorLensError):
    def __init__(self, path: str, row: int, field: str, value: float):
        self.path, self.row, self.field, self.value = path, row, field, value
        super().__init__(f"{path} row {row}: {field} must be > 0, got {value!r}")


class UnknownStockError(FactorLensError):
    def __init__(self, stock_id: str, context: str = ""):
        self.stock_id = stock_id
        msg = f"unknown stock id '{stock_id}'"
        super().__init__(msg + (f" ({context})" if context else ""))


class UnknownDayError(FactorLensError):
    def __init__(self, day, context: str = ""):
        self.day = day
        msg = f"day {day} not in panel"
        super().__init__(msg + (f" ({context})" if context else ""))


class DateOutOfRangeError(FactorLensError):
    def __init__(self, portfolio_id: str, day):
        self.portfolio_id, self.day = portfolio_id, day
        super().__init__(f"portfolio {portfolio_id}: date {day} outside panel range")


class SpanTooShortError(FactorLensError):
    def __init__(self, portfolio_id: str, span: int, minimum: int):
        self.portfolio_id, self.span, self.minimum = portfolio_id, span, minimum
        super().__init__(
            f"portfolio {portfolio_id}: span of {span} days is below the minimum {minimum}"
        )


# ---------------------------------------------------------------------------
# Factor engine
# ---------------------------------------------------------------------------

class DegenerateFactorError(FactorLensError):
    def __init__(self, factor: str, day=None):
        self.factor, self.day = factor, day
        where = f" on {day}" if day is not None else ""
        super().__init__(f"factor '{factor}' has zero cross-sectional dispersion{where}")


class SingularDesignError(FactorLensError):
    def __init__(self, condition: float, columns: list[str], day=None):
        self.condition, self.columns, self.day = condition, columns, day
        where = f" on {day}" if day is not None else ""
        super().__init__(
            f"exposure design matrix is numerically singular{where} "
            f"(cond={condition:.3g}); collinear columns: {', '.join(columns)}"
        )


class EmptyPortfolioError(FactorLensError):
    def __init__(self, detail: str = "total stock value is 0"):
        super().__init__(detail)


# ---------------------------------------------------------------------------
# Analytics
# ---------------------------------------------------------------------------

class InvalidReturnError(FactorLensError):
    def __init__(self, index: int, value: float):
        self.index, self.value = index, value
        super().__init__(f"return at index {index} is {value!r}; must be > -1")


class MisalignedSeriesError(FactorLensError):
    def __init__(self, detail: str):
        super().__init__(f"series are not aligned: {detail}")


class EmptyRangeError(FactorLensError):
    def __init__(self, detail: str):
        super().__init__(detail)


class ZeroValueDayError(FactorLensError):
    def __init__(self, day):
        self.day = day
        super().__init__(f"portfolio value is 0 on {day}; returns undefined")


# ---------------------------------------------------------------------------
# Synthetic generator
# ---------------------------------------------------------------------------

class InfeasibleArchetypeError(FactorLensError):
    def __init__(self, archetype: int, worst_gap: float, tolerance: float):
        self.archetype, self.worst_gap, self.tolerance = archetype, worst_gap, tolerance
        super().__init__(
            f"archetype {archetype}: no stock selection reaches the target exposures "
            f"(worst per-factor gap {worst_gap:.3f} > tolerance {tolerance})"
        )


class ConfigError(FactorLensError):
    def __init__(self, detail: str):
        super().__init__(detail)


# ---------------------------------------------------------------------------
# Embedding
# ---------------------------------------------------------------------------

class EmptySelectionError(FactorLensError):
    def __init__(self, detail: str = "no portfolio overlaps the period by >= 20 days"):
        super().__init__(detail)


class DivergenceError(FactorLensError):
    def __init__(self, epoch: int, lr: float):
        self.epoch, self.lr = epoch, lr
        super().__init__(f"training loss became non-finite at epoch {epoch} (lr={lr})")


class UntrainedModelError(FactorLensError):
    def __init__(self):
        super().__init__("autoencoder parameters are untrained; call train_autoencoder first")


class PerplexityTooLargeError(FactorLensError):
    def __init__(self, perplexity: float, n: int):
        self.perplexity, self.n = perplexity, n
        super().__init__(
            f"perplexity {perplexity} too large for {n} points; need perplexity < (n-1)/3"
        )


class DegenerateInputError(FactorLensError):
    def __init__(self, detail: str = "all latent vectors are identical"):
        super().__init__(detail)
