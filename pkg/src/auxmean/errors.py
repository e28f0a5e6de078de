"""Exception types shared across the package."""


class AuxMeanError(Exception):
    """Base class for all package errors."""


class InvalidDesign(AuxMeanError, ValueError):
    """Sample size incompatible with the population size."""


class DegenerateVariance(AuxMeanError, ValueError):
    """A variable has zero variance, so correlation is undefined."""


class TooManySamples(AuxMeanError, ValueError):
    """Full enumeration would exceed the configured cap."""


class DivisorNearZero(AuxMeanError, ZeroDivisionError):
    """An estimator denominator is numerically zero for this sample."""


class EtaUndefined(DivisorNearZero):
    """X̄ + ρ is zero."""


class ZeroMse(AuxMeanError, ZeroDivisionError):
    """PRE requested against an estimator with zero MSE."""


class TargetInfeasible(AuxMeanError, ValueError):
    """A synthetic population matching the target moments could not be built."""


class ParseError(AuxMeanError, ValueError):
    """Population file violates the CSV contract."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class EmptyPopulation(AuxMeanError, ValueError):
    """Population file has no data rows."""


class ConfigError(AuxMeanError, ValueError):
    """One or more run-configuration fields are invalid."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(f"{k}: {v}" for k, v in self.problems))

    @property
    def fields(self):
        return [k for k, _ in self.problems]
