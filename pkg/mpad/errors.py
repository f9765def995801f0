"""Exception hierarchy. Every error derives from MpadError and, where one fits, the builtin."""

from __future__ import annotations


class MpadError(Exception):
    pass


class ConfigError(MpadError, ValueError):
    pass


class ParamError(MpadError, ValueError):
    pass


class DimensionMismatch(MpadError, ValueError):
    pass


class WindowIndexError(MpadError, IndexError):
    pass


class EntropyError(MpadError, OSError):
    pass


class FormatError(MpadError, ValueError):
    pass


class ChecksumError(FormatError):
    """CRC mismatch. Signals corruption; it is not an authenticity check."""


class HeaderMismatch(MpadError, ValueError):
    pass


class BudgetExhausted(MpadError):
    pass


class UnknownPair(MpadError, KeyError):
    pass


class UnknownDevice(MpadError, KeyError):
    pass


class ReserveExhausted(MpadError):
    pass


class SearchBudgetExceeded(MpadError):
    pass


class EstimatorRefused(MpadError):
    pass


class ScenarioError(MpadError):
    def __init__(self, line_no: int, message: str) -> None:
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no
