"""Exception hierarchy.

The CLI maps these onto exit codes: :class:`DataError` is a data problem
(exit 2), :class:`ModelError` a model or design problem (exit 3).
"""


class DiscoError(Exception):
    """Base class for all package errors."""


class DataError(DiscoError, ValueError):
    """Bad input values: non-finite numbers, malformed files, bad indices."""


class DomainError(DiscoError, ValueError):
    """A parameter lies outside the domain where the statistic is defined."""


class ModelError(DiscoError, ValueError):
    """The model formula or the experimental design cannot be analysed."""


class FormulaSyntaxError(ModelError):
    def __init__(self, message, text, position):
        self.text = text
        self.position = position
        super().__init__(f"{message} at position {position}: {text!r}")


class UnknownColumnError(ModelError):
    def __init__(self, column, available=()):
        self.column = column
        msg = f"unknown column {column!r}"
        if available:
            msg += f" (available: {', '.join(available)})"
        super().__init__(msg)


class DesignError(ModelError):
    """Too few levels, no residual degrees of freedom, incomplete cells."""


class DegenerateError(ModelError):
    """Zero within-sample dispersion makes the F ratio undefined."""
