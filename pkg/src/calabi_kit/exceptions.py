"""Exception types raised across the toolkit."""


class CalabiKitError(ValueError):
    """Base class for all toolkit errors."""


class DimensionError(CalabiKitError):
    """Operands live in different numbers of variables."""


class DomainError(CalabiKitError):
    """An input lies outside the domain where an object is defined."""


class PreconditionError(CalabiKitError):
    """An operation was called on input violating its precondition."""


class ParameterError(CalabiKitError):
    """Invalid numerical parameters (surface data, solver settings)."""


class ContractError(CalabiKitError):
    """An object lacks a component the operation requires."""
