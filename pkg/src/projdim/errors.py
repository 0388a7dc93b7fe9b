"""Shared exception types for the projdim package."""


class ProjdimError(Exception):
    """Base class for all package errors."""


class FieldError(ProjdimError):
    """Invalid field description or arithmetic failure."""


class MixedContexts(FieldError):
    """Two scalars from different field contexts were combined."""


class DivisionByZero(FieldError):
    """Division by the zero element."""


class NonTerminatingComparison(FieldError):
    """Sign decision did not resolve within the refinement budget.

    Usually indicates a reducible or otherwise mis-specified minimal
    polynomial, where the compared element is zero at the chosen root but
    not identically zero.
    """


class AngleOutOfRange(ProjdimError):
    """Projection angle outside [0, pi)."""


class CapTooSmall(ProjdimError):
    """Enumeration cap below the longest alphabet block."""


class EnumerationBudgetExceeded(ProjdimError):
    """Matching enumeration grew past the configured path budget."""


class EmptyCounts(ProjdimError):
    """Similarity-dimension solve requested with no counts at all."""


class DivergentTail(ProjdimError):
    """Tail-bounded solve rejected because the count growth rate reaches beta."""


class NoRootInDomain(ProjdimError):
    """The generating function never reaches 1 inside its convergence domain."""


class CertificateUnavailable(ProjdimError):
    """No separation certificate for the full infinite family."""


class TypesExceeded(ProjdimError):
    """Neighborhood-type closure exceeded the configured cap."""


class NotUniformRatio(ProjdimError):
    """Finite-type solve requires all maps to share one contraction ratio."""


class EmptySelection(ProjdimError):
    """Vitali selection produced no maps."""


class BudgetExceeded(ProjdimError):
    """Sampling budget exceeded."""


class WindowTooFine(ProjdimError):
    """Box-count window extends below the sample resolution."""


class ConfigError(ProjdimError):
    """Malformed analysis configuration."""
