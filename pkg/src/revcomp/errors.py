"""Exception types shared across the library.

The CLI maps these onto distinct exit codes, so keep the split between
data-validation failures and solver-capacity failures.
"""


class ValidationError(ValueError):
    """Input data violates a domain invariant (matrix, label, or parameter)."""


class DimensionMismatchError(ValidationError):
    """Operands live on different alphabets or spaces."""


class UnknownLabelError(ValidationError):
    """A symbol is not present in the relevant alphabet."""


class ReportMismatchError(ValidationError):
    """A compression report does not belong to the channel it is applied to."""


class ExactSolverCapError(RuntimeError):
    """Instance is larger than the exact-solver vertex cap.

    The exact solver is worst-case exponential; callers hitting this should
    fall back to the greedy solver or raise the cap explicitly.
    """
