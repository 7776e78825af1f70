"""Exception types shared across the package.

Plain ``ValueError`` is used for malformed arguments (bad dimensions, empty
datum, out-of-range indices).  The classes below mark the two failure modes
that callers may want to handle separately.
"""


class UnsupportedOperatorError(ValueError):
    """The requested computation is not meaningful for this operator.

    Raised e.g. when a reducibility criterion that is only valid for normal
    operators is applied to a non-normal one.
    """


class NumericalFailureError(RuntimeError):
    """A solve broke down beyond the documented breakdown handling."""
