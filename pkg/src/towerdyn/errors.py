"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when user-supplied tower, weight or vector data is malformed."""


class WindowError(LookupError):
    """Raised when a table-defined object is evaluated outside its index range."""


class InvariantViolation(RuntimeError):
    """Raised when a result breaks an equivalence that must hold by construction."""
