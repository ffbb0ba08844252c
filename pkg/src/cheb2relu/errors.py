"""Exception types shared across the package."""


class StructuralError(ValueError):
    """Raised when network or array dimensions do not fit together."""


class ParameterError(ValueError):
    """Raised for out-of-range tolerances, degrees or mesh parameters."""


class DataError(ValueError):
    """Raised when sampled or supplied data is non-finite or inconsistent."""
