"""Exception types shared across the package."""


class ResourceLimitError(RuntimeError):
    """Dense-matrix or register-size feasibility bound exceeded."""


class NumericIntegrityError(RuntimeError):
    """A numerical invariant (norm, ancilla restoration, finite gradients) was violated."""


class UnsupportedOrderError(ValueError):
    """Walsh term of order >= 3 where only orders 0..2 have circuit realizations."""
