"""Exception types shared across the package."""


class DataError(ValueError):
    """Malformed input data: CSV files, label files, kernel cache files."""


class FactorizationError(RuntimeError):
    """A matrix factorization failed (indefinite or singular input)."""


class SolverError(RuntimeError):
    """An iterative solver lost an invariant it cannot recover from."""
