"""Exception hierarchy shared by every module of the package."""


class QuasiHermError(Exception):
    """Base class for all domain failures raised by quasiherm."""


class ConvergenceError(QuasiHermError):
    """The dense eigensolver did not converge."""


class AsymmetryError(QuasiHermError):
    def __init__(self, asymmetry, tolerance):
        self.asymmetry = float(asymmetry)
        self.tolerance = float(tolerance)
        super().__init__(
            f"matrix is not symmetric: |S - S^T|_F = {self.asymmetry:.3e} "
            f"exceeds {self.tolerance:.3e}"
        )


class NotPositiveDefiniteError(QuasiHermError):
    def __init__(self, min_eigenvalue, tolerance):
        self.min_eigenvalue = float(min_eigenvalue)
        self.tolerance = float(tolerance)
        super().__init__(
            f"matrix is not positive definite: minimal eigenvalue "
            f"{self.min_eigenvalue:.6e} <= {self.tolerance:.3e}"
        )


class ParameterError(QuasiHermError, ValueError):
    """A model or operation received parameters outside its admissible set."""


class SpectrumError(QuasiHermError):
    """The spectrum is complex or degenerate where a real simple one is required."""

    def __init__(self, message, pair=None):
        self.pair = pair
        super().__init__(message)


class NotFoundError(QuasiHermError):
    """A scan or bracketed search found no transition."""
