"""Exception types raised across the package."""


class NonHermitianError(ValueError):
    """Input matrix violates the Hermitian symmetry tolerance."""


class SingularMatrixError(ValueError):
    """Matrix inversion / inverse square root hit a (near-)zero eigenvalue."""


class ConsistencyError(RuntimeError):
    """Two algebraically equivalent computations disagreed beyond tolerance.

    Usually signals a badly conditioned input rather than a logic bug.
    """


class DegenerateProjectionError(ValueError):
    """The target matrix is (numerically) orthogonal to the range of G."""


class ConfigurationError(ValueError):
    """Invalid dimensions, options or configuration input."""


class SolverError(RuntimeError):
    """The SDP solver failed in a way the caller cannot recover from."""
