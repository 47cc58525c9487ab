"""
Custom exception classes for quantum_frenet.

Every class carries the process exit code the CLI reports for it.
"""


class QuantumFrenetError(Exception):
    """Base exception for quantum_frenet errors."""
    exit_code = 1


class InvalidInputError(QuantumFrenetError):
    """Base class for malformed user or caller input."""
    exit_code = 2


class DimensionMismatchError(InvalidInputError):
    """Raised when operators and states have incompatible shapes."""
    pass


class NonHermitianError(InvalidInputError):
    """Raised when an operator expected to be Hermitian is not."""
    pass


class NotNormalizedError(InvalidInputError):
    """Raised when a state vector or Bloch vector is not of unit norm."""
    pass


class InvalidScheduleError(InvalidInputError):
    """Raised when a Hamiltonian schedule fails its construction self-check."""
    pass


class InvalidConfigError(InvalidInputError):
    """Raised when a scenario configuration is malformed."""
    pass


class DimensionUnsupportedError(InvalidInputError):
    """Raised when an operation is only defined for a different dimension."""
    pass


class NumericalError(QuantumFrenetError):
    """Base class for numerical failures."""
    exit_code = 3


class NonFiniteStateError(NumericalError):
    """Raised when a propagated amplitude becomes NaN or infinite."""
    pass


class DegenerateDispersionError(NumericalError):
    """Raised when the state is (numerically) an eigenstate of the operator."""
    pass


class DegenerateSpeedError(NumericalError):
    """Raised when the evolution speed is too small for Δh to be defined."""
    pass


class DegenerateNormalError(NumericalError):
    """Raised when the normal direction is undefined (locally geodesic curve)."""
    pass


class ImaginaryResidueError(NumericalError):
    """Raised when a quantity that must be real carries a non-negligible imaginary part."""
    pass


class OutputError(QuantumFrenetError):
    """Raised when writing an output artifact fails."""
    exit_code = 4
