"""Exception types shared across the library."""


class CseLabError(Exception):
    """Base class for library errors."""


class CutoffTooSmallError(CseLabError, ValueError):
    """Fock cutoff discards more probability mass than tolerated."""


class DimensionMismatchError(CseLabError, ValueError):
    """Operands live on different truncated Fock spaces."""


class NonPhysicalStateError(CseLabError, ValueError):
    """Operator fails Hermiticity / trace / positivity checks for a state."""


class InfeasibleRepresentationError(CseLabError, RuntimeError):
    """No positive-semidefinite affine combination of the probes exists."""


class ConvergenceError(CseLabError, RuntimeError):
    """Iterative solver did not converge within its iteration budget."""


class MixedProbeError(CseLabError, ValueError):
    """A pure-probe-only formula was requested with mixed probes."""
