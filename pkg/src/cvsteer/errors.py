"""Exception hierarchy shared by all cvsteer modules."""


class CvsteerError(Exception):
    """Base class for every error raised by this package."""


class DomainError(CvsteerError, ValueError):
    """An argument lies outside the domain of the operation."""


class ArityError(DomainError):
    """Wrong number of modes or parties for the requested operation."""


class PartitionParseError(DomainError):
    """A partition string such as ``"BC->A"`` could not be parsed."""


class IncompletePlanError(DomainError):
    """Measurement records do not cover every combination reconstruction needs."""

    def __init__(self, missing):
        self.missing = missing
        super().__init__(f"measurement plan incomplete: missing {missing}")


class NumericalError(CvsteerError, ArithmeticError):
    """A numerical routine hit an inconsistency it cannot resolve."""


class SingularBlockError(NumericalError):
    """The steering block is not safely invertible."""

    def __init__(self, min_eigenvalue, cutoff):
        self.min_eigenvalue = min_eigenvalue
        self.cutoff = cutoff
        super().__init__(
            f"steering block is near-singular: minimum eigenvalue "
            f"{min_eigenvalue:.3e} <= cutoff {cutoff:.0e}"
        )


class SymplecticPairingError(NumericalError):
    """Eigenvalues of Omega @ sigma did not come in matching +/- pairs."""


class MultiCrossingError(NumericalError):
    """The steering threshold is crossed more than once on the scan grid."""

    def __init__(self, intervals):
        self.intervals = list(intervals)
        spans = ", ".join(f"[{a:.4f}, {b:.4f}]" for a, b in self.intervals)
        super().__init__(f"steering threshold crossed more than once: {spans}")
