"""Exception hierarchy for the reconstruction pipeline."""


class ReconstructionError(Exception):
    """Base class for every error raised by the reconstruction library."""


class DomainError(ReconstructionError, ValueError):
    """An argument lies outside the domain of an operation."""


class UndefinedValueError(ReconstructionError):
    """The requested quantity is not defined for this input."""


class ModelOutOfRangeError(ReconstructionError):
    """The second-order model off-probability left the open interval (0, 1).

    This signals moments that are too large for the efficiency regime.
    """


class SingularityError(ReconstructionError):
    """A model probability hit 0 or 1 where the gradient is singular."""


class UnderdeterminedError(ReconstructionError):
    """Too few independent channels for the number of unknowns."""


class InfeasibleError(ReconstructionError):
    """No interior point of the feasible region reproduces the records."""


class UnphysicalMomentsError(ReconstructionError):
    """Moment pair with N2 < N1**2, i.e. Mandel Q below -1."""

    def __init__(self, n1: float, n2: float):
        self.n1 = n1
        self.n2 = n2
        super().__init__(
            f"Moments (N1={n1:.6g}, N2={n2:.6g}) are unphysical: "
            f"N2 < N1**2 (Mandel Q = {-1 + (n2 - n1 * n1) / n1:.6g})"
        )


class NearDegenerateError(ReconstructionError):
    """Moments sit on the Q = -1 boundary but N1 is not an integer."""

    def __init__(self, n1: float, n2: float):
        self.n1 = n1
        self.n2 = n2
        super().__init__(
            f"Moments (N1={n1:.6g}, N2={n2:.6g}) are on the Q = -1 boundary "
            "but N1 is not close to an integer photon number"
        )


class ConfigError(ReconstructionError, ValueError):
    """Invalid experiment configuration."""
