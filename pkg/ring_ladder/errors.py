"""Exception hierarchy shared by the library and the command line."""


class RingLadderError(Exception):
    """Base class for every error raised by ring_ladder."""


class DomainError(RingLadderError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class EllipticDivergenceError(DomainError):
    """A complete or incomplete elliptic integral was asked for at its singularity."""


class WeierstrassPoleError(DomainError):
    """The Weierstrass function was evaluated at a lattice point."""


class OutOfAllowedRegionError(DomainError):
    """A population imbalance outside the region where f(Z) >= 0."""


class IntegrationError(RingLadderError):
    """The ODE solver failed, e.g. by step-size underflow."""


class InsufficientDataError(RingLadderError):
    """A trajectory is too short for the requested analysis."""


class DegenerateLandscapeError(RingLadderError):
    """No local minimum of the effective potential was found."""


class ConfigError(RingLadderError):
    """Invalid run configuration; ``violations`` lists every problem found."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class VerificationError(RingLadderError):
    """An analytic/numeric comparison exceeded its thresholds."""
