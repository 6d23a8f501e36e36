"""Exception types raised across the package."""


class TiltquadError(Exception):
    """Base class for all package errors."""


class DegenerateInput(TiltquadError):
    """Input vectors too small or too parallel to define a rotation."""


class OutOfRangeThrust(TiltquadError):
    """Rotor thrust outside the physical [0, f_max] range."""


class NonFiniteState(TiltquadError):
    """Simulation state contains NaN or Inf (integrator blow-up)."""


class OutOfRange(TiltquadError):
    """Actuator model evaluated outside its fitted input range."""


class Unreachable(TiltquadError):
    """Requested thrust exceeds what the rotor can produce at this voltage."""


class RankDeficient(TiltquadError):
    """Least-squares design matrix is singular within tolerance."""


class InsufficientData(TiltquadError):
    """Not enough samples for the requested fit."""


class NoConvergence(TiltquadError):
    """Iterative fit failed to converge; carries the best parameters found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class NonFiniteLoss(TiltquadError):
    """Optimization loss became NaN/Inf; identifies the offending minibatch."""


class CheckpointMismatch(TiltquadError):
    """Checkpoint incompatible with the requested network or environment."""


class ConfigError(TiltquadError):
    """Malformed key-value config file."""
