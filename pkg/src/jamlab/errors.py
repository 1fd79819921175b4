"""Exception types shared across the toolkit."""


class JamlabError(Exception):
    """Base class for every toolkit-specific error."""


class GridTooNarrow(JamlabError):
    """Grid half-width leaves more probability mass outside than tolerated."""


class NonZeroMean(JamlabError):
    """Distribution violates the zero-mean convention."""


class GridMismatch(JamlabError):
    """Two operands live on different grids."""


class NotHermitian(JamlabError):
    """Characteristic-function samples lack Hermitian symmetry."""


class ExcessImaginary(JamlabError):
    """Inverse transform left an imaginary residue above tolerance."""


class ZeroCrossing(JamlabError):
    """Characteristic function vanishes on the grid (strict mode)."""


class MomentOverflow(JamlabError):
    """Moment quadrature loses too much mass beyond the grid edge."""


class IllConditioned(JamlabError):
    """Moment Hankel matrix too ill-conditioned for the requested order."""


class BasisMismatch(JamlabError):
    """Expansion basis was built for a different output density."""


class InfeasibleFamily(JamlabError):
    """No parameter vector in the search family yields a usable density."""


class UnstableIntegration(JamlabError):
    """Marched ODE solution left the stability region."""


class PowerViolation(JamlabError):
    """Strategy exceeds its power budget."""


class InvalidProfile(JamlabError):
    """Strategy profile is malformed or inconsistent with the game."""


class PreconditionViolated(JamlabError):
    """Caller invoked an operation outside its stated preconditions."""


class ConfigError(JamlabError):
    """Experiment specification failed to parse or validate."""
