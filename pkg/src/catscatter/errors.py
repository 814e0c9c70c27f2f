"""Exception hierarchy shared across the package."""


class CatscatterError(Exception):
    """Base class for all catscatter errors."""


class NonConvergence(CatscatterError):
    """Adaptive quadrature exhausted its subdivision budget before the
    requested tolerance was met."""


class NonFiniteIntegrand(CatscatterError):
    """The integrand returned NaN or +/-inf inside the integration domain."""


class UnsupportedDimension(CatscatterError):
    """Requested box dimension is not supported by the cubature engine."""


class NoPureState(CatscatterError):
    """The incoherent two-packet mixture has no single wavefunction."""


class UnsupportedVariant(CatscatterError):
    """Operation not defined for this beam-state variant."""


class InvalidCatSeparation(CatscatterError):
    """Odd-cat packet separation too small: the normalization denominator
    1 - exp(-r0^2 / (2 sigma_perp^2)) degenerates as r0 -> 0."""


class WideLimitHasNoDensity(CatscatterError):
    """A wide-limit target has no pointwise density; the limit is taken
    analytically inside the scattering formulas."""


class NegativeTotal(CatscatterError):
    """A total event density came out significantly negative, which signals
    a quadrature failure (physical totals are nonnegative)."""


class MissingSigma(CatscatterError):
    """Cross-section conversion requested but the event density carries no
    usable Sigma^2 = sigma_t^2 + sigma_perp^2."""


class DegenerateDenominator(CatscatterError):
    """Both azimuthal samples of the event density are numerically zero."""


class TooFewPoints(CatscatterError):
    """Oscillation detection needs at least five sample points."""


class FlatDistribution(CatscatterError):
    """The polar-angle profile has no usable contrast (max/min < 1.01)."""
