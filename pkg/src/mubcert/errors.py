"""Exception types raised across the package."""


class MubCertError(Exception):
    """Base class for all package-specific errors."""


# -- linear algebra ----------------------------------------------------------

class NotHermitian(MubCertError):
    """Matrix fails the Hermiticity check at the requested tolerance."""


class NotPSD(MubCertError):
    """Matrix has an eigenvalue below the negative tolerance."""


class NoConvergence(MubCertError):
    """Iterative eigensolver/SVD failed to converge."""


class DimensionMismatch(MubCertError):
    """Operands do not share a common dimension."""


# -- measurements ------------------------------------------------------------

class NotProjective(MubCertError):
    """Measurement effects are not rank-1 projectors."""


class NotMub(MubCertError):
    """Measurement pair is not mutually unbiased."""


# -- counts / estimation -----------------------------------------------------

class EmptyCell(MubCertError):
    """An input setting has no recorded detections."""


class CountsFormatError(MubCertError):
    """Counts document is malformed (bad header, indices, or duplicates)."""


# -- certification bounds ----------------------------------------------------

class OutOfRange(MubCertError):
    """Success probability outside the domain of the bound."""


class BelowThreshold(MubCertError):
    """Success probability below the applicability threshold of the bound."""


class DenominatorNonpositive(MubCertError):
    """Incompatibility bound undefined: denominator is not positive."""


class BoundInapplicableInWindow(MubCertError):
    """Bound not applicable across the requested error-propagation window."""


# -- interferometer simulation ----------------------------------------------

class AllArmsBlocked(MubCertError):
    """Every arm transmissivity is zero; no state can be prepared."""


class StabilizationFailed(MubCertError):
    """Phase stabilization loop hit its iteration cap below threshold."""


class ConfigError(MubCertError):
    """Interferometer configuration failed validation."""
