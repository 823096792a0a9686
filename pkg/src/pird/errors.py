"""Exception hierarchy shared by all pird modules.

The four top-level categories map one-to-one onto the CLI exit codes
(see :mod:`pird.cli`): format (2), argument (3), numerical (4) and
capability (5) errors.
"""


class PirdError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(PirdError):
    """Malformed input file (CSV/JSON/config)."""


class ArgumentError(PirdError):
    """Invalid argument value or violated precondition."""


class NumericalError(PirdError):
    """Numerical failure: singular system, ill conditioning, non-SPD input."""


class CapabilityError(PirdError):
    """Request beyond the supported problem size."""


class UnstableModelError(NumericalError):
    """Operation refused because the VAR model is not (sufficiently) stable."""


class EstimationError(NumericalError):
    """Model identification failed (rank deficiency, ill conditioning)."""


class SpectralSingularityError(NumericalError):
    """A spectral determinant fell below the working floor at some frequency."""
