"""Error taxonomy.

Invalid arguments raise plain ValueError.  Everything that maps to a CLI
exit code gets its own class so the entry point can translate without
string matching.
"""


class ShearspecError(Exception):
    """Base class for package-specific failures."""


class ConfigError(ShearspecError):
    """Run configuration is malformed or inconsistent (exit code 2)."""


class ReconstructionError(ShearspecError):
    """Reconstruction quality failure (exit code 3)."""


class LowVisibilityError(ReconstructionError):
    """Fringe sideband indistinguishable from the noise floor."""


class FilterCollisionError(ReconstructionError):
    """Sideband filter would collect the DC / mirror-sideband region."""


class CalibrationError(ReconstructionError):
    """Delay calibration failed (no resolvable fringes)."""


class DegenerateInputError(ReconstructionError):
    """Record carries no usable signal (for example all-zero counts)."""


class DataFormatError(ShearspecError):
    """A file on disk could not be parsed (exit code 4)."""
