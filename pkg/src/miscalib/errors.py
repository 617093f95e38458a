"""Exception types shared across the toolkit."""


class MiscalibError(Exception):
    """Base class for all toolkit errors."""


class NonConvergence(MiscalibError):
    """Distortion inversion did not reach tolerance within the iteration budget."""

    def __init__(self, residual, iterations, message=None):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            message
            or f"undistortion did not converge: residual {residual:.3e} "
            f"after {iterations} iterations"
        )


class BehindCamera(MiscalibError):
    """3D point has non-positive depth and cannot be projected."""


class SizeMismatch(MiscalibError):
    """Two grids or an image/map pair do not agree in size."""


class NoValidRegion(MiscalibError):
    """The rectified image has no valid centered region to crop."""


class ParseError(MiscalibError):
    """A calibration or manifest file is malformed."""


class MissingKey(ParseError):
    """A required key is absent from a calibration file."""

    def __init__(self, key):
        self.key = key
        super().__init__(f"missing required key: {key!r}")


class NonPositiveFocal(ParseError):
    """A parsed focal length is zero or negative."""


class VersionMismatch(ParseError):
    """A manifest was written by an incompatible format version."""


class EmptyInputDir(MiscalibError):
    """No decodable images were found in the input directory."""


class TooFewValidPoints(MiscalibError):
    """Too many simulation points were excluded to report a stable mean."""


class ValidationError(MiscalibError):
    """A dataset failed an integrity re-check."""

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__(
            "dataset validation failed:\n" + "\n".join(f"  - {i}" for i in self.issues)
        )
