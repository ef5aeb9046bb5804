class PhotomapError(Exception):
    pass


class TargetNotPowerOfTwo(PhotomapError, ValueError):
    pass


class TargetTooSmall(PhotomapError, ValueError):
    pass


class DegenerateInput(PhotomapError):
    """Raised when an input raster has no spectral content to correlate."""


class SizeMismatch(PhotomapError, ValueError):
    pass


class ScaleOutOfRange(PhotomapError):
    pass


class EmptySequence(PhotomapError):
    pass


class EmptyCanvas(PhotomapError):
    pass


class InvalidDt(PhotomapError, ValueError):
    pass
