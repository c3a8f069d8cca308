"""Exception hierarchy shared across the package.

Every error the library raises derives from StratsegError; the class name
doubles as the machine-parsable category printed by the CLI.
"""


class StratsegError(Exception):
    """Base class for all stratseg errors."""


# --- image I/O ---

class MalformedHeader(StratsegError):
    """PGM header is syntactically invalid."""


class TruncatedData(StratsegError):
    """PGM raster holds fewer samples than width * height."""


class UnsupportedMaxval(StratsegError):
    """PGM maxval exceeds 255."""


class RectOutOfBounds(StratsegError):
    """Rectangle does not fit inside the image."""


# --- thresholding ---

class EmptyHistogram(StratsegError):
    """Histogram has zero total count."""


class ReportTreeMismatch(StratsegError):
    """Threshold report entries do not match the tree's leaves."""


# --- discriminant analysis ---

class DimensionMismatch(StratsegError):
    """Vector or matrix dimensions disagree."""


class EmptyClass(StratsegError):
    """A class label has no samples."""


class ZeroVector(StratsegError):
    """A nonzero vector was required."""


class DegenerateKernel(StratsegError):
    """Kernel matrix is numerically zero."""


class InvalidDataset(StratsegError):
    """Dataset violates a structural precondition (e.g. fewer than 2 classes)."""


class CsvParse(StratsegError):
    """CSV input could not be parsed."""


# --- CLI / files ---

class InvalidSpec(StratsegError):
    """Phantom spec file is invalid."""


class NonBinaryInput(StratsegError):
    """Mask contains values other than 0 and 255."""


class IoError(StratsegError):
    """File could not be read or written."""
