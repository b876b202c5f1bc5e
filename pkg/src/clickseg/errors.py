"""Exception types shared across the package."""


class ClicksegError(Exception):
    """Base class for all package errors."""


class NoFramesError(ClicksegError):
    """A frame directory contained no loadable frames."""


class DimensionMismatchError(ClicksegError):
    """Images in one sequence (or an image pair) disagree on size."""


class DecodeError(ClicksegError):
    """An image file exists but cannot be decoded."""


class ParseError(ClicksegError):
    """A click-log line is malformed; carries the 1-based line number."""

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class WriteError(ClicksegError):
    """A persistence operation failed; nothing partial was written."""


class CoordinateRangeError(ClicksegError):
    """A click coordinate falls outside its bound frame."""


class ShapeMismatchError(ClicksegError):
    """Two aligned structures disagree on shape or length."""


class TooManySuperpixelsError(ClicksegError):
    """Requested more superpixels than there are pixels."""


class EmptyRegionError(ClicksegError):
    """A histogram was requested over an empty pixel region."""


class NotSubmodularError(ClicksegError):
    """A pairwise energy term has negative weight."""


class NegativeCostError(ClicksegError):
    """A unary energy term is negative."""


class NeedMoreFramesError(ClicksegError):
    """Motion bootstrap needs at least two frames."""
