"""Exception types shared across the package."""


class OrliczFlowError(Exception):
    """Base class for errors raised by this package."""


class UnsupportedDimensionError(OrliczFlowError, ValueError):
    """Ambient dimension other than 2 or 3 was requested."""


class ResolutionError(OrliczFlowError, ValueError):
    """Grid resolution outside the supported range."""


class GridMismatchError(OrliczFlowError, ValueError):
    """A field was combined with a grid it does not live on."""


class InvalidBodyError(OrliczFlowError, ValueError):
    """Support data fails positivity or discrete convexity."""


class ConvexityLostError(InvalidBodyError):
    """A derived body (polar, flow step) lost discrete convexity."""


class PhiModelError(OrliczFlowError, ValueError):
    """Invalid Orlicz growth-function specification or evaluation."""


class ConfigError(OrliczFlowError, ValueError):
    """Malformed run configuration."""


class FlowFailure(OrliczFlowError, RuntimeError):
    """A flow step could not be accepted; carries the termination code."""

    def __init__(self, termination: str, message: str):
        super().__init__(message)
        self.termination = termination
