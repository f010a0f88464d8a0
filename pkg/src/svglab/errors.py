"""Exception hierarchy shared across the toolkit."""


class SvglabError(Exception):
    """Base class for all svglab errors."""


class MalformedXml(SvglabError):
    """Input is not well-formed XML or has no <svg> root."""


class UnsupportedFeature(SvglabError):
    """Input uses an SVG feature outside the supported dialect (strict mode)."""


class InvalidGeometry(SvglabError):
    """Shape parameters violate geometric constraints (negative radius, ...)."""


class UnknownId(SvglabError):
    """An edit referenced an element id that is not in the document."""


class EmptyDocument(SvglabError):
    """Operation requires at least one element with geometry."""


class DegenerateContour(SvglabError):
    """A contour has fewer than three distinct vertices."""


class EmptyForeground(SvglabError):
    """Vectorization found no foreground patch above the minimum size."""


class EmptyMaskSet(SvglabError):
    """Mask-based conversion was given no masks."""


class ShapeMismatch(SvglabError):
    """Mask dimensions do not match the source image."""


class UnsupportedFormat(SvglabError):
    """Raster file is not a format we can read or is corrupt."""


class BadMagic(SvglabError):
    """IDX file does not start with the expected magic number."""


class LengthMismatch(SvglabError):
    """Prediction/label sequences (or IDX payloads) differ in length."""


class UnknownGlyph(SvglabError):
    """No bundled glyph for the requested digit or letter."""


class UnsupportedScene(SvglabError):
    """Transformation oracle requires a single-shape scene."""


class InsufficientContext(SvglabError):
    """Context pool does not cover the classes a prompt strategy needs."""


class WrongPairCount(SvglabError):
    """Prompt builder got the wrong number of example pairs."""


class InvalidPrediction(SvglabError):
    """Model output could not be interpreted as the expected artifact."""


class AuthError(SvglabError):
    """Endpoint rejected the credential; never retried."""


class RateLimited(SvglabError):
    """Endpoint kept rate-limiting after all retries."""


class TransportError(SvglabError):
    """Network-level failure talking to the endpoint."""


class ResponderError(SvglabError):
    """A responder failed on one benchmark item."""


class FixtureMissing(SvglabError):
    """Scripted responder ran out of (or never had) recorded responses."""


class UnknownSuite(SvglabError):
    """No benchmark or dataset suite with that name."""
