"""Exception and warning types shared across the package."""


class LdtfError(Exception):
    """Base class for all errors raised by this package."""


# --- record parsing -----------------------------------------------------

class MalformedHeader(LdtfError):
    """Header text has the wrong line/field structure or an unusable layout."""


class UnsupportedFormat(LdtfError):
    """Signal file declares a storage format other than packed 212."""


class TruncatedData(LdtfError):
    """Signal byte stream does not match the length implied by the header."""


class MalformedAnnotation(LdtfError):
    """Annotation line is not ``sample_index,symbol`` with an integer index."""


class InvalidSpec(LdtfError):
    """Synthetic-record specification violates its own constraints."""


class MalformedArchive(LdtfError):
    """Binary archive has a bad magic number or inconsistent framing."""


# --- preprocessing ------------------------------------------------------

class UnknownSymbol(LdtfError):
    """Beat symbol outside the 15-symbol AAMI mapping table."""


class ClassTooSmall(LdtfError):
    """A class needs oversampling but has fewer than 2 members."""


class EmptyClassWarning(UserWarning):
    """A class has zero segments; splitting proceeds without it."""


# --- embedding ----------------------------------------------------------

class SignalTooShort(LdtfError):
    """Signal shorter than 2**levels cannot be decomposed."""


class InconsistentPyramid(LdtfError):
    """Wavelet band lengths do not chain back to the original length."""


class UnknownBand(LdtfError):
    """Band identifier outside L1..L4 / H1..H4."""


# --- model --------------------------------------------------------------

class ShapeMismatch(LdtfError):
    """Tensor shapes do not conform to the declared layout."""


class NonFiniteActivation(LdtfError):
    """NaN or Inf appeared in a forward pass; carries the layer index."""

    def __init__(self, layer_index: int, message: str = ""):
        self.layer_index = layer_index
        super().__init__(message or f"non-finite activation in layer {layer_index}")


class NonFiniteLoss(LdtfError):
    """Loss evaluated to NaN or Inf."""


# --- evaluation ---------------------------------------------------------

class LengthMismatch(LdtfError):
    """Prediction and label sequences differ in length."""


class ClassOutOfRange(LdtfError):
    """A class index falls outside [0, num_classes)."""


class NotSquare(LdtfError):
    """Confusion matrix is not square."""
