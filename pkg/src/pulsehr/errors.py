"""Exception hierarchy shared across the package."""


class PulseHRError(Exception):
    """Base class for every error raised by pulsehr."""


class ValidationError(PulseHRError, ValueError):
    pass


class NonFiniteSample(ValidationError):
    def __init__(self, index, channel=0):
        self.index = index
        self.channel = channel
        super().__init__(f"non-finite sample at index {index} (channel {channel})")


class ChannelLengthMismatch(ValidationError):
    def __init__(self, index, expected, got):
        self.index = index
        super().__init__(
            f"channel {index} has {got} samples, expected {expected}")


class NonPositiveRate(ValidationError):
    def __init__(self, rate):
        self.index = 0
        self.rate = rate
        super().__init__(f"sampling rate must be > 0, got {rate!r}")


class HrOutOfRange(ValidationError):
    def __init__(self, index, value):
        self.index = index
        self.value = value
        super().__init__(f"HR reading {value!r} at index {index} outside [20, 230] bpm")


class InvalidConfig(ValidationError):
    pass


class TooFewSamples(PulseHRError):
    pass


class RecordingTooShort(PulseHRError):
    pass


class AlignmentError(PulseHRError):
    pass


class InsufficientData(PulseHRError):
    pass


class EmptyMatrix(PulseHRError):
    pass


class EmptyTrainingSet(PulseHRError):
    pass


class NotEnoughRows(PulseHRError):
    pass


class DimensionMismatch(PulseHRError):
    pass


class LengthMismatch(PulseHRError):
    pass


class NonPositiveTruth(PulseHRError):
    pass


class EmptyList(PulseHRError):
    pass


class NoConvergence(UserWarning):
    """Warning: the SVR solver hit its iteration cap well above tolerance."""


class FormatError(PulseHRError):
    pass


class BadMagic(FormatError):
    pass


class UnsupportedVersion(FormatError):
    pass


class TruncatedPayload(FormatError):
    pass


class BadHeader(FormatError):
    def __init__(self, line, found=""):
        self.line = line
        super().__init__(f"line {line}: unexpected header {found!r}")


class NonUniformSpacing(FormatError):
    def __init__(self, row, detail=""):
        self.row = row
        super().__init__(f"line {row}: non-uniform time spacing {detail}".rstrip())


class ParseError(FormatError):
    def __init__(self, row, col, detail=""):
        self.row = row
        self.col = col
        super().__init__(f"line {row}, column {col}: {detail}".rstrip(": "))
