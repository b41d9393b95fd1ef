"""Exception hierarchy. Every error raised by this package derives from TafiBenchError."""


class TafiBenchError(Exception):
    pass


# --- container / frame I/O ---

class MalformedHeader(TafiBenchError):
    pass


class TruncatedFrame(TafiBenchError):
    pass


class UnsupportedColorspace(TafiBenchError):
    pass


class OutOfBounds(TafiBenchError):
    pass


class OddGeometry(TafiBenchError):
    pass


class GeometryMismatch(TafiBenchError):
    pass


class FrameTooSmall(TafiBenchError):
    pass


# --- clips / corpora ---

class InvalidSpec(TafiBenchError):
    pass


class ClipTooShort(TafiBenchError):
    pass


class EmptyClipList(TafiBenchError):
    pass


class PatchTooLarge(TafiBenchError):
    pass


# --- statistics ---

class InsufficientGroups(TafiBenchError):
    pass


class InsufficientSamples(TafiBenchError):
    pass


class ZeroWithinVariance(TafiBenchError):
    pass


class ZeroVariance(TafiBenchError):
    pass


class DomainError(TafiBenchError):
    pass


# --- benchmark / external tools ---

class EmptyManifest(TafiBenchError):
    pass


class MissingFile(TafiBenchError):
    pass


class TrainTestOverlap(TafiBenchError):
    pass


class WriteFailed(TafiBenchError):
    pass


class ToolFailed(TafiBenchError):
    """External tool exited nonzero or produced unparseable output."""

    def __init__(self, message, stdout="", stderr=""):
        super().__init__(message)
        self.stdout = stdout
        self.stderr = stderr
