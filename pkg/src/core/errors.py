from __future__ import annotations


class TopoprintError(ValueError):
    """Base class for every domain error raised by topoprint."""


class AudioError(TopoprintError):
    pass


class SynthesisError(TopoprintError):
    pass


class ObfuscationError(TopoprintError):
    pass


class SpectralError(TopoprintError):
    pass


class FingerprintError(TopoprintError):
    pass


class FingerprintFormatError(FingerprintError):
    """A fingerprint file could not be decoded."""


class VersionMismatchError(FingerprintFormatError):
    pass


class MalformedFileError(FingerprintFormatError):
    pass


class ChecksumError(FingerprintFormatError):
    pass


class MatchingError(TopoprintError):
    pass


class EvaluationError(TopoprintError):
    pass


class ManifestError(TopoprintError):
    pass
