"""Exception hierarchy shared across the harness."""


class FairgenError(Exception):
    """Base class for all harness errors."""


class DimensionError(FairgenError):
    """Array shapes are inconsistent with the operation's contract."""


class NumericError(FairgenError):
    """A non-finite value (NaN/Inf) appeared where finiteness is required."""


class VocabularyError(FairgenError):
    """A value or index falls outside the active attribute vocabulary."""


class ConfigError(FairgenError):
    """Invalid configuration (file, vocabulary, classifier descriptor)."""


class SizeError(FairgenError):
    """A requested cohort would exceed the configured row cap."""


class TrainingError(FairgenError):
    """Training diverged; carries the offending step index."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class SamplingError(FairgenError):
    """The sampler hit a non-finite state; carries the offending step index."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class AdapterError(FairgenError):
    """External classifier protocol violation or process failure."""


class JoinError(FairgenError):
    """Predictions could not be matched one-to-one against the manifest."""


class InputError(FairgenError):
    """Malformed input to a metrics or reporting operation."""


class CompatibilityError(FairgenError):
    """Artifact (checkpoint/manifest) does not match the active vocabulary."""
