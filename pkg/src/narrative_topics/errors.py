"""Exception types raised across the package."""


class NarrativeError(Exception):
    """Base class for all package errors."""


class DataError(NarrativeError):
    """Input data is malformed or unusable (CLI exit code 3)."""


class ConfigError(NarrativeError):
    """Configuration is missing or invalid (CLI exit code 2)."""


class RecordInvalid(DataError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptyText(DataError):
    pass


class ProviderMismatch(DataError):
    pass


class ZeroVector(DataError):
    pass


class DimMismatch(DataError):
    pass


class DegenerateCentroid(DataError):
    pass


class EmptyInput(DataError):
    pass


class KTooLarge(DataError):
    pass


class FitDiverged(NarrativeError):
    pass


class TooFewPoints(DataError):
    pass


class UnknownCluster(DataError):
    pass


class TooFewKeywords(DataError):
    pass


class NoEligibleClusters(DataError):
    pass


class NoMatches(DataError):
    pass


class UnlabeledRows(DataError):
    pass


class UnknownTopicInLabels(DataError):
    pass


class ZeroVariance(DataError):
    pass




class ConfigInvalid(ConfigError):
    pass


class MissingInput(ConfigError):
    pass


class StageFailure(NarrativeError):
    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage!r} failed: {cause}")


class ArtifactMissing(DataError):
    pass


class UnsupportedFormat(ConfigError):
    pass
