"""Exception types raised across the package."""


class TmcrfError(Exception):
    """Base class for all tmcrf errors."""


class MalformedRecordError(TmcrfError):
    """A dataset block violates the canonical format."""

    def __init__(self, record_id: str, reason: str):
        super().__init__(f"record {record_id!r}: {reason}")
        self.record_id = record_id
        self.reason = reason


class DuplicateIdError(TmcrfError):
    def __init__(self, record_id: str):
        super().__init__(f"duplicate record id {record_id!r}")
        self.record_id = record_id


class UnknownResidueError(TmcrfError):
    def __init__(self, record_id: str, position: int, letter: str):
        super().__init__(
            f"record {record_id!r}: unknown residue {letter!r} at position {position}"
        )
        self.record_id = record_id
        self.position = position
        self.letter = letter


class MalformedConfigError(TmcrfError):
    """A configuration file line cannot be parsed."""


class ConfigConflictError(TmcrfError):
    """Feature groups require a label topology the configuration forbids."""


class EmptyTrainingError(TmcrfError):
    """Training was attempted on an empty dataset."""


class MissingGoldError(TmcrfError):
    def __init__(self, record_id: str):
        super().__init__(f"record {record_id!r} has no gold labels")
        self.record_id = record_id


class NumericalFailureError(TmcrfError):
    def __init__(self, record_id: str, detail: str):
        where = f" while processing {record_id!r}" if record_id else ""
        super().__init__(f"non-finite value{where}: {detail}")
        self.record_id = record_id
        self.detail = detail


class InfeasibleTopologyError(TmcrfError):
    """No allowed state path exists for a sequence."""


class InfeasiblePathError(TmcrfError):
    """A state path violates the topology's transition constraints."""

    def __init__(self, record_id: str, reason: str):
        super().__init__(f"record {record_id!r}: {reason}")
        self.record_id = record_id
        self.reason = reason


class MalformedPairError(TmcrfError):
    """Gold and predicted label strings have different lengths."""


class IncompatibleModelError(TmcrfError):
    """A model file is corrupt or was produced by an incompatible configuration."""


class EmptyAnalysisError(TmcrfError):
    """A residue-distribution analysis was requested on predictions with no helices."""
