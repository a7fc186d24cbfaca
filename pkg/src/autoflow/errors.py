"""Exception hierarchy.

Every error raised deliberately by autoflow derives from :class:`AutoflowError`,
so callers (and the CLI) can separate user-facing failures from bugs.
"""


class AutoflowError(Exception):
    """Base class for all user-facing autoflow errors.

    ``stage_id`` is set when the error escaped from a pipeline stage.
    """

    stage_id = None

    def __str__(self):
        msg = super().__str__()
        return msg if self.stage_id is None else f"stage {self.stage_id!r}: {msg}"


# tabular
class ParseError(AutoflowError):
    def __init__(self, message, row=None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class EmptyInput(AutoflowError):
    pass


class NotBinary(AutoflowError):
    pass


class MissingTarget(AutoflowError):
    pass


class UnknownColumn(AutoflowError):
    pass


# pipeline
class InvalidOrder(AutoflowError):
    pass


class DuplicateStage(AutoflowError):
    pass


class SchemaMismatch(AutoflowError):
    pass


class NotAnEstimator(AutoflowError):
    pass


class NoProbability(AutoflowError):
    pass


# preprocess
class CannotImpute(AutoflowError):
    pass


class NeedsEncoding(AutoflowError):
    pass


class InvalidComponents(AutoflowError):
    pass


class CannotStratify(AutoflowError):
    pass


class MissingValues(AutoflowError):
    pass


# models
class UnknownModel(AutoflowError):
    pass


class UnknownParam(AutoflowError):
    pass


class DegenerateTarget(AutoflowError):
    pass


# metrics
class UndefinedAUC(AutoflowError):
    pass


class DegenerateFold(AutoflowError):
    def __init__(self, fold, message):
        super().__init__(f"fold {fold}: {message}")
        self.fold = fold


# experiment
class NothingToCompare(AutoflowError):
    pass


class NotAModelFile(AutoflowError):
    pass


class UnsupportedVersion(AutoflowError):
    pass


# analysis
class NoImportance(AutoflowError):
    pass


class EmptyChart(AutoflowError):
    pass
