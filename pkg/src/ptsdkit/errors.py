"""Exception hierarchy shared across the toolkit.

Three branches matter to the CLI exit-code mapping: ConfigError (exit 2),
DataError (exit 3) and TrainingDivergence (exit 4). Everything else is a
programming-contract violation and surfaces as a plain PtsdkitError.
"""


class PtsdkitError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(PtsdkitError):
    """Invalid experiment configuration (CLI exit code 2)."""


class DataError(PtsdkitError):
    """Invalid or unreadable dataset (CLI exit code 3)."""


class TrainingDivergence(PtsdkitError):
    """Training produced a non-finite loss (CLI exit code 4)."""


# -- tabular ----------------------------------------------------------------

class MissingColumn(DataError):
    def __init__(self, name):
        super().__init__(f"schema column not found in CSV header: {name!r}")
        self.name = name


class RaggedRow(DataError):
    def __init__(self, line):
        super().__init__(f"CSV data row at line {line} has the wrong number of fields")
        self.line = line


class TargetMissingEntries(DataError):
    def __init__(self, count):
        super().__init__(f"target column has {count} missing cell(s); "
                         "target rows are never imputed")
        self.count = count


# -- preprocess ---------------------------------------------------------------

class AllMissingColumn(DataError):
    def __init__(self, name):
        super().__init__(f"column {name!r} has no observed value to impute from")
        self.name = name


class UnknownColumn(PtsdkitError):
    def __init__(self, name):
        super().__init__(f"no fitted state for column {name!r}")
        self.name = name


class UnseenCategory(DataError):
    def __init__(self, value, column=None):
        where = f" in column {column!r}" if column else ""
        super().__init__(f"category {value!r}{where} was not seen at fit time "
                         "(train/test schema drift)")
        self.value = value
        self.column = column


class DegenerateSplit(DataError):
    def __init__(self, msg="split would leave an empty train or test set"):
        super().__init__(msg)


class TooFewMinority(DataError):
    def __init__(self, count):
        super().__init__(f"SMOTE needs at least 2 minority samples, got {count}")
        self.count = count


# -- learners -----------------------------------------------------------------

class NonFiniteLoss(TrainingDivergence):
    def __init__(self, what="loss"):
        super().__init__(f"non-finite {what}; learning rate is probably too high")


class DimensionMismatch(PtsdkitError):
    def __init__(self, expected, got):
        super().__init__(f"expected {expected} feature column(s), got {got}")
        self.expected = expected
        self.got = got


class BatchTooSmall(PtsdkitError):
    def __init__(self, size):
        super().__init__(f"train-mode batch of size {size}; batch statistics "
                         "need at least 2 rows")
        self.size = size


# -- ensemble / metrics ---------------------------------------------------------

class EmptyEnsemble(ConfigError):
    def __init__(self, count):
        super().__init__(f"a voting ensemble needs at least 2 members, got {count}")
        self.count = count


class LengthMismatch(PtsdkitError):
    def __init__(self, n_true, n_pred):
        super().__init__(f"y_true has {n_true} entries, y_pred has {n_pred}")
