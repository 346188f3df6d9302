"""Exception types shared across the package.

Errors that can cross a process boundary (anything raised inside a parallel
trial) define ``__reduce__`` so pickling preserves their extra attributes.
"""

from __future__ import annotations


class RanklossError(Exception):
    """Base class for all errors raised by this package."""


class EmptyClassError(RanklossError):
    """A computation needed samples of a class that has none.

    AUROC and the pairwise ranking losses are undefined when either side of
    a positive/negative split is empty.
    """

    def __init__(self, message: str, class_index: int | None = None):
        super().__init__(message)
        self.class_index = class_index

    def __reduce__(self):
        return (type(self), (self.args[0], self.class_index))


class InfeasibleBatchError(RanklossError):
    """The batch constraints cannot be satisfied for the given labels."""


class TooSmallError(RanklossError):
    """A stratified split would leave a partition with no samples of a class."""


class NonFiniteError(RanklossError):
    """Model weights became NaN or infinite during training."""

    def __init__(self, message: str, epoch: int | None = None, batch: int | None = None):
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch

    def __reduce__(self):
        return (type(self), (self.args[0], self.epoch, self.batch))


class DegenerateVarianceError(RanklossError):
    """Both t-test samples are constant and equal; the statistic is 0/0."""


class TrialError(RanklossError):
    """A trial of the experiment harness failed; carries the trial index."""

    def __init__(self, message: str, trial: int = -1):
        super().__init__(message)
        self.trial = trial

    def __reduce__(self):
        return (type(self), (self.args[0], self.trial))


class CsvError(RanklossError):
    """Base class for CSV ingestion problems."""


class MissingColumnError(CsvError):
    """The requested column does not exist in the header row."""


class NonNumericCellError(CsvError):
    """A feature cell could not be parsed as a number.

    ``row`` is the 0-based index of the data row (the header does not
    count); ``column`` is the column name from the header.
    """

    def __init__(self, message: str, row: int = -1, column: str = ""):
        super().__init__(message)
        self.row = row
        self.column = column

    def __reduce__(self):
        return (type(self), (self.args[0], self.row, self.column))


class EmptyFileError(CsvError):
    """The file has no header or no data rows."""


class ConfigError(RanklossError):
    """A configuration document is invalid; ``pointer`` locates the field."""

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(message)
        self.pointer = pointer

    def __reduce__(self):
        return (type(self), (self.args[0], self.pointer))
