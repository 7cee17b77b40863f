"""Exception types raised across the package."""


class DnfnetError(Exception):
    """Base class for all package errors."""


# --- data ingestion ---

class MissingLabelColumn(DnfnetError):
    def __init__(self, column, available):
        self.column = column
        self.available = list(available)
        super().__init__(f"label column {column!r} not in header {self.available}")


class NonBinaryValue(DnfnetError):
    def __init__(self, row, column, token):
        self.row = row
        self.column = column
        self.token = token
        super().__init__(
            f"row {row}, column {column!r}: {token!r} is not one of 0/1/true/false"
        )


class RaggedRow(DnfnetError):
    def __init__(self, row, expected, got):
        self.row = row
        super().__init__(f"row {row} has {got} cells, expected {expected}")


class EmptyDataset(DnfnetError):
    pass


class DuplicateFeatureName(DnfnetError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"duplicate feature name {name!r}")


class InsufficientClassSamples(DnfnetError):
    def __init__(self, label, count, minimum):
        self.label = label
        super().__init__(f"class {label} has {count} samples, need at least {minimum}")


class DegenerateDataset(DnfnetError):
    pass


class IndexOutOfRange(DnfnetError):
    def __init__(self, index, limit):
        self.index = index
        super().__init__(f"feature index {index} out of range [0, {limit})")


class DuplicateIndex(DnfnetError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"feature index {index} given more than once")


# --- formulas ---

class FormulaSyntaxError(DnfnetError):
    def __init__(self, position, message):
        self.position = position
        super().__init__(f"syntax error at position {position}: {message}")


class UnknownFeature(DnfnetError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"unknown feature name {name!r}")


# --- model / evaluation ---

class DimensionMismatch(DnfnetError):
    def __init__(self, expected, got):
        super().__init__(f"expected dimension {expected}, got {got}")


class NonFiniteLoss(DnfnetError):
    def __init__(self, epoch, batch, value):
        self.epoch = epoch
        self.batch = batch
        super().__init__(
            f"training diverged: loss={value} at epoch {epoch}, batch {batch}; "
            "reduce the learning rate"
        )


class EmptyInput(DnfnetError):
    pass


class EmptyCounts(DnfnetError):
    pass


# --- explanation aggregation ---

class NoSamplesPredictedAsClass(DnfnetError):
    def __init__(self, class_id):
        self.class_id = class_id
        super().__init__(f"no samples predicted as class {class_id}")


class EmptySet(DnfnetError):
    pass


class TooManyRecords(DnfnetError):
    def __init__(self, count, limit):
        self.count = count
        self.limit = limit
        super().__init__(
            f"{count} local-explanation records exceed the power-set limit {limit}"
        )


# --- synthetic generation ---

class UnsatisfiablePlant(DnfnetError):
    pass


class DimensionTooLarge(DnfnetError):
    def __init__(self, d, limit):
        self.d = d
        super().__init__(f"exhaustive evaluation capped at d <= {limit}, got d={d}")
