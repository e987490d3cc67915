class DSKFError(Exception):
    """Base class for errors raised by this package."""


class SizeMismatchError(DSKFError, ValueError):
    pass


class EmptyInputError(DSKFError, ValueError):
    pass


class NotAlignedError(DSKFError, ValueError):
    pass


class SelectionError(DSKFError, ValueError):
    pass


class DataError(DSKFError, ValueError):
    """Problems with user supplied data files."""


class EmptyDatasetError(DataError):
    pass


class NonNumericFeatureError(DataError):
    pass


class MissingLabelColumnError(DataError):
    pass
