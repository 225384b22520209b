"""Exception hierarchy shared by all modules."""


class NilforgeError(Exception):
    """Base class for every error raised by the engine."""


class FieldMismatchError(NilforgeError):
    pass


class GeneratorMismatchError(NilforgeError):
    pass


class DegreeError(NilforgeError):
    pass


class NotClosedError(NilforgeError):
    def __init__(self, message, differential=None):
        super().__init__(message)
        self.differential = differential


class NotInComplexError(NilforgeError):
    pass


class SingularMatrixError(NilforgeError):
    pass


class MasseyUndefinedError(NilforgeError):
    """A Massey product whose definedness conditions fail."""


class ObstructedCellError(MasseyUndefinedError):
    def __init__(self, message, cell, obstruction):
        super().__init__(message)
        self.cell = cell
        self.obstruction = obstruction
