"""Exception hierarchy shared by every module of the package."""


class GenautoError(Exception):
    """Base class; the CLI maps subclasses of this to exit status 1."""


class DimensionMismatch(GenautoError):
    pass


class StochasticityViolation(GenautoError):
    pass


class UnknownLetter(GenautoError):
    pass


class IncompatibleShapes(GenautoError):
    pass


class TableTooLarge(GenautoError):
    pass


class ParseError(GenautoError):
    def __init__(self, message, lineno=None, path=None):
        self.lineno = lineno
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}" if where else message)


class RowIndexOutOfRange(GenautoError):
    pass


class SamplerModeMismatch(GenautoError):
    pass


class MissingFitness(GenautoError):
    pass


class InvalidState(GenautoError):
    pass


class TooManyStates(GenautoError):
    pass


class EmptyNeighborhood(GenautoError):
    pass


class ConfigError(GenautoError):
    pass


class UnknownKey(ConfigError):
    pass


class MissingRequired(ConfigError):
    pass
