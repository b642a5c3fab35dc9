"""
Exceptions raised by surfseg.

Every exception carries the exit code that the command line maps it to, see
cli_root.main().
"""

from surfseg.defaults import EXIT_CODE_BAD_INPUT, EXIT_CODE_NUMERICAL


class SurfsegError(Exception):
    exit_code = EXIT_CODE_BAD_INPUT


class BadInputError(SurfsegError):
    exit_code = EXIT_CODE_BAD_INPUT


class NumericalError(SurfsegError):
    exit_code = EXIT_CODE_NUMERICAL


class NegativeValue(BadInputError):
    def __init__(self, row, col):
        super().__init__(
            "probability map has a negative value at row %d, col %d"
            % (row, col)
        )
        self.row = row
        self.col = col


class NonFinite(BadInputError):
    def __init__(self, row, col):
        super().__init__(
            "grid has a non-finite value at row %d, col %d" % (row, col)
        )
        self.row = row
        self.col = col


class DegenerateColumn(BadInputError):
    def __init__(self, col):
        super().__init__("column %d of the probability map is all zero" % col)
        self.col = col


class ConstantColumn(BadInputError):
    def __init__(self, col):
        super().__init__("column %d is constant, can't normalize it" % col)
        self.col = col


class NonPositiveSigma(BadInputError):
    def __init__(self, i):
        super().__init__("sigma of column %d is not positive" % i)
        self.i = i


class NegativeWeight(BadInputError):
    def __init__(self, w):
        super().__init__("smoothness weight must be >= 0, got %r" % w)
        self.w = w


class LengthMismatch(BadInputError):
    def __init__(self, what, expected, got):
        super().__init__(
            "%s: expected length %d, got %d" % (what, expected, got)
        )


class TruthOutOfRange(BadInputError):
    def __init__(self, col, value, n_rows):
        super().__init__(
            "truth position %r of column %d is outside [0, %d]"
            % (value, col, n_rows - 1)
        )
        self.col = col


class NotADistribution(BadInputError):
    def __init__(self, col, total):
        super().__init__(
            "column %d sums to %r, expected a probability distribution"
            % (col, total)
        )
        self.col = col


class EmptyRegion(BadInputError):
    pass


class EmptySet(BadInputError):
    pass


class ExtentMismatch(BadInputError):
    pass


class SpecInfeasible(BadInputError):
    pass


class EmptySplit(BadInputError):
    def __init__(self, split):
        super().__init__("the %s split is empty" % split)
        self.split = split


class ConfigError(BadInputError):
    def __init__(self, key, message):
        super().__init__("configuration key '%s': %s" % (key, message))
        self.key = key


class FormatError(BadInputError):
    def __init__(self, path, message):
        super().__init__("%s: %s" % (path, message))
        self.path = path


class SingularNormalEquations(NumericalError):
    pass


class SolveFailure(NumericalError):
    pass


class NonFiniteGradient(NumericalError):
    pass


class TrainingDiverged(NumericalError):
    """
    Raised when a training loss becomes non-finite. The state attribute
    holds a snapshot of the TrainState before the offending update.
    """

    def __init__(self, message, state):
        super().__init__(message)
        self.state = state
