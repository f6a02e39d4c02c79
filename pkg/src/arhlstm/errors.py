"""Exception hierarchy shared by every module.

Each family carries the CLI exit code it maps to.
"""


class ArhLstmError(Exception):
    exit_code = 1


class ConfigError(ArhLstmError, ValueError):
    exit_code = 2


class DataError(ArhLstmError, ValueError):
    exit_code = 3


class DimensionError(DataError):
    """Shapes or grids of two objects do not agree."""


class BasisError(DataError):
    """Operator used in a basis where the operation is undefined."""


class DegenerateRangeError(DataError):
    pass


class DivisionHazardError(DataError):
    pass


class GapError(DataError):
    """Missing calendar days in a daily series."""

    def __init__(self, missing):
        self.missing = list(missing)
        shown = ", ".join(str(d) for d in self.missing[:10])
        more = "" if len(self.missing) <= 10 else f" (+{len(self.missing) - 10} more)"
        super().__init__(f"{len(self.missing)} missing day(s): {shown}{more}")


class NumericalError(ArhLstmError, ArithmeticError):
    exit_code = 4


class SymmetryError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    def __init__(self, message, iterations=None):
        self.iterations = iterations
        if iterations is not None:
            message = f"{message} (after {iterations} iterations)"
        super().__init__(message)


class InsufficientDataError(NumericalError):
    pass


class TruncationError(NumericalError):
    def __init__(self, message, max_admissible):
        self.max_admissible = max_admissible
        super().__init__(f"{message}; largest admissible k_n is {max_admissible}")


class RankError(NumericalError):
    pass
