"""Exception types raised by mibeam."""


class MIBeamError(Exception):
    """Base class for all package errors."""


class SingularMatrix(MIBeamError, ArithmeticError):
    """A matrix that must be inverted is (numerically) singular."""


class NotHermitian(MIBeamError, ValueError):
    """A matrix passed to a Hermitian routine is not Hermitian."""


class CoincidentCoils(MIBeamError, ValueError):
    """Two distinct coils share the same center point."""


class ZeroDrive(MIBeamError, ValueError):
    """The transmit drive vector is identically zero."""


class DegenerateIteration(MIBeamError, ArithmeticError):
    """Every transmitter coil carries zero current in the iterative update."""


class AllZeroPriorities(MIBeamError, ValueError):
    """No receiver has a positive priority weight."""


class ParseError(MIBeamError, ValueError):
    """A scenario file is malformed.

    Parameters
    ----------
    message : str
        What went wrong.
    field : str, optional
        Dotted path of the offending field, e.g. ``receivers[1].axis``.
    line : int, optional
        1-based line number in the source file, when known.
    """

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
