"""Exception hierarchy shared by all modules."""


class LimopError(Exception):
    """Base class for every error raised by :mod:`limop`."""


class NotElliptic(LimopError, ValueError):
    """A symbol vanishes, or nearly vanishes, somewhere on its curve."""

    def __init__(self, message, margin=None):
        super().__init__(message)
        self.margin = margin


class RootOnCircle(LimopError, ValueError):
    """A polynomial root lies on the unit circle within tolerance."""


class CurveUnderResolved(LimopError, ValueError):
    """Adjacent curve samples are too far apart in argument to trust a winding count."""


class TailNotDecayed(LimopError, ValueError):
    """The sampled continuous symbol has not settled near its value at infinity."""


class NotFredholm(LimopError):
    """The operator could not be certified Fredholm."""

    def __init__(self, message, member=None, margin=None):
        super().__init__(message)
        self.member = member
        self.margin = margin


class InternalDisagreement(LimopError, RuntimeError):
    """Two limit operators from the same half-line produced different indices."""


class UnsupportedCoefficientClass(LimopError, TypeError):
    """A coefficient kind without computable behaviour at infinity."""


class NotStabilized(LimopError):
    """Finite-section rank counts did not settle within the configured sizes."""

    def __init__(self, message, counts=None):
        super().__init__(message)
        self.counts = counts or []


class TailTooFat(LimopError, ValueError):
    """A kernel's L1 tail cannot be pushed below the defect target by a band cut."""


class SpecError(LimopError, ValueError):
    """Malformed or schema-invalid operator spec file."""

    def __init__(self, message, line=None, path=None):
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
        self.line = line
        self.path = path
