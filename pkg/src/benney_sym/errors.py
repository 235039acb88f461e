"""Exception hierarchy shared by the symbolic and numeric modules."""


class BenneySymError(Exception):
    """Base class for every error raised by this package."""


class MalformedInput(BenneySymError, ValueError):
    """Text or JSON that cannot be parsed into the expected object."""


class NonHomogeneousGradient(BenneySymError):
    pass


class GradientMismatch(BenneySymError):
    pass


class ExactnessFailure(BenneySymError, AssertionError):
    """An internal consistency check failed; always indicates a bug."""


class HorizonTooSmall(BenneySymError, ValueError):
    pass


class HorizonExceeded(BenneySymError):
    pass


class FormMismatch(BenneySymError, TypeError):
    pass


class UnsupportedVariable(BenneySymError, ValueError):
    pass


class DegreeMismatch(BenneySymError, ValueError):
    pass


class MissingH(BenneySymError, KeyError):
    pass


class BlowUp(BenneySymError, ArithmeticError):
    pass


class UnsupportedGenerator(BenneySymError, ValueError):
    pass
