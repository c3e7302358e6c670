"""
Exception hierarchy shared by the numerical modules and the command line
"""


class BergmanNormError(Exception):
    """Root of every error raised by this package"""


class ParameterError(BergmanNormError, ValueError):
    """Invalid (n, alpha), mismatched dimensions or an invalid run configuration"""


class DomainError(BergmanNormError, ValueError):
    """Argument outside the domain of an operation"""


class DivergenceError(DomainError):
    """The requested quantity is infinite"""


class PreconditionError(BergmanNormError, ValueError):
    """A computational route cannot be used for these arguments"""


class IntegrationError(BergmanNormError, RuntimeError):
    """Numerical integration failed or two routes disagree"""
