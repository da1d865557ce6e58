#! encoding = utf-8

""" Exceptions raised by the PyBiLQR library.
    The library raises, the command line layer maps them to exit codes.
"""


class BiLQRError(Exception):
    """ Base class of all PyBiLQR errors """


class DimensionMismatch(BiLQRError, ValueError):
    """ Operand shapes do not conform """


class StructureViolation(BiLQRError, ValueError):
    """ p1 not Hermitian or p2 not complex symmetric within tolerance """

    def __init__(self, msg, correction=0.):
        super().__init__(msg)
        self.correction = correction


class NotPositiveDefinite(BiLQRError, ValueError):
    """ A matrix that must be positive definite is not """


class InvalidWeights(NotPositiveDefinite):
    """ Q or R is not Hermitian positive definite """


class SingularMatrix(BiLQRError, ArithmeticError):
    """ A matrix that must be inverted is numerically singular """


class SingularBimatrix(SingularMatrix):
    """ The embedding of a bimatrix is numerically singular """


class SolverError(BiLQRError, RuntimeError):
    """ Fixed-point iteration failure.
    Attributes
        iterations: int     number of steps taken
        norm: float         norm of the last iterate
        step: float         norm of the last step
    """

    def __init__(self, msg, iterations=0, norm=float('nan'), step=float('nan')):
        super().__init__(msg)
        self.iterations = iterations
        self.norm = norm
        self.step = step


class NotConvergent(SolverError):
    """ max_iter reached before the step tolerance was met """


class Diverged(SolverError):
    """ Iterate norm exceeded the divergence bound,
    which in practice means the system is not stabilizable.
    """


class InputError(BiLQRError, ValueError):
    """ Input document cannot be parsed or validated """

    def __init__(self, field, msg):
        super().__init__(f'{field}: {msg}')
        self.field = field
