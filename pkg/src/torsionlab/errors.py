"""Exception hierarchy shared by all torsionlab modules.

Every error carries an ``exit_code`` so the CLI can map failures onto its
documented process exit codes: 2 = validation, 3 = numerical, 4 = io.
"""


class TorsionLabError(Exception):
    exit_code = 3


class ValidationError(TorsionLabError):
    exit_code = 2


class NumericalError(TorsionLabError):
    exit_code = 3


class IoFailure(TorsionLabError):
    exit_code = 4


# --- chain complexes ---

class MalformedComplex(ValidationError):
    """d o d is not zero beyond the construction tolerance."""


class NotAcyclic(NumericalError):
    """Operation requires an acyclic complex."""


class IndexOutOfRange(ValidationError):
    pass


class DegreeMismatch(ValidationError):
    pass


class NotChainMap(ValidationError):
    pass


# --- base atlases and forms ---

class UnsupportedKind(ValidationError):
    pass


class ResolutionTooSmall(ValidationError):
    pass


class DegreeOverflow(ValidationError):
    pass


# --- families ---

class AcyclicityLost(NumericalError):
    """A sampled fiber complex failed the acyclicity bound.

    ``point`` names the worst offending sample (chart name, grid index).
    """

    def __init__(self, msg, point=None, certificate=None):
        super().__init__(msg)
        self.point = point
        self.certificate = certificate


class QuadratureNonConvergent(NumericalError):
    pass


class InconsistentStrata(ValidationError):
    pass


class InvalidRoot(ValidationError):
    pass


# --- characteristic classes ---

class DomainError(ValidationError):
    pass


class ProjectorDrift(NumericalError):
    pass


class UncancelledBoundary(ValidationError):
    pass


# --- tube-type functions ---

class NoLimit(NumericalError):
    pass


class SingularZeroLevel(NumericalError):
    def __init__(self, msg, point=None):
        super().__init__(msg)
        self.point = point


class AtlasMismatch(ValidationError):
    pass


class EigenvalueGapLost(NumericalError):
    pass


class FrameTransportUnstable(NumericalError):
    pass


# --- generating functions ---

class NewtonDivergence(NumericalError):
    def __init__(self, msg, point=None):
        super().__init__(msg)
        self.point = point


class TransversalityLost(NumericalError):
    def __init__(self, msg, point=None):
        super().__init__(msg)
        self.point = point


class ProbeFailure(NumericalError):
    pass


class NonpositiveSeparation(ValidationError):
    pass
