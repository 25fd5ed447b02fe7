"""Exception hierarchy shared by all solver modules."""


class MHDError(Exception):
    """Base class for all solver errors."""


class NonpositiveDensity(MHDError):
    pass


class NonpositivePressure(MHDError):
    pass


class NonpositiveInternalEnergy(MHDError):
    pass


class InadmissibleState(MHDError):
    """An inadmissible state was met during assembly or update.

    Carries optional location info (cell index, quadrature point, stage).
    """

    def __init__(self, message, cell=None, qpoint=None, stage=None):
        super().__init__(message)
        self.cell = cell
        self.qpoint = qpoint
        self.stage = stage


class InadmissibleIC(MHDError):
    pass


class InvalidDomain(MHDError):
    pass


class UnknownProblem(MHDError):
    pass


class UnknownWave(MHDError):
    pass


class UnknownBoundaryMarker(MHDError):
    pass


class SolverFailure(MHDError):
    pass


class NullspaceUnpinned(MHDError):
    pass


class InsufficientHistory(MHDError):
    pass


class ConfigError(MHDError):
    pass
