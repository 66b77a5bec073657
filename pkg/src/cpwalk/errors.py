"""Exception hierarchy shared by every module."""


class CPWalkError(Exception):
    pass


class InconsistentRotation(CPWalkError):
    """A dart has no reverse dart (u lists v but v does not list u)."""


class NonPlanarEuler(CPWalkError):
    """Euler characteristic of a claimed sphere map is not 2 per component."""


class CoreEmpty(CPWalkError):
    pass


class NonFiniteTransport(CPWalkError):
    pass


class EmptyMap(CPWalkError):
    pass


class BoundaryPoint(CPWalkError):
    """Hyperbolic distance to a point on the unit circle is infinite."""


class NotInsideDisc(CPWalkError):
    pass


class DegenerateTriangle(CPWalkError):
    pass


class NoConvergence(CPWalkError):
    def __init__(self, message, defect=float("nan"), iters=0):
        super().__init__(message)
        self.defect = defect
        self.iters = iters


class LayoutInconsistent(CPWalkError):
    pass


class TooFewPoints(CPWalkError):
    pass


class IsolatedVertex(CPWalkError):
    pass


class SingularSystem(CPWalkError):
    pass


class TrajectoryExitsWindow(CPWalkError):
    pass


class EmptyInput(CPWalkError):
    pass


class UnconvergedPacking(CPWalkError):
    pass


class ConfigError(CPWalkError):
    pass
