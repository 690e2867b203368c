class InertialException(Exception):
    pass


class GameFormatError(InertialException):
    pass


class DimensionMismatch(InertialException):
    pass


class UnboundedSlope(InertialException):
    pass


class StepTooLarge(InertialException):
    pass


class PreconditionViolated(InertialException):
    def __init__(self, message, violations=None):
        super(PreconditionViolated, self).__init__(message)
        self.violations = list(violations or [])


class BoundViolation(InertialException):
    pass


class NonSeparable(InertialException):
    pass


class InvalidGraph(InertialException):
    pass


class ZeroCMin(InertialException):
    pass


class ZeroLipschitz(InertialException):
    pass


class InvalidSpec(InertialException):
    pass


class InvalidPoint(InertialException):
    pass
