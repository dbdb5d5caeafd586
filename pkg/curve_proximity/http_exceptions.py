class CurveProximityException(Exception):
    pass


class InvalidParameterException(CurveProximityException):
    pass


class InvalidCurveException(CurveProximityException):
    pass


class InvalidEllipseException(CurveProximityException):
    pass


class MalformedInputException(CurveProximityException):
    pass


class InvalidConfigurationException(CurveProximityException):
    pass


class OracleCapExceeded(CurveProximityException):
    pass


class SampleBudgetExceeded(CurveProximityException):
    def __init__(self, message, partial=None):
        super().__init__(message)
        # SolveResult built from the state of the search when the budget ran out
        self.partial = partial
