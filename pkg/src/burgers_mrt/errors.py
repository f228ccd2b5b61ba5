"""Exception types raised by the solver and harness."""


class InvalidDimensionError(ValueError):
    pass


class InversionError(ArithmeticError):
    """Moment matrix could not be inverted to the required accuracy."""


class InfeasibleParameterError(ValueError):
    """Requested epsilon/dimension has no admissible fourth-order parameter set."""


class DivergenceError(FloatingPointError):
    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"non-finite populations detected at step {step}")


class SingularDenominatorError(ZeroDivisionError):
    def __init__(self, cell, value):
        self.cell = cell
        self.value = value
        super().__init__(f"|theta| = {abs(value):.3e} below 1e-12 at cell {cell}")


class BesselRangeError(ValueError):
    pass


class ConfigError(ValueError):
    pass
