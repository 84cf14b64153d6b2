"""Exception types raised by sbpwave.

Every error carries a short machine-readable ``code`` used by the command line
front end.  Configuration problems derive from :class:`ConfigError`; failures
that only show up while integrating derive from :class:`NumericalError`.
"""


class SbpWaveError(Exception):
    code = "SbpWaveError"


class ConfigError(SbpWaveError, ValueError):
    code = "ConfigError"


class NumericalError(SbpWaveError, ArithmeticError):
    code = "NumericalError"


class UnsupportedOrder(ConfigError):
    code = "UnsupportedOrder"

    def __init__(self, order, supported=(2, 4, 6)):
        self.order = order
        self.supported = tuple(supported)
        super().__init__(f"order {order!r} not supported; choose one of {self.supported}")


class GridTooSmall(ConfigError):
    code = "GridTooSmall"

    def __init__(self, n, minimum):
        self.n = n
        self.minimum = minimum
        super().__init__(f"n={n} is too small; need n >= {minimum}")


class DimensionMismatch(ConfigError):
    code = "DimensionMismatch"


class LayoutMismatch(ConfigError):
    code = "LayoutMismatch"


class LengthMismatch(ConfigError):
    code = "LengthMismatch"


class UnsupportedPair(ConfigError):
    code = "UnsupportedPair"


class InvalidSymbol(ConfigError):
    code = "InvalidSymbol"


class NonPositiveError(ConfigError):
    code = "NonPositiveError"


class UnstablePenalty(ConfigError):
    code = "UnstablePenalty"


class RankDeficiencyNotOne(NumericalError):
    code = "RankDeficiencyNotOne"

    def __init__(self, deficiency):
        self.deficiency = deficiency
        super().__init__(f"rank deficiency is {deficiency}, coupling needs exactly 1")


class NonFiniteState(NumericalError):
    code = "NonFiniteState"

    def __init__(self, step, t, max_abs):
        self.step = step
        self.t = t
        self.max_abs = max_abs
        super().__init__(
            f"state became non-finite or blew up at step {step} (t={t:.6g}, max|u|={max_abs:.3e})"
        )
