"""Exception hierarchy shared by all reebkit modules."""


class ReebkitError(Exception):
    """Base class for every domain error raised by reebkit."""


# -- Seifert data -------------------------------------------------------------

class InvalidInvariants(ReebkitError, ValueError):
    pass


class NonCoprimePair(InvalidInvariants):
    def __init__(self, index, pair=None):
        self.index = index
        self.pair = pair
        msg = f"NonCoprimePair({index})"
        if pair is not None:
            msg += f": gcd{tuple(pair)} != 1"
        super().__init__(msg)


class ZeroAlphaPair(InvalidInvariants):
    def __init__(self, index, pair=None):
        self.index = index
        self.pair = pair
        super().__init__(f"ZeroAlphaPair({index}): alpha must be positive, got {pair}")


class NonCoprimeInput(InvalidInvariants):
    pass


class NonNegativeEulerNumber(ReebkitError, ValueError):
    pass


# alias used by besse_volume, which checks the same condition on a bare rational
NonNegativeEuler = NonNegativeEulerNumber


class NonPositivePeriod(ReebkitError, ValueError):
    pass


class InternalConsistencyFailure(ReebkitError, AssertionError):
    """An invariant that holds on all valid input failed: a bug, not bad input."""


# -- spectra ------------------------------------------------------------------

class Unbounded(ReebkitError, ValueError):
    pass


class NonPositiveVolume(ReebkitError, ValueError):
    pass


class NonCoprime(InvalidInvariants):
    pass


class Unordered(ReebkitError, ValueError):
    pass


class SmoothSphereCase(ReebkitError, ValueError):
    pass


# -- Reeb dynamics --------------------------------------------------------------

class DegenerateContactForm(ReebkitError, ArithmeticError):
    pass


class StepSizeUnderflow(ReebkitError, ArithmeticError):
    pass


class LeftChartDomain(ReebkitError, ValueError):
    pass


class NoConvergence(ReebkitError, ArithmeticError):
    pass


class SectionNotTransverse(ReebkitError, ValueError):
    pass


class QuadratureNotConverged(ReebkitError, ArithmeticError):
    pass


class FactorNotPositive(ReebkitError, ValueError):
    pass


class TransversalityViolated(ReebkitError, ValueError):
    pass


# -- surfaces -------------------------------------------------------------------

class BoundaryEscape(ReebkitError, ValueError):
    pass


class NonConstantOnBoundary(ReebkitError, ValueError):
    pass


class NotNormalized(ReebkitError, ValueError):
    pass


class NotQuasiAutonomous(ReebkitError, ValueError):
    pass


class MinimizerOnBoundary(ReebkitError, ValueError):
    pass


class PositiveCalabi(ReebkitError, ValueError):
    pass


class NotSmallEnough(ReebkitError, ValueError):
    pass


# -- harness ----------------------------------------------------------------------

class PredictionFailed(ReebkitError, AssertionError):
    def __init__(self, message, row=None):
        self.row = row
        super().__init__(message)


class HypothesisViolated(ReebkitError, ValueError):
    pass


class ConfigError(ReebkitError, ValueError):
    pass
