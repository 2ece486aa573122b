"""Exception and warning types raised across the package."""


class ToricError(ValueError):
    """Base class for all domain errors."""


class SpecError(ToricError):
    """Malformed input specification (JSON fan or H-representation)."""


# --- lattice_fan -----------------------------------------------------------

class NonPrimitiveRayWarning(UserWarning):
    """A ray generator was divided by the gcd of its coordinates."""


class NotStronglyConvex(ToricError):
    pass


class OverlappingCones(ToricError):
    pass


class IncompleteFan(ToricError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class InconsistentConeData(ToricError):
    pass


class NotStrictlyConcave(ToricError):
    def __init__(self, message, cone=None, ray=None):
        super().__init__(message)
        self.cone = cone
        self.ray = ray


class EmptyInterior(ToricError):
    pass


class NotInteriorPoint(ToricError):
    pass


class ZeroSlope(ToricError):
    pass


# --- kahler ----------------------------------------------------------------

class DegenerateLattice(ToricError):
    pass


class NotInterior(ToricError):
    pass


class NoConvergence(ToricError):
    pass


class NonpositiveModulus(ToricError):
    pass


# --- smoothing -------------------------------------------------------------

class NegativeInput(ToricError):
    pass


class EpsilonOutOfRange(UserWarning):
    """Smoothing parameter >= 1: the closed-form inflection point is not used."""


class PreconditionFailed(ToricError):
    pass


# --- dynamics --------------------------------------------------------------

class NoStratumPoint(ToricError):
    pass


class NotOnFamily(ToricError):
    pass


# --- contact_verify --------------------------------------------------------

class ToleranceExceeded(ToricError):
    def __init__(self, message, worst=None):
        super().__init__(message)
        self.worst = worst


class InadmissibleEpsilon(ToricError):
    pass


class HypothesisUnmet(ToricError):
    """The PL function is not negative on every ray generator."""


class NonPositive(ToricError):
    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point
