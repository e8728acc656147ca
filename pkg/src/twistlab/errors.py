"""Exception hierarchy shared by all twistlab modules."""


class TwistlabError(Exception):
    """Base class for every error raised by the library."""


class NotPrime(TwistlabError, ValueError):
    pass


class DegreeTooLarge(TwistlabError, ValueError):
    pass


class BudgetExceeded(TwistlabError, RuntimeError):
    """A table or enumeration would exceed the configured size cap."""


class MixedParameters(TwistlabError, ValueError):
    pass


class PlaceZero(TwistlabError, ValueError):
    """The polynomial X defines the place 0, which is split in W_{d,q}."""


class NoPerfectMatching(TwistlabError, RuntimeError):
    pass


class NotSquarefree(TwistlabError, ValueError):
    pass


class OrderIncompatible(TwistlabError, ValueError):
    pass


class SlopeDivisibleByP(TwistlabError, ValueError):
    pass


class BadCharacteristic(TwistlabError, ValueError):
    pass


class IdenticallySingular(TwistlabError, ValueError):
    pass


class NonMinimalModel(TwistlabError, ValueError):
    pass


class SlopeRegime(TwistlabError, ValueError):
    """The rank formula only gives an inequality in this slope regime."""


class NotPrimitive(TwistlabError, ValueError):
    pass


class ConsistencyFailure(TwistlabError, RuntimeError):
    """Reconstructed L-polynomial failed the degree or purity postcondition."""


class PurityFailure(TwistlabError, RuntimeError):
    pass


class KExceedsD(TwistlabError, ValueError):
    pass


class DTooSmall(TwistlabError, ValueError):
    pass


class ConfigParse(TwistlabError, ValueError):
    pass
