"""Exception hierarchy.

Two families matter to callers: :class:`ConfigInvalid` (bad user input) and
:class:`NumericalFailure` (a computation could not meet its tolerance). The
command line maps them to exit codes 1 and 2.
"""


class RelmonoError(Exception):
    pass


class ConfigInvalid(RelmonoError, ValueError):
    pass


class NumericalFailure(RelmonoError, ArithmeticError):
    pass


# numerics
class StepUnderflow(NumericalFailure):
    pass


class NonFinite(NumericalFailure):
    pass


class NoConvergence(NumericalFailure):
    pass


class BranchCut(NumericalFailure, ValueError):
    pass


class DegenerateArguments(NumericalFailure, ValueError):
    pass


# family
class OracleMismatch(NumericalFailure):
    pass


class BranchUndefined(NumericalFailure):
    pass


class RamifiedFiber(NumericalFailure, ValueError):
    pass


# topology
class CrowdedPunctures(ConfigInvalid):
    pass


class SheetAmbiguity(NumericalFailure):
    pass


class DisconnectedCover(ConfigInvalid):
    pass


# transport
class RoundingFailure(NumericalFailure):
    pass


class DegenerateFrame(NumericalFailure):
    pass


class BranchMatchAmbiguity(NumericalFailure):
    pass


# monodromy / betti
class NotKernelWord(RelmonoError, ValueError):
    pass


class RegionTouchesPuncture(ConfigInvalid):
    pass
