"""Exception hierarchy shared by all modules."""


class SkewConleyError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class Diverged(SkewConleyError):
    """A trajectory exceeded the blow-up bound (finite-time escape)."""

    exit_code = 3


class UnknownName(SkewConleyError, KeyError):
    exit_code = 1


class DegenerateProbe(SkewConleyError):
    exit_code = 3


class TooManyBoxes(SkewConleyError):
    exit_code = 2


class IncompatibleSampling(SkewConleyError):
    exit_code = 1


class FormatVersionMismatch(SkewConleyError):
    exit_code = 4


class CorruptHeader(SkewConleyError):
    exit_code = 4


class NotForwardInvariant(SkewConleyError):
    exit_code = 1


class CycleInTransientSet(SkewConleyError):
    exit_code = 1


class NotFound(SkewConleyError):
    """No chain was found within the search budget (not a proof of absence)."""

    exit_code = 1


class NotNested(SkewConleyError):
    exit_code = 1


class ConfigError(SkewConleyError):
    exit_code = 1
