"""
Exception hierarchy shared by every hankellab module.
Each class carries the process exit code the CLI returns for it.
"""


class HankelLabError(Exception):
    exit_code = 1


class ConfigurationError(HankelLabError):
    exit_code = 3


class InvalidParameterError(HankelLabError, ValueError):
    exit_code = 4


class DimensionMismatchError(HankelLabError, ValueError):
    exit_code = 5


class MalformedFileError(HankelLabError):
    exit_code = 6


class QuadratureResolutionError(InvalidParameterError):
    exit_code = 7


class HermitianViolationError(HankelLabError):
    exit_code = 8


def require_alpha(alpha, positive: bool = True, allow_zero: bool = False) -> float:
    """Validate a fractional order and return it as float"""
    try:
        value = float(alpha)
    except (TypeError, ValueError):
        raise InvalidParameterError(f"alpha must be a real number, got {alpha!r}")
    if value != value or value in (float("inf"), float("-inf")):
        raise InvalidParameterError(f"alpha must be finite, got {value}")
    if positive:
        if allow_zero and value < 0:
            raise InvalidParameterError(f"alpha must be >= 0, got {value}")
        if not allow_zero and value <= 0:
            raise InvalidParameterError(f"alpha must be > 0, got {value}")
    return value


def require_shift(l) -> int:
    """Integer shift order l >= 1"""
    if isinstance(l, bool) or int(l) != l or int(l) < 1:
        raise InvalidParameterError(f"shift order l must be an integer >= 1, got {l!r}")
    return int(l)


def require_truncation(N) -> int:
    if isinstance(N, bool) or int(N) != N or int(N) < 0:
        raise InvalidParameterError(f"truncation N must be an integer >= 0, got {N!r}")
    return int(N)
