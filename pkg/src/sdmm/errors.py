"""Exception types shared across the package.

The CLI maps these onto exit codes: ParameterError -> 2,
ConstructionError -> 3.
"""


class ParameterError(ValueError):
    """A parameter set is invalid or exceeds a configured size budget."""


class ConstructionError(RuntimeError):
    """A code could not be constructed (exponent collision, point search
    exhausted, singular interpolation matrix, failed security check)."""


class ProtocolError(RuntimeError):
    """A wire frame violated the framing rules (bad magic, bad version,
    truncated payload)."""
