"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: config/input problems exit 2,
ask/tell protocol violations exit 3, numerical failures exit 4.
"""


class FuncboError(Exception):
    """Base class for all funcbo errors."""


class ShapeError(FuncboError):
    """Operands live on different grids or have mismatched dimensions."""


class InputError(FuncboError):
    """An argument is invalid (non-finite, out of range, wrong kind)."""


class ConfigError(FuncboError):
    """A configuration file is malformed or contains an unknown key."""


class ProtocolError(FuncboError):
    """The ask/tell protocol was violated (e.g. suggest before tell)."""


class NumericalError(FuncboError):
    """A numerical routine failed (e.g. Cholesky breakdown)."""
