"""Exception hierarchy shared across the package.

CLI exit codes map onto these: DataError -> 3, NumericalError -> 4,
argparse usage errors -> 2.
"""


class ModalaugError(Exception):
    """Base class for all package errors."""


class DataError(ModalaugError):
    """Malformed, inconsistent or insufficient input data."""


class NumericalError(ModalaugError):
    """A dense linear-algebra kernel failed to converge."""
