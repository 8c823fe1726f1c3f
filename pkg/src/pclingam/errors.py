"""Exception hierarchy shared by all pclingam modules."""

from __future__ import annotations

__all__ = [
    "PclingamError",
    "InvalidArgumentError",
    "InputError",
    "InconsistentOrientationError",
    "ClassTooLargeError",
    "DegenerateDataError",
    "InsufficientDataError",
    "ContractViolationError",
    "NotEquivalentError",
]


class PclingamError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(PclingamError, ValueError):
    """A caller passed an argument outside the operation's domain."""


class InputError(PclingamError, ValueError):
    """External input (CSV/JSON file) could not be parsed or validated."""


class InconsistentOrientationError(PclingamError):
    """A partially directed graph admits no acyclic extension without new colliders."""


class ClassTooLargeError(PclingamError):
    """An equivalence class has more members than the configured cap."""

    def __init__(self, cap: int, size: int | None = None):
        self.cap = cap
        self.size = size
        if size is None:
            msg = f"equivalence class has more than {cap} DAGs"
        else:
            msg = f"equivalence class has {size} DAGs, exceeding the cap of {cap}"
        super().__init__(msg)


class DegenerateDataError(PclingamError):
    """Data is (numerically) singular where a full-rank quantity is required."""


class InsufficientDataError(PclingamError):
    """Too few samples for the requested statistic."""


class ContractViolationError(PclingamError):
    """An input does not satisfy a documented precondition."""


class NotEquivalentError(PclingamError):
    """Two ngDAGs are not distribution-equivalent."""
