"""Exception hierarchy shared by all modules."""


class KnapExpError(Exception):
    """Base class for every error raised by this package."""


class StructuralError(KnapExpError, ValueError):
    """An instance, item set or file violates a structural invariant."""


class ParameterError(KnapExpError, ValueError):
    """A numeric parameter is outside its admissible range."""


class RefusalError(KnapExpError):
    """A solver or oracle declined work that exceeds a configured cap."""

    def __init__(self, message, cap=None):
        super().__init__(message)
        self.cap = cap


class CapacityError(RefusalError):
    """A dynamic program would need a table larger than the capacity cap."""


class EnumerationCapError(RefusalError):
    """A brute-force enumeration would exceed its item-count cap."""
