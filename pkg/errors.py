class StructureError(ValueError):
    """Raised when a category, poset, monoid, E-set or relation fails validation.

    `location` points into the offending structure (a JSON path such as
    ``homs.E,F[1]`` or a morphism name) so the CLI can report where the
    problem is.
    """

    def __init__(self, message: str, location: str | None = None):
        super().__init__(message)
        self.location = location

    def __str__(self) -> str:
        base = super().__str__()
        if self.location:
            return f"at {self.location}: {base}"
        return base


class SizeGuardError(ValueError):
    """Raised when an exponential oracle is asked for an input above its guard."""
