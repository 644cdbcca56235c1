"""Exception types shared across the package."""


class DomainError(ValueError):
    """A value lies outside the range an operation accepts."""


class ShapeError(ValueError):
    """Table or strategy dimensions do not agree."""


class BudgetError(ValueError):
    """A table or enumeration would exceed its configured size budget."""

    def __init__(self, what, required, budget):
        self.required = required
        self.budget = budget
        super().__init__(f"{what} needs {required} elements, budget is {budget}")


class GameFormatError(ValueError):
    """A game or code file does not match the expected schema.

    ``path`` names the offending field, e.g. ``probs[3]``.
    """

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


class HypothesisError(ValueError):
    """A game does not satisfy the symmetric-strategy hypotheses."""


class UnboundedPolytopeError(ValueError):
    """Vertex enumeration met a ray, so the input polytope is unbounded."""
