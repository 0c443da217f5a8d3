"""Exception hierarchy.

Every error carries a stable ``code`` (the class name) so the CLI can emit
machine-readable failures.
"""


class ExpandolabError(Exception):
    """Base class for all library errors."""

    @property
    def code(self):
        return type(self).__name__


class SingularTransform(ExpandolabError):
    pass


class EmptySingularSet(ExpandolabError):
    pass


class ParameterOutOfRange(ExpandolabError):
    pass


class OutsideDomain(ExpandolabError):
    pass


class BranchBudgetExceeded(ExpandolabError):
    pass


class CellBudgetExceeded(ExpandolabError):
    pass


class NegativeMass(ExpandolabError):
    pass


class EmptyBox(ExpandolabError):
    pass


class NoConvergence(ExpandolabError):
    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class GridMismatch(ExpandolabError):
    pass


class NonFinite(ExpandolabError):
    pass


class ZeroCellMass(ExpandolabError):
    pass


class NonPositiveBeta(ExpandolabError):
    pass


class InvalidConfig(ExpandolabError):
    pass
