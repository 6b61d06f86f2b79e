"""Exception hierarchy shared by all hullrom modules.

CLI exit-code mapping: ArgumentError -> 2, numeric/degeneracy errors -> 3,
I/O and parse errors -> 4.
"""


class HullromError(Exception):
    pass


class ArgumentError(HullromError, ValueError):
    """Bad caller input: wrong sizes, out-of-range indices, invalid options."""


class NumericError(HullromError):
    """Degenerate or unstable numerics that invalidate a result."""


class GeometryError(NumericError):
    """Mesh does not satisfy a geometric precondition (e.g. not watertight)."""


class DegenerateFunctionError(NumericError):
    """All sampled gradients vanish; no active subspace exists."""


class UnstableModelError(NumericError):
    """A DMD model carries a divergent mode with non-negligible amplitude."""

    def __init__(self, message, eigenvalues=()):
        super().__init__(message)
        self.eigenvalues = list(eigenvalues)


class NoSharedSubspaceError(NumericError):
    """The stacked shared-subspace system has no acceptable solution."""

    def __init__(self, message, residual=None, condition=None):
        super().__init__(message)
        self.residual = residual
        self.condition = condition


class EmptyFeasibleSetError(NumericError):
    """No sample satisfies the constraint band; downstream fit impossible."""


class CampaignError(NumericError):
    """Too many per-sample failures to trust the campaign output."""


class ParseError(HullromError):
    """Malformed input file; message names the offending location."""
