"""Exception types shared across the package."""


class TorusGreenError(Exception):
    """Base class for all package-specific failures."""


class NonPositiveImaginaryPart(TorusGreenError):
    """The torus modulus must lie in the open upper half plane."""


class PoleAtLattice(TorusGreenError):
    """A quantity with a pole or zero at lattice points was requested there."""


class Unconverged(TorusGreenError):
    """A series lost too many digits to cancellation or hit its term cap."""


class HalfPeriodInput(TorusGreenError):
    """The duplication identity degenerates where p'(z) vanishes."""


class QuadratureNotConverged(TorusGreenError):
    """Mesh refinement did not stabilize the cell integral."""


class BracketFailure(TorusGreenError):
    """A root bracket did not enclose a sign change."""


class CountViolation(TorusGreenError):
    """More critical points were found than the theory allows."""


class NoConvergence(TorusGreenError):
    """Newton sweeps at two resolutions disagree about the critical set."""


class InconsistentComparison(TorusGreenError):
    """Independent orderings of the half period values disagree."""


class NotInExtraRegime(TorusGreenError):
    """The rhombic torus has only the three half period critical points."""


class NotACriticalPoint(TorusGreenError):
    """The developing map construction needs a genuine critical point."""


class HalfPeriodBranch(TorusGreenError):
    """Half periods are fixed by the sign flip and give no developing map."""


class NoExtraCriticalPoint(TorusGreenError):
    """The torus carries no extra critical point pair, so no such solution."""


class ConstructionInconsistent(TorusGreenError):
    """An internal identity of the mean field construction failed numerically."""
