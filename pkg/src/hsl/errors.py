"""Error types shared across the package."""


class PlanningError(ValueError):
    """An experiment plan violates a regime hypothesis or threshold."""


class CapabilityError(ValueError):
    """Requested size exceeds what an exact method supports."""


class ResolutionError(ValueError):
    """Lattice too coarse for the requested exact computation."""


class ContractError(ValueError):
    """Input violates a documented structural precondition."""


class StepBudgetError(RuntimeError):
    """Total chain steps would exceed the configured budget."""
