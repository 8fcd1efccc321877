"""Exception types shared across the solver stack."""


class ModelProxError(Exception):
    """Base class for all modelprox errors."""


class DomainError(ModelProxError):
    """A divergence or its gradient was evaluated outside its domain."""


class UnsupportedSet(ModelProxError):
    """The feasible set kind has no closed-form oracle for this operation."""


class UnboundedSubproblem(ModelProxError):
    """A prox subproblem with beta = 0 has no minimizer on the set."""


class MaxInnerIterations(ModelProxError):
    """The inner solver could not certify the requested accuracy in budget."""


class InnerSolveFailed(ModelProxError):
    """An inner prox solve failed inside an outer solver iteration."""


class LineSearchStalled(ModelProxError):
    """The acceptance test kept failing past the per-iteration trial budget."""


class ProxNotStronglyConvex(ModelProxError):
    """A method requiring a 1-strongly-convex prox setup got one without it."""


class ErrorBudgetViolated(ModelProxError):
    """The oracle errors are too large for the requested restart accuracy."""


class IterationBudgetExceeded(ModelProxError):
    """The iteration cap was hit before the stopping rule fired."""


class GapNotComputable(ModelProxError):
    """No closed form or estimator is available for the duality gap."""


class OmegaMissing(ModelProxError):
    """Restarting requires a prox setup with a unit-ball bound on d."""


class SingularDesign(ModelProxError):
    """The design matrix is numerically singular at the starting point."""


class GroundTruthRequired(ModelProxError):
    """A sandwich check was requested without a ground-truth objective."""


class UnknownProblem(ModelProxError):
    """The benchmark spec names a problem that is not registered."""


class UnknownSolver(ModelProxError):
    """The benchmark spec names a solver that is not registered."""


class OutputUnwritable(ModelProxError):
    """The benchmark output directory cannot be created or written."""
