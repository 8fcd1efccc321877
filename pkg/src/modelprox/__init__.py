"""modelprox: adaptive first-order methods built on inexact two-point models.

The package follows one uniform pattern: a *model* (f_delta, psi_delta)
with declared errors and convexity parameters, a Bregman *prox setup*, and
adaptive solvers whose every step is a certified inexact argmin.  Shipped
solvers: the plain adaptive gradient method, the momentum variant (with
conditional-gradient and restart modes), and extragradient loops for
variational inequalities and saddle points (with strongly monotone
restarts).
"""

from ._kernels import NUMBA_ENABLED
from .errors import (
    DomainError,
    ErrorBudgetViolated,
    GapNotComputable,
    GroundTruthRequired,
    InnerSolveFailed,
    IterationBudgetExceeded,
    LineSearchStalled,
    MaxInnerIterations,
    ModelProxError,
    OmegaMissing,
    OutputUnwritable,
    ProxNotStronglyConvex,
    SingularDesign,
    UnboundedSubproblem,
    UnknownProblem,
    UnknownSolver,
    UnsupportedSet,
)
from .fgm import (
    FGMConfig,
    FGMRestartRun,
    alpha_next,
    fgm_growth_lower_bound,
    fgm_master_bound,
    fgm_restart_solve,
    fgm_solve,
    universal_fw_solve,
)
from .gm import GMConfig, SolverRun, gm_oracle_budget, gm_solve, gm_theoretical_bound
from .mirror_prox import (
    MPConfig,
    MPRun,
    RestartConfig,
    RestartMPRun,
    mirror_prox_solve,
    mp_gap_bound,
    restarted_mirror_prox,
    saddle_solve,
)
from .model import (
    ObjectiveModel,
    SaddleModel,
    ValidationReport,
    VIModel,
    entropy_term,
    holder_smoothness_constant,
    model_composite,
    model_from_gradient,
    saddle_model_composite,
    validate_model,
    vi_model_from_operator,
)
from .problems import (
    ProblemInstance,
    instance_rng,
    make_best_approximation,
    make_covering_circle,
    make_d_optimal,
    make_fermat_torricelli,
    make_instance,
    make_quartic_relative,
    make_resource_sharing,
    make_traffic_composite,
    save_instance,
    verify_saved_instance,
)
from .prox import (
    ArgminCertificate,
    EntropySetup,
    EuclideanSetup,
    LogBarrierSetup,
    Power4Setup,
    ProxSetup,
    ResourceSharingSetup,
    SubproblemPart,
    bregman,
    composite_argmin,
    divergence_diameter_bound,
    linear_minimization_oracle,
    mirror_argmin,
)
from .sets import (
    CappedSimplex,
    EuclideanBall,
    FeasibleSet,
    NonnegativeBall,
    ProductSet,
    Simplex,
    as_point,
)

__version__ = "0.1.0"
