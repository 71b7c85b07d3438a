"""sparselab: sparse-vector geometry, restricted isometry constants,
and smallest-singular-value experiments for random matrices."""

__version__ = "0.1.0"

from .ensembles import (  # noqa: F401
    Distribution,
    EnsembleSpec,
    Normalization,
    sample_matrix,
    trial_rng,
    validate_ensemble,
)
from .errors import (  # noqa: F401
    BudgetExceededError,
    ConfigError,
    InfeasibleProblemError,
    InternalInconsistencyError,
    RankDeficiencyError,
    SolverBudgetError,
    SparselabError,
)
from .geometry import (  # noqa: F401
    SparsityParams,
    VectorClass,
    classify,
    covering_bounds,
    dist_to_sparse_sphere,
    head_tail_split,
    sparse_sphere_net,
    sphere_net,
    spread_profile,
)
from .linalg import (  # noqa: F401
    distance_to_colspan,
    restricted_min_sv,
    singular_values,
    unit_normal,
)
from .recovery import basis_pursuit, certified_recovery_check, recovery_experiment  # noqa: F401
from .ric import CT_THRESHOLD, ct_certificate, exact_ric, randomized_ric  # noqa: F401
