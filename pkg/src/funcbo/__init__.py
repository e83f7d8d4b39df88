"""funcbo: Bayesian optimisation over function spaces.

Optimises an expensive noisy functional by running GP-UCB Bayesian
optimisation on a sequence of low-dimensional random subspaces spanned
by Gaussian-process sample paths, with line-search and random-search
baselines and a reproducible benchmark harness.
"""

from .acquisition import AcqSearchConfig, UcbSchedule, beta, maximise, ucb_value
from .errors import (
    ConfigError,
    FuncboError,
    InputError,
    NumericalError,
    ProtocolError,
    ShapeError,
)
from .gp import (
    GPModel,
    Observation,
    biased_posterior_equivalence_check,
    condition,
    empty_model,
    log_marginal_likelihood,
    posterior,
    posterior_batch,
    rebuild_model,
    sample_on_grid,
    tune_lengthscale,
)
from .gridfn import (
    GridFunction,
    GridSpec,
    grid_coordinates,
    l2_dist_sq,
    l2_inner,
    l2_norm,
    linear_combine,
    read_function_csv,
    rkhs_dist_sq,
    write_function_csv,
)
from .kernels import (
    FunctionalKernelSpec,
    ScalarKernelSpec,
    functional_eval,
    gram_matrix,
    scalar_eval,
)
from .objectives import (
    EffectiveDimObjective,
    MatchingObjective,
    lemma1_intersection_estimate,
)
from .optimizer import (
    OptConfig,
    RunRecord,
    Subspace,
    run_fixed_subspace,
    run_linebo_bernstein,
    run_random_search,
    run_s3bfo,
    simple_regret_err,
)

__version__ = "0.1.0"
