"""Exact-arithmetic workbench for discrete random matrix experiments.

Core layers:

* ``dist`` — finite-support rational distributions and their jump profiles;
* ``xlinalg`` — exact rank, circuits, row classification, symmetric bordering;
* ``ensembles`` — entry schemes, counter-based seeded streams, matrix samplers;
* ``bounds`` — concentration-inequality and rate bound evaluators;
* ``oracle`` — exhaustive exact-probability computations for tiny instances;
* ``harness`` — seeded Monte Carlo experiments, Wilson intervals, rate fits;
* ``service``/``client``/``cli`` — HTTP service plus the thin CLI on top.
"""

__version__ = "0.1.0"

from .dist import (
    AtomSampler,
    DiscreteDist,
    JumpProfile,
    as_fraction,
    biggest_jump,
    convolve,
    difference_dist,
    dist_from_json,
    dist_to_json,
    kappa_delta_profile,
    levy_concentration,
    sample,
    sample_values,
    scale_dist,
)
from .ensembles import (
    BandedScheme,
    DensityRule,
    EntryScheme,
    GraphScheme,
    IIDScheme,
    SeedSpec,
    SparseBernoulliScheme,
    TableScheme,
    as_stream,
    grow_wigner,
    grow_wigner_rows,
    kappa_n,
    sample_adjacency,
    sample_ginibre,
    sample_wigner,
    scheme_from_json,
)
from .errors import (
    BudgetError,
    ConfigError,
    DegenerateInputError,
    InsufficientDataError,
    SinglabError,
)
from .xlinalg import (
    CircuitReport,
    ExactMatrix,
    RowClassification,
    SingularityClass,
    border_symmetric,
    classify_rows,
    classify_singular,
    degree_threshold,
    in_column_span,
    matrix_from_json,
    matrix_to_json,
    min_circuit_below,
    null_combination,
    rank,
    strong_rank,
)
from .bounds import (
    BoundConstants,
    BoundInput,
    QuadraticBound,
    entropy,
    entropy_beta,
    gamma_kappa,
    ginibre_tail,
    graph_rate,
    kesten_bound,
    kr_bound,
    linear_bound,
    linear_bound_simplified,
    quadratic_bound,
    quadratic_bound_simplified,
    wigner_rate,
)
from .oracle import (
    ExactLaw,
    enumerate_singularity,
    exact_border_law,
    exact_linear_concentration,
    exact_quadratic_concentration,
    exact_rank_process,
    first_row_zero_prob,
    linear_combination_law,
    quadratic_form_law,
    verify_decoupling,
)
from .harness import (
    CheckBoundsConfig,
    ExperimentConfig,
    FitResult,
    SummaryReport,
    SummaryRow,
    check_bounds,
    config_from_json,
    fit_rate,
    graph_experiment,
    mc_singularity,
    run_rank_process,
    wilson_interval,
)

__all__ = [name for name in dir() if not name.startswith("_")]
