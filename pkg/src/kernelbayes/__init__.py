"""Empirical kernel Bayes rule: kernels, posterior operators, classifiers, sweeps."""

from .kernels import (
    DeltaKernel,
    GaussianKernel,
    GramMatrix,
    delta_kernel,
    gaussian_kernel,
    gram_matrix,
    kernel_vector,
)
from .numerics import (
    SingularMatrixError,
    default_pinv_rtol,
    pseudo_inverse,
    singular_values,
    solve_ridge,
)
from .embedding import (
    KbrWeights,
    PosteriorOperator,
    PriorMixture,
    class_prior,
    conditional_embedding_weights,
    kbr_weights,
    posterior_embedding_weights,
    posterior_expectation,
    posterior_operator_pinv,
    posterior_operator_ridge,
    prior_mean_vector,
)
from .classifiers import (
    DegenerateInputError,
    GaussianClassStats,
    LabeledSample,
    PosteriorProbs,
    br_posterior,
    br_th_posterior,
    fit_gaussian_stats,
    gaussian_density,
    indicator_matrix,
    kbr1_posterior,
    kbr2_posterior,
)
from .experiments import (
    CLASSIFIER_ORDER,
    DEFAULT_MASTER_SEED,
    ExperimentSpec,
    SweepResult,
    SweepRow,
    generate_training_sample,
    replicate_rng,
    run_grid_sweep,
    run_prior_sweep,
    sample_mvnormal,
    sem,
)
from .diagnostics import (
    ConstantTarget,
    KernelSectionTarget,
    TrialReport,
    gram_nonsingularity_trial,
    limit_identity_check,
    prior_independence_gap,
    rkhs_norm_divergence_probe,
    weights_nonzero_trial,
)

__version__ = "0.1.0"
