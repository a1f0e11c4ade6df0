"""Quadratic forms of discretely sampled Levy-driven moving averages.

Library layout:

* :mod:`cmaqf.levy` -- parametric mean-zero drivers and seeded streams.
* :mod:`cmaqf.kernels` -- moving-average kernels and grid sampling.
* :mod:`cmaqf.covariance` -- star convolution and covariance quadrature.
* :mod:`cmaqf.conditions` -- numerical checks of the limit-theorem assumptions.
* :mod:`cmaqf.variance` -- asymptotic variances and the fourth-moment oracle.
* :mod:`cmaqf.simulate` -- path simulation and the empirical statistics.
* :mod:`cmaqf.montecarlo` -- replicated Gaussian-limit experiments.
* :mod:`cmaqf.inference` -- sample-autocovariance and least-squares demos.
* :mod:`cmaqf.cli` -- config-driven batch front door.
"""

from .levy import BilateralGamma, BrownianMotion, CompoundPoissonNormal, cumulants, sample_increments, stream
from .kernels import (
    AbsKernel,
    CarmaKernel,
    ExponentialOU,
    FractionalNoise,
    KernelGrid,
    LinComboKernel,
    PowAbsKernel,
    SddeKernel,
    TabulatedKernel,
    build_carma,
    eval_kernel,
    grid_sample,
    solve_sdde_kernel,
)
from .covariance import (
    BStarGamma,
    FiniteSupport,
    PowerDecay,
    autocovariance,
    b_star_gamma,
    covariance_lags,
    crosscovariance,
    star_conv,
    star_conv_kernel,
)
from .conditions import CONDITION_SETS, AssumptionCheck, ConditionReport, NormEstimate, check_conditions, lp_norm_sequence
from .variance import VarianceReport, autocov_clt_sigma, eta2_qn, eta2_sn, expected_qn, expected_sn, fourth_moment
from .simulate import (
    PathConfig,
    SamplePath,
    compute_qn,
    compute_sn,
    ls_derivative,
    normalized_statistic,
    sample_autocov,
    simulate_pair,
    simulate_path,
    stochastic_integrals,
    stochastic_integrals_joint,
)
from .montecarlo import ExperimentConfig, LsSpec, McReport, ks_distance, run_experiment
from .inference import AutocovExperiment, autocov_clt_check, ls_clt_check, poly_map, yule_walker

__version__ = "0.1.0"
