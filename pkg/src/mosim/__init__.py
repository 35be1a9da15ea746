"""Simulation of dependent default times: Marshall-Olkin shock, Arnold and
Levy-frailty samplers, looping-default Markov chains, copula-linked
exponential margins, and the stepwise-simulation bias case study."""

from .copulas import (
    GaussianCopula,
    GumbelCopula,
    MOCopula,
    bivariate_normal_cdf,
    copula_cdf,
    kendall_tau_empirical,
    sample_copula,
    sample_default_times_copula,
)
from .core import IndicatorPath, RandomStream, TimeGrid, path_from_default_times
from .levy_frailty import (
    MultiFactorLFM,
    OneFactorLFM,
    TriggerMode,
    bivariate_mo_from_psi,
    hierarchical_weights,
    sample_lfm,
    sample_lfm_path,
    survival_multi_factor,
    survival_one_factor,
)
from .looping_markov import (
    FreundParams,
    LoopingRateSpec,
    acbve_to_freund,
    build_freund_generator,
    build_looping_generator,
    freund_survival,
    freund_transition_closed_form,
    sample_ctmc_path,
    transition_matrix,
)
from .marshall_olkin import (
    BivariateMOCopulaParams,
    MOParameters,
    alpha_beta_from_rates,
    mo_copula_cdf,
    rates_from_alpha_beta_and_margins,
    sample_mo_arnold,
    sample_mo_shock,
    survival_mo,
)
from .stepwise import (
    CaseStudyConfig,
    biased_limit_two_step,
    estimate_joint_survival,
    run_case_study,
    simulate_stepwise_indicators,
)

__version__ = "0.1.0"
