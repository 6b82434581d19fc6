"""Partition-function ratio estimation for discrete Gibbs distributions.

Estimates Z(beta)/Z(0) with the paired product estimator on adaptively
built well-balanced cooling schedules, alongside importance-sampling and
multistage product baselines and brute-force oracles for verification.
"""

from .models import (
    ENUMERATION_GUARD,
    EnumerationGuardError,
    GibbsModel,
    IsingGraph,
    LogPartition,
    constant_model,
    cycle_edges,
    grid_edges,
    interval_length_exact,
    ising_model,
    load_model,
    log_partition_exact,
    log_ratio_exact,
    mean_neg_energy,
    model_from_dict,
    model_to_dict,
    path_edges,
    save_model,
    shift_hamiltonian,
    table_model,
)
from .samplers import (
    DrawCounter,
    SamplerOracle,
    coupling_failure_bound,
    draw_exact,
    draw_mcmc,
    exact_oracle,
    gibbs_distribution,
    mcmc_draw_distribution,
    mcmc_oracle,
    mcmc_tv_error,
    metropolis_sweep_matrix,
)
from .tpa import (
    PointProcess,
    merge_runs,
    thin,
    tpa_run,
    tpa_run_nonnegative,
    tpa_run_nonpositive,
)
from .schedule import (
    CoolingSchedule,
    REGIME_INTEGER_NONNEGATIVE,
    REGIME_INTEGER_NONPOSITIVE,
    REGIME_SHIFTED,
    ScheduleParams,
    initial_estimate,
    regime_for_model,
    select_params,
    well_balanced_schedule,
)
from .estimators import (
    PairedEstimate,
    ParamOverrides,
    bezakova_schedule,
    epsilon_tilde,
    median_boosted_estimate,
    paired_product_estimate,
    paired_replicate,
    product_estimate,
    replicate_count,
    sample_bound_integer,
    sample_bound_shifted,
    single_shot_estimate,
)
from .streams import spawn_streams, stage_stream

__version__ = "0.1.0"
