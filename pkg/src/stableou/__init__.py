"""Lévy-driven Langevin dynamics: stable samplers, OU paths, M1 distances and first passage."""
from .cadlag_paths import (
    CadlagPath,
    CompletedGraphPolyline,
    completed_graph,
    first_passage,
    m1_distance,
    m1_oscillation_sup,
    m1_whole_line_distance,
    oscillation_M,
    read_path_csv,
    running_supremum,
    uniform_distance,
    write_path_csv,
)
from .fpt_stats import (
    CfCheckSpec,
    FptSampleSet,
    brownian_fpt_cdf,
    cf_convergence_analytic,
    cf_convergence_montecarlo,
    fpt_scaling_experiment,
    ks_statistic,
    simulate_fpt_samples,
    stable_cdf_reference,
    two_sample_ks,
)
from .levy_core import (
    CompoundPoissonPath,
    FiniteJumps,
    LevyDecomposition,
    StableParams,
    char_exponent,
    decompose,
    levy_measure_from_params,
    params_from_levy_measure,
    path_rng,
    sample_compound_poisson_path,
    sample_stable,
)
from .ou_dynamics import (
    DriverPath,
    GridSpec,
    LangevinSpec,
    integrated_ou_cp_exact,
    local_extremum_time,
    simulate_large_friction,
    simulate_vx,
    time_change_map,
)

__version__ = "0.1.0"
