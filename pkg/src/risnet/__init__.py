"""Scattering-parameter modeling, optimization, and Monte Carlo evaluation
of links aided by a reconfigurable reflecting surface."""

from .architectures import (
    ReactanceParams,
    ScatteringValidation,
    Topology,
    component_budget,
    impedance_network_from_components,
    scattering_from_phases,
    scattering_from_reactance,
    validate_scattering,
    wrap_phase,
)
from .channels import (
    ChannelRealization,
    Geometry2D,
    PathlossParams,
    RicianSpec,
    assemble_general_channel,
    assemble_simplified_channel,
    draw_geometry_realization,
    draw_los_vector,
    draw_rayleigh_vector,
    draw_rician_matrix,
    draw_rician_vector,
    geometric_los_vector,
    pathloss,
    rician_k_from_db,
    trial_rng,
)
from .experiments import (
    ConfigError,
    ExperimentConfig,
    ResultRow,
    ResultTable,
    emit,
    read_result_csv,
    read_result_json,
    run,
    run_bound_tightness,
    run_power_gain_curve,
    run_rician_geometry,
    run_scaling_rayleigh,
)
from .network import (
    IllConditionedError,
    PartitionedScattering,
    ResonanceError,
    TerminationSet,
    Z0_DEFAULT,
    matrix_from_json,
    matrix_to_json,
    reflection_coefficient,
    s_to_z,
    solve_network_waves,
    split_ports,
    z_to_s,
)
from .optimize import (
    Objective,
    SolverConfig,
    SolveResult,
    align_direct_phase,
    objective_gradient,
    solve,
    solve_group,
    solve_single,
)
from .scaling import (
    FULLY_GAIN_LIMIT,
    GainReport,
    element_reduction,
    expected_power_rayleigh,
    fully_connected_bound,
    group_connected_bound,
    group_gain_limit,
    power_gain,
    single_connected_optimum,
)

__version__ = "0.1.0"
