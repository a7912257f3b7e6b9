"""Directional manipulability metrics for articulated chains.

Builds manipulability ellipsoids from chain Jacobians and evaluates two
directional summaries: the classical ellipsoid radius and the noise-
robust pseudo radius, together with their analytic sensitivities,
perturbation sweeps, surface meshes, and a synthetic noisy-keypoint
experiment harness.  The hot direction-scan kernels run on a compiled
extension when available, with a bit-identical pure-numpy fallback.
"""

__version__ = "0.1.0"

from pseudoell._kernels import get_backend as kernel_backend
from pseudoell.chain import (
    JointSpec,
    KinematicChain,
    load_chain,
    planar_two_link,
    reduced_arm_model,
    rotation_about,
    save_chain,
)
from pseudoell.ellipsoid import (
    ORTH_TOL,
    Ellipsoid,
    Mesh,
    check_weight_matrix,
    core_matrix,
    ellipsoid_mesh,
    from_core,
    from_jacobian,
    from_radii_axes,
    metric_report,
    projection_lengths,
    pseudo_radius_along,
    radius_along,
    scan_directions,
    write_mesh_obj,
    write_polyline_csv,
)
from pseudoell.errors import (
    ConfigurationSizeError,
    DegenerateDirectionError,
    NumericalError,
    PathInfeasibleError,
    PseudoellError,
    SingularSensitivityError,
    ValidationError,
    WeightMatrixError,
)
from pseudoell.experiment import (
    ExperimentSummary,
    ExperimentTrial,
    KeypointFrame,
    NoiseModel,
    clock_directions,
    estimate_config,
    ground_truth_joint_motion,
    keypoints_from_config,
    run_trials,
    standard_start_configs,
    write_summary_json,
    write_trials_csv,
)
from pseudoell.sensitivity import (
    SensitivityReport,
    SweepGrid,
    analytic_partials,
    finite_difference_partials,
    perturbation_sweep,
    sample_directions,
    write_sweep_csv,
)

__all__ = [
    "__version__",
    "kernel_backend",
    "JointSpec",
    "KinematicChain",
    "load_chain",
    "save_chain",
    "planar_two_link",
    "reduced_arm_model",
    "rotation_about",
    "ORTH_TOL",
    "Ellipsoid",
    "Mesh",
    "check_weight_matrix",
    "core_matrix",
    "ellipsoid_mesh",
    "from_core",
    "from_jacobian",
    "from_radii_axes",
    "metric_report",
    "projection_lengths",
    "pseudo_radius_along",
    "radius_along",
    "scan_directions",
    "write_mesh_obj",
    "write_polyline_csv",
    "PseudoellError",
    "ValidationError",
    "ConfigurationSizeError",
    "WeightMatrixError",
    "NumericalError",
    "SingularSensitivityError",
    "DegenerateDirectionError",
    "PathInfeasibleError",
    "ExperimentSummary",
    "ExperimentTrial",
    "KeypointFrame",
    "NoiseModel",
    "clock_directions",
    "estimate_config",
    "ground_truth_joint_motion",
    "keypoints_from_config",
    "run_trials",
    "standard_start_configs",
    "write_summary_json",
    "write_trials_csv",
    "SensitivityReport",
    "SweepGrid",
    "analytic_partials",
    "finite_difference_partials",
    "perturbation_sweep",
    "sample_directions",
    "write_sweep_csv",
]
