"""Convex-geometry toolkit and Gauss curvature flow solver on S^1 and S^2."""

from .config import (
    RunConfig,
    build_run_config,
    load_config,
    parse_config_text,
)
from .convex_geometry import (
    ConvexBody,
    ValidationReport,
    ball_body,
    ellipse_body,
    embedding,
    jac_normal_to_ray,
    jac_ray_to_normal,
    load_body,
    offset_ball_body,
    polar_body,
    radial_eval,
    radial_gauss_map,
    radial_norm_field,
    reverse_radial_gauss,
    save_body,
    validate,
)
from .curvature import (
    CurvatureReport,
    arc_density_quadrature,
    curvature_report,
    gauss_curvature,
    integral_curvature_density,
    mean_curvature,
    orlicz_density,
    principal_radii,
    radial_gauss_image_measure,
    total_integral_curvature,
    write_curvature_csv,
)
from .errors import (
    ConfigError,
    ConvexityLostError,
    FlowFailure,
    GridMismatchError,
    InvalidBodyError,
    OrliczFlowError,
    PhiModelError,
    ResolutionError,
    UnsupportedDimensionError,
)
from .flow import (
    FlowConfig,
    FlowState,
    FlowTrace,
    dissipation,
    dual_flow_residual,
    euler_pair,
    flow_speed,
    functional_F,
    functional_F_direct,
    ma_residual,
    radial_speed_check,
    run,
    step,
    support_bounds_from_phi,
    write_plot_series,
    write_trace_csv,
)
from .orlicz_model import (
    PhiModel,
    SolvabilityReport,
    UniquenessReport,
    check_solvability,
    check_uniqueness_condition,
    custom_phi,
    power_phi,
    reciprocal_phi,
    tabulated_phi,
    varphi,
)
from .sphere_grid import (
    DensityField,
    ScalarField,
    SphereGrid,
    build_grid,
    integrate,
    spherical_gradient,
    spherical_hessian,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # grid
    "SphereGrid",
    "ScalarField",
    "DensityField",
    "build_grid",
    "integrate",
    "spherical_gradient",
    "spherical_hessian",
    # bodies
    "ConvexBody",
    "ValidationReport",
    "validate",
    "embedding",
    "radial_norm_field",
    "radial_eval",
    "radial_gauss_map",
    "reverse_radial_gauss",
    "polar_body",
    "jac_ray_to_normal",
    "jac_normal_to_ray",
    "save_body",
    "load_body",
    "ball_body",
    "offset_ball_body",
    "ellipse_body",
    # curvature
    "CurvatureReport",
    "principal_radii",
    "gauss_curvature",
    "mean_curvature",
    "curvature_report",
    "integral_curvature_density",
    "orlicz_density",
    "total_integral_curvature",
    "radial_gauss_image_measure",
    "arc_density_quadrature",
    "write_curvature_csv",
    # weight models
    "PhiModel",
    "power_phi",
    "reciprocal_phi",
    "custom_phi",
    "tabulated_phi",
    "varphi",
    "SolvabilityReport",
    "check_solvability",
    "UniquenessReport",
    "check_uniqueness_condition",
    # flow
    "FlowConfig",
    "FlowState",
    "FlowTrace",
    "flow_speed",
    "ma_residual",
    "functional_F",
    "functional_F_direct",
    "dissipation",
    "euler_pair",
    "step",
    "run",
    "radial_speed_check",
    "dual_flow_residual",
    "support_bounds_from_phi",
    "write_trace_csv",
    "write_plot_series",
    # configuration
    "RunConfig",
    "parse_config_text",
    "build_run_config",
    "load_config",
    # errors
    "OrliczFlowError",
    "UnsupportedDimensionError",
    "ResolutionError",
    "GridMismatchError",
    "InvalidBodyError",
    "ConvexityLostError",
    "PhiModelError",
    "ConfigError",
    "FlowFailure",
]
