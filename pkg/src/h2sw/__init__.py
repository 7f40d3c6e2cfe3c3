"""Sliced Wasserstein distances for heterogeneous joint distributions.

A joint cloud holds per-marginal coordinate blocks on mixed spaces
(Euclidean, sphere, Lorentz model); the hierarchical estimator slices each
marginal with its own defining function and mixes the scalar projections,
while sw/gsw/chsw provide the flat and fixed-mix baselines. An exact
joint-Wasserstein solver serves as evaluation metric and test oracle, and
a gradient-flow engine deforms clouds under any of the sliced losses.
"""

from .compare import (
    DatasetCollection,
    cost_matrix,
    embed_labels_lorentz,
    nearest_neighbor_rows,
    relative_error,
)
from .errors import (
    CloudFormatError,
    ConfigurationError,
    DegenerateStepError,
    ResourceGuardError,
    SingularGradientError,
    ValidationError,
)
from .exact_ot import TransportPlan, joint_wasserstein, mixed_cost_matrix, solve_transport
from .flow import Checkpoint, FlowConfig, FlowTrace, deform, euler_step
from .geometry import (
    EUCLIDEAN,
    LORENTZ,
    SPHERE,
    DirectionSample,
    JointCloud,
    SpaceSpec,
    great_circle_distance,
    lorentz_basepoint,
    lorentz_distance,
    lorentz_exp_basepoint,
    lorentz_inner,
    lorentz_project,
    sample_unit_sphere,
)
from .ot1d import Projected1D, quantile, wasserstein_1d, wasserstein_1d_grad
from .projections import (
    BusemannLorentz,
    Circular,
    DefiningFunction,
    Linear,
    OddPolynomial,
    defining_gradient,
    defining_value,
    grt_project,
    hhrt_project,
    monomial_exponents,
    sample_direction,
    validate_direction,
)
from .sliced import (
    EstimatorConfig,
    chsw_estimate,
    default_fixed_psi,
    estimate,
    gradient,
    gsw_estimate,
    h2sw_estimate,
    h2sw_gradient,
    mc_std,
    standard_error,
    sw_estimate,
)

__version__ = "0.1.0"

__all__ = [
    "BusemannLorentz",
    "Checkpoint",
    "Circular",
    "CloudFormatError",
    "ConfigurationError",
    "DatasetCollection",
    "DefiningFunction",
    "DegenerateStepError",
    "DirectionSample",
    "EUCLIDEAN",
    "EstimatorConfig",
    "FlowConfig",
    "FlowTrace",
    "JointCloud",
    "LORENTZ",
    "Linear",
    "OddPolynomial",
    "Projected1D",
    "ResourceGuardError",
    "SPHERE",
    "SingularGradientError",
    "SpaceSpec",
    "TransportPlan",
    "ValidationError",
    "chsw_estimate",
    "cost_matrix",
    "default_fixed_psi",
    "defining_gradient",
    "defining_value",
    "deform",
    "embed_labels_lorentz",
    "estimate",
    "euler_step",
    "gradient",
    "great_circle_distance",
    "grt_project",
    "gsw_estimate",
    "h2sw_estimate",
    "h2sw_gradient",
    "hhrt_project",
    "joint_wasserstein",
    "lorentz_basepoint",
    "lorentz_distance",
    "lorentz_exp_basepoint",
    "lorentz_inner",
    "lorentz_project",
    "mc_std",
    "mixed_cost_matrix",
    "monomial_exponents",
    "nearest_neighbor_rows",
    "quantile",
    "relative_error",
    "sample_direction",
    "sample_unit_sphere",
    "solve_transport",
    "standard_error",
    "sw_estimate",
    "validate_direction",
    "wasserstein_1d",
    "wasserstein_1d_grad",
]
