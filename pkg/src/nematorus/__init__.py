"""Equilibria of a nematic director field on an axisymmetric torus.

Closed-form constant-angle analysis of the extrinsic surface energy,
gradient-flow relaxation of general angle fields with structural
winding preservation, and a CLI for the standard experiments
(constant-angle scans, flow runs, winding tables, critical-ratio
search).
"""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .energy import (
    DEGENERATE_RATIO,
    ElasticConstants,
    EnergyBreakdown,
    Moments,
    constant_energy,
    constant_energy_coefficients,
    constant_energy_d1,
    constant_energy_d2,
    darboux_scalars,
    energy_classical,
    energy_density,
    energy_general,
    energy_one_constant,
    moments,
    near_hole_density,
    one_constant_offset,
    willmore,
)
from .equilibria import (
    ConstantEquilibrium,
    RegimeReport,
    constant_equilibria,
    critical_k2,
    regime_report,
)
from .errors import (
    AmbiguousJump,
    BracketInvalid,
    ConfigError,
    InvalidConstants,
    InvalidRatio,
    NematorusError,
    StepUnstable,
)
from .fields import (
    AngleField,
    Grid,
    WindingNumber,
    dirichlet_form,
    discrete_gradient,
    discrete_laplace_beltrami,
    measure_winding,
    seed_field,
    write_field_csv,
)
from .geometry import (
    PointGeometry,
    SurfacePoint,
    TorusGeometry,
    point_geometry,
    surface_gradient_matrix,
)
from .relaxation import (
    FlowParams,
    FlowReport,
    MuProbe,
    MuStarResult,
    WindingRow,
    auto_dt,
    classify_mu,
    deviation_amplitude,
    el_residual,
    find_critical_mu,
    flow_general,
    flow_one_constant,
    winding_table,
)

__all__ = [name for name in dir() if not name.startswith("_")]
