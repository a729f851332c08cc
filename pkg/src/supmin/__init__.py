"""supmin: candidate absolute minimisers of worst-case path energies.

Minimizes the sup over an interval of a nonnegative Lagrangian L(x, u, Du)
among vector-valued paths with affine boundary data by sweeping minimizers of
power-mean energies to high exponents, then audits the defining properties of
the result: absolute minimality on subintervals, Jensen/level-convexity gaps,
and the residual of the associated second-order system.
"""

from .aronsson import (
    ResidualProfile,
    SecondOrderPoint,
    aronsson_operator,
    normal_projection,
    residual_profile,
)
from .audit import (
    AuditConfig,
    AuditReport,
    EndpointScan,
    ScanEntry,
    SemicontinuityResult,
    SubintervalAudit,
    audit_absolute_minimality,
    build_comparison,
    endpoint_quotient_scan,
    perturbation_audit,
    semicontinuity_check,
    snap_delta,
)
from .energy import (
    EnergyReport,
    QuadratureRule,
    jensen_gap,
    power_energy,
    power_energy_gradient,
    sup_energy,
)
from .errors import (
    BadDelta,
    BadWeights,
    ConfigError,
    EmptyInterval,
    GridTooCoarse,
    NegativeLagrangian,
    NonFinite,
    NonUniformGrid,
    OutOfDomain,
    SupminError,
    TooFewEntries,
    ZeroStep,
)
from .lagrangian import (
    Box,
    CustomModel,
    DataAssimilationModel,
    GrowthCheckResult,
    GrowthParams,
    JetDerivatives,
    LagrangianModel,
    LevelConvexityResult,
    MinOfNormsModel,
    PowerNormModel,
    RadialModel,
    RadialProfile,
    SampledSignal,
    SamplePlan,
    ScaledModel,
    check_growth_bounds,
    check_level_convexity,
    finite_difference_jet,
    radial_profile,
    scaled,
)
from .path import (
    AffineMap,
    Grid,
    Path,
    PathSample,
    difference_quotient,
    eval_and_slope,
    interpolate_affine,
    resample,
)
from .solver import (
    SolveOptions,
    SolveStats,
    SweepRecord,
    SweepResult,
    SweepSchedule,
    m_sweep,
    minimize_power,
)

__version__ = "0.1.0"
