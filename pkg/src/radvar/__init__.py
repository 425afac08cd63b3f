"""Numerical toolkit for radially weighted degenerate variational problems."""

from .aux_weight import (
    AuxWeight,
    BoundaryBehavior,
    OutsideMonotoneBand,
    aux_derivative,
    boundary_behavior,
    build_aux_weight,
    eval_aux,
    eval_truncated,
)
from .poincare import OrderingViolated, PoincareReport, check_pointwise, check_poincare, w_norm
from .profiles import AnalyticProfile, NotInDomain, RadialProfile, read_profile_csv, write_profile_csv
from .quadrature import (
    DEFAULT_CONFIG,
    AnalysisInconclusive,
    DomainMismatch,
    QuadratureConfig,
    ToleranceNotMet,
    integrate_energy,
    integrate_fidelity,
    integrate_inverse_kernel,
)
from .relaxation import (
    DeltaTooLarge,
    DensityTable,
    DomainClass,
    EnergyBreakdown,
    density_report,
    lipschitz_approximants,
    power_blowup,
    relaxed_energy,
)
from .variational_solver import (
    CompetitorNotInDomain,
    DatumNotIntegrable,
    MinimizerResult,
    NonConvergence,
    PolarCompetitor,
    SolverConfig,
    evaluate_H,
    minimize_H,
    oracle_minimize,
    radial_dominance_check,
)
from .weight_model import (
    Constant,
    DegeneracyDecomposition,
    PowerBump,
    ProblemParams,
    RadialWeightSpec,
    Tabulated,
    decompose_degeneracy,
    endpoint_integrability,
    eval_weight,
)

__version__ = "0.1.0"
