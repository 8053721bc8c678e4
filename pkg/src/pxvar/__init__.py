"""pxvar: variable-exponent Lebesgue/Sobolev computations, the weak
p(x)-Laplacian, nonsmooth potential audits, Rayleigh-quotient admissibility
gating, and a nonsmooth mountain-pass solver on 1D/2D Dirichlet grids."""

from .errors import (
    AuditFailure,
    CrossingFailure,
    GeometryFailure,
    InadmissibleLambda,
    SolverFailure,
    SpecError,
    StageFailure,
)
from .exponents import ExponentField, build_exponent, conjugate_exponent, critical_exponent
from .expressions import Expression
from .grids import (
    Grid,
    GridFunction,
    gradient,
    gradient_magnitude,
    read_grid_function,
    write_grid_function,
)
from .modular import (
    ModularReport,
    holder_check,
    luxemburg_norm,
    modular_lp,
    modular_report,
    modular_w1p,
    poincare_constant_estimate,
    sobolev_norm_modular,
    sobolev_norm_sum,
)
from .mountain_pass import (
    GeometryCertificate,
    SolveReport,
    SolverConfig,
    R_subgradient_selection,
    certify_geometry,
    energy_R,
    inclusion_residual_report,
    m_residual,
    solve_mountain_pass,
)
from .operators import (
    apply_A_bilinear,
    energy_J,
    gradient_check_A_equals_Jprime,
    monotonicity_probe,
    residual_A,
    s_plus_probe,
)
from .potentials import (
    ClarkeInterval,
    PotentialSpec,
    audit_asymptotic_negativity,
    audit_crossing,
    audit_growth,
    audit_origin,
    bump_potential,
    bump_profile,
    clarke_interval,
    j_value,
    psi,
    psi_subgradient_selection,
    zero_potential,
)
from .problem import ProblemSpec, load_problem
from .rayleigh import LambdaStarEstimate, admissible, estimate_lambda_star, rayleigh_quotient

__version__ = "0.1.0"
