"""fracdyn: Caputo fractional ODE integration, sector stability analysis,
and basin-of-attraction mapping, with the two-dimensional fractional
Lotka-Volterra system as the built-in flagship model."""

from .basin import (
    ESCAPED,
    UNDETERMINED,
    BasinMap,
    GridSpec,
    ScanSettings,
    boundary_extract,
    classify_trajectory,
    detect_self_intersection,
    scan_basin,
)
from .lotka import (
    LiftedSystem,
    LotkaParams,
    LotkaSystem,
    closed_form_stability,
    equilibria,
    isocline_region,
    jacobian,
    lift,
    rhs,
    separatrix_residual,
    separatrix_trace,
)
from .solver import (
    FractionalIVP,
    Trajectory,
    abm_solve,
    abm_solve_batch,
    caputo_power_derivative,
    gamma,
)
from .stability import (
    CharacteristicPolynomial,
    RationalOrder,
    SectorProblem,
    StabilityReport,
    Verdict,
    analyze_equilibrium,
    characteristic_polynomial,
    classify_sector,
    common_multiple,
    polynomial_roots,
    reduce_order,
)

__version__ = "0.1.0"

__all__ = [
    "ESCAPED",
    "UNDETERMINED",
    "BasinMap",
    "CharacteristicPolynomial",
    "FractionalIVP",
    "GridSpec",
    "LiftedSystem",
    "LotkaParams",
    "LotkaSystem",
    "RationalOrder",
    "ScanSettings",
    "SectorProblem",
    "StabilityReport",
    "Trajectory",
    "Verdict",
    "abm_solve",
    "abm_solve_batch",
    "analyze_equilibrium",
    "boundary_extract",
    "caputo_power_derivative",
    "characteristic_polynomial",
    "classify_sector",
    "classify_trajectory",
    "closed_form_stability",
    "common_multiple",
    "detect_self_intersection",
    "equilibria",
    "gamma",
    "isocline_region",
    "jacobian",
    "lift",
    "polynomial_roots",
    "reduce_order",
    "rhs",
    "scan_basin",
    "separatrix_residual",
    "separatrix_trace",
]
