"""Multiple scattering of an obliquely incident plane wave by a grating of dielectric cylinders."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AnomalyError,
    BranchPointError,
    ConfigError,
    DegenerateMediumError,
    DomainError,
    GratingError,
    NoConvergenceError,
    NumericalError,
    ResonanceError,
    SingularSystemError,
    TruncationError,
)
from .medium import (  # noqa: E402
    GratingConfig,
    anomaly_margin,
    derive_polarization_constants,
    derive_wavenumbers,
    incident_mode_amplitude,
)
from .isolated import isolated_coefficients  # noqa: E402
from .lattice import lattice_sum_table, leading_h, schlomilch_In, verify_leading_order  # noqa: E402
from .solver import (  # noqa: E402
    CoefficientTable,
    assemble_system,
    build_system,
    converged_truncation,
    solve_direct,
    solve_exact,
    solve_neumann,
)
from .asymptotic import asymptotic_table, omega_expansion_check, s_matrix  # noqa: E402
from .fields import eval_exterior_fields  # noqa: E402
