"""Ellipticity analysis and heat-kernel asymptotics for oblique boundary problems."""

__version__ = "0.1.0"

from .bhalf import (  # noqa: E402
    BHalfResult,
    BoundaryMesh,
    Method,
    a0,
    a_half,
    bhalf,
    bhalf_closed,
    bhalf_quadrature,
    bhalf_series,
)
from .boundary import (  # noqa: E402
    BUILTIN_SETUPS,
    BoundarySetup,
    Violation,
    commuting_diagonal,
    dirichlet,
    graded_symbol,
    mixed,
    neumann,
    pauli_3d,
    pure_dirac,
    pure_skew_2d,
    tangential_symbol,
    validate_setup,
)
from .ellipticity import (  # noqa: E402
    Classification,
    EllipticityReport,
    NaturalSpectrum,
    check_strong_ellipticity,
    natural_spectrum,
    sufficient_condition,
)
from .errors import *  # noqa: E402,F401,F403
from .gauge import (  # noqa: E402
    GaugeSymbol,
    builtin_model,
    gauge_ellipticity,
    induced_boundary_setup,
    validate_gauge,
)
from .oracle import ModeProblem, mode_diagonal, oracle_bhalf, oracle_diagonal  # noqa: E402
from .profile import (  # noqa: E402
    HeatDiagonal,
    ProfileSample,
    heat_diagonal,
    phi,
    psi,
    resolvent_kernel,
    singularity_probe,
    trace_profile_j,
)
from .spectral import herm_eig, matfun  # noqa: E402
