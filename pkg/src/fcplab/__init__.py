"""Fractional counting processes and their relatives.

The core object is a counting law whose probabilities are built from the
three-parameter Mittag-Leffler function.  Around it sit the same count run
on a Levy subordinator clock, compound sums and products, generalized
fractional Bell polynomials, a shock deterioration reliability model and
Monte Carlo samplers for all of them.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConvergenceError,
    DomainError,
    FcplabError,
    MomentNonexistenceError,
    NegativeProbabilityError,
    NumericalError,
    UnsupportedError,
    ValidationError,
)
from .special_fn import DEFAULT_CONTROL, MlArgs, SeriesControl, ml3, ml3_deriv  # noqa: E402
from .fcp_core import (  # noqa: E402
    FcpParams,
    fcp_mean,
    fcp_pgf,
    fcp_pmf,
    fcp_pmf_auto,
    fcp_pmf_vector,
    fcp_variance,
)
from .subordinators import (  # noqa: E402
    AlphaStable,
    Drift,
    GammaSub,
    IncompleteGamma,
    MomentQuality,
    TemperedStable,
)
from .tcfcp import TcfcpModel, tcfcp_mean, tcfcp_pmf, tcfcp_pmf_auto, tcfcp_variance  # noqa: E402
from .shock_model import ShockModel, UpsilonArgs  # noqa: E402
from .montecarlo import RngStream  # noqa: E402

__all__ = [
    "__version__",
    "FcplabError", "ValidationError", "DomainError", "NumericalError", "ConvergenceError",
    "NegativeProbabilityError", "MomentNonexistenceError", "UnsupportedError",
    "SeriesControl", "DEFAULT_CONTROL", "MlArgs", "ml3", "ml3_deriv",
    "FcpParams", "fcp_pmf", "fcp_pmf_vector", "fcp_pmf_auto", "fcp_pgf", "fcp_mean", "fcp_variance",
    "Drift", "AlphaStable", "TemperedStable", "GammaSub", "IncompleteGamma", "MomentQuality",
    "TcfcpModel", "tcfcp_pmf", "tcfcp_pmf_auto", "tcfcp_mean", "tcfcp_variance",
    "ShockModel", "UpsilonArgs", "RngStream",
]
