"""Integer-parameter kappa-mu shadowed fading as finite Gamma mixtures."""

from .errors import *  # noqa: F401,F403
from .fitting import EmpiricalSample, FitResult, epsilon, fit, load_samples
from .metrics import (
    ConvergenceReport,
    average_metric,
    convergence_gap,
    nakagami_capacity,
    nakagami_equiv_m,
    outage_probability,
    rician_shadowed_approx,
    shadowed_capacity,
)
from .model import (
    GammaComponent,
    MixtureModel,
    Regime,
    ShadowedParams,
    build_mixture,
    cdf,
    delta_pair,
    mgf_mixture,
    mgf_rational,
    moment,
    pdf,
)
from .oracle import (
    RealShadowedParams,
    nakagami_cdf,
    nakagami_pdf,
    pdf_direct,
    pdf_kappa_mu,
    quad_cdf,
    quad_expect,
)
from .sampling import RngState, sample, sample_component_counts

__version__ = "0.1.0"
