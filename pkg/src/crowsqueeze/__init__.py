"""Squeezed-state evolution and entanglement in lossy coupled-cavity chains."""

from .analytic import (
    CrowEvolver,
    CrowParams,
    TwoCavityEvolver,
    TwoCavityParams,
    arrival_time_estimate,
    asymptotic_maxima,
    crow_series,
    total_photons,
    two_cavity_series,
    velocity_estimate,
)
from .evolve import (
    ModeSumEvolver,
    ObservableSeries,
    correlation_series,
    evolve_series,
    photon_number_series,
    quadrature_series,
)
from .modes import (
    CavityChainSpec,
    QuasimodeBasis,
    crow_bloch_modes,
    full_dispersion,
    solve_generalized_modes,
    two_cavity_modes,
)
from .states import InitialStateMoments, coherent_moments, sts_moments, svs_moments

__version__ = "0.1.0"
