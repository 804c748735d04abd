"""Two-level emitter driven by a laser pulse and by its own emitted photon."""
from .core import (
    IDENTITY,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_Z,
    PulseSpec,
    SystemParams,
    TimeGrid,
    collective_jump,
    embed,
    excited_population,
    gaussian_rabi,
    ground_state,
)
from .lindblad import (
    IntegrationError,
    Liouvillian,
    Trajectory,
    correlation_map,
    dissipator,
    liouvillian_cascaded,
    liouvillian_single,
    propagate,
)
from .observables import (
    CorrelationMap,
    FitResult,
    FluxTrace,
    convolve_jitter_1d,
    convolve_jitter_2d,
    diagonal,
    fit_monoexponential,
    flux_first,
    flux_second,
    g2_bar,
    g2_bar_gated,
    indistinguishability,
    visibility,
)

__version__ = "0.1.0"
