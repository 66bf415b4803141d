"""Periodic 2D pseudo-spectral solver for a coupled velocity/stress system,
with a dyadic frequency-band toolkit and a scenario harness on top.

The layers, bottom to top: grids and transforms (:mod:`.spectral`), dyadic
band analysis (:mod:`.bands`), the model's tensor algebra and shared
right-hand side (:mod:`.model`), integrating-factor time stepping
(:mod:`.stepper`), data families (:mod:`.initial_data`), norm series and rate
fits (:mod:`.diagnostics`), and named experiments plus a CLI
(:mod:`.scenarios`, :mod:`.cli`).
"""

from .bands import (
    BesovSpec,
    DyadicPartition,
    bernstein_check,
    besov_norm,
    block_semigroup_check,
    build_partition,
    dyadic_block,
    paraproduct_split,
)
from .diagnostics import (
    CHANNELS,
    BootstrapMonitor,
    RateFit,
    SnapshotSeries,
    TimeSeries,
    bootstrap_check,
    enstrophy,
    fit_exponential,
    fit_power_envelope,
    gap,
    kinetic_energy,
    record,
)
from .initial_data import (
    InitialDataSpec,
    build_initial_state,
    from_stream_function,
    random_stream,
    remark_large,
    scaled_family,
    small_family,
    taylor_green,
    zero_stress,
    zero_velocity,
)
from .model import (
    FlowState,
    ModelParams,
    StressField,
    deformation,
    energy_identity_residual,
    q_bilinear,
    stress_divergence,
    vorticity,
)
from .scenarios import (
    SCENARIOS,
    RunReport,
    ScenarioConfig,
    Thresholds,
    default_config,
    run_scenario,
)
from .spectral import (
    Grid,
    ScalarField,
    SpectralScalar,
    VectorField,
    dealias,
    derivative,
    divergence,
    forward_transform,
    inverse_laplacian,
    inverse_transform,
    leray_project,
    lp_norm,
)
from .stepper import (
    BlowUpError,
    StepperConfig,
    advance_through_times,
    advance_to,
    semigroup_apply,
    step,
)

__version__ = "0.1.0"
