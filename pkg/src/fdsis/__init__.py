"""Gain-controlled RF beamforming for self-interference suppression in
full-duplex massive MIMO sub-arrays."""

from .beamformer import (
    BeamWeights,
    build_rx_beam,
    build_tx_beam,
    directivity,
    directivity_degradation,
)
from .channel import (
    BandSlice,
    ChannelFormatError,
    SiChannel,
    extract_subarray,
    generate_los_channel,
    load_channel,
    reference_channel,
    save_channel,
    slice_band,
    synthetic_channel,
)
from .geometry import ArrayLayout, SteeringAngles, conjugate_response, phase_response
from .objective import (
    BelowNumericFloor,
    ConstraintConfig,
    SiEvaluation,
    SiProblem,
    fitness,
    si_level_db,
    si_power,
    to_db,
)
from .pso import Bounds, PsoConfig, PsoResult, initialize_swarm, position_update, velocity_update
from .pso import run as run_pso
from .sweep import (
    SchemeContext,
    SchemeKind,
    SweepGrid,
    SweepReport,
    aggregate,
    run_sweep,
    solve_scheme,
)

__version__ = "0.1.0"
