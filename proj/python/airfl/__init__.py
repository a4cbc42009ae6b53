"""Over-the-air federated learning simulator.

The heavy lifting lives in the compiled extension; this package re-exports
the operations most useful from Python: channel sampling, gradient
normalization, transceiver design, the max-min direction solver, the
physical-layer round simulator, and the convergence bound evaluator.
"""

from ._core import (
    ChannelConfig,
    ChannelRealization,
    ForcingAudit,
    Geometry,
    GradientBatch,
    LabeledDataset,
    PlacementRegion,
    Rng,
    RoundTransmission,
    SolverIterate,
    SolverNonConvergence,
    SolverOptions,
    SolverTrace,
    TransceiverDesign,
    audit_uniform_forcing,
    beta_for_power_budget,
    convergence_bound,
    denormalize,
    denormalize_complex,
    design,
    draw_realization,
    expected_error_norm,
    load_idx,
    make_synthetic_digits,
    node_mse,
    normalize,
    path_loss,
    sample_geometry,
    sample_rician,
    shard_non_iid,
    solve_max_min,
    transmit_round,
)

__all__ = [
    "ChannelConfig",
    "ChannelRealization",
    "ForcingAudit",
    "Geometry",
    "GradientBatch",
    "LabeledDataset",
    "PlacementRegion",
    "Rng",
    "RoundTransmission",
    "SolverIterate",
    "SolverNonConvergence",
    "SolverOptions",
    "SolverTrace",
    "TransceiverDesign",
    "audit_uniform_forcing",
    "beta_for_power_budget",
    "convergence_bound",
    "denormalize",
    "denormalize_complex",
    "design",
    "draw_realization",
    "expected_error_norm",
    "load_idx",
    "make_synthetic_digits",
    "node_mse",
    "normalize",
    "path_loss",
    "sample_geometry",
    "sample_rician",
    "shard_non_iid",
    "solve_max_min",
    "transmit_round",
]

__version__ = "0.1.0"
