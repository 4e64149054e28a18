"""Deterministic amplitude simulator for counterfactual quantum communication.

Evolves a single particle through one- and two-barrier cavities, tracks every
escaped wave packet, and accounts for the flow of the pi-rotation (exchange)
expectation into the transmission channel.
"""

from cqcsim.amplitude import Barrier, apply_barrier, barrier_matrix, barrier_power
from cqcsim.cavity import (
    PacketRecord,
    ProtocolConfig,
    SimTrace,
    ToyTrace,
    channel_probability,
    closed_form_amplitude,
    decode_bit,
    run_protocol,
    run_toy,
)
from cqcsim.modular import (
    FluxSeries,
    OverlapDecomposition,
    exchange_expectation,
    flux_series,
    mirror_superposition_run,
    partial_transfer_sum,
    riemann_transfer_sum,
)
from cqcsim.sweep import SweepSpec, SweepTable, convergence_fit, default_ladder, run_sweep

__all__ = [
    "Barrier",
    "FluxSeries",
    "OverlapDecomposition",
    "PacketRecord",
    "ProtocolConfig",
    "SimTrace",
    "SweepSpec",
    "SweepTable",
    "ToyTrace",
    "apply_barrier",
    "barrier_matrix",
    "barrier_power",
    "channel_probability",
    "closed_form_amplitude",
    "convergence_fit",
    "decode_bit",
    "default_ladder",
    "exchange_expectation",
    "flux_series",
    "mirror_superposition_run",
    "partial_transfer_sum",
    "riemann_transfer_sum",
    "run_protocol",
    "run_sweep",
    "run_toy",
]
