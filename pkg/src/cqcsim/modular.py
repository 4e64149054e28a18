"""Exchange-operator expectation for two cavities related by a pi rotation.

The pi rotation about the symmetry axis swaps the upper and lower cavity
states, so its expectation in the symmetric superposition is
``Re <psi_up | psi_down>`` with each branch normalised to one. The overlap is
split by region along the axis: Alice's side, between the barriers, and the
transmission channel. Channel packets are paired by their ``(j_A, j_B)``
collision labels, one path per label.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass
from typing import Any

import numpy as np

from cqcsim.cavity import ProtocolConfig, SimTrace, run_protocol

FLUX_CSV_COLUMNS = ("j_A", "cumulative_channel", "alice_term", "running_total")


@dataclass(frozen=True)
class OverlapDecomposition:
    alice_contrib: float
    between_contrib: float
    channel_contrib: float
    total: float

    @classmethod
    def of(cls, alice: float, between: float, channel: float) -> OverlapDecomposition:
        return cls(float(alice), float(between), float(channel), float(alice + between + channel))

    def to_dict(self) -> dict[str, float]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> OverlapDecomposition:
        return cls(d["alice_contrib"], d["between_contrib"], d["channel_contrib"], d["total"])


@dataclass(frozen=True)
class FluxRecord:
    j_A: int
    cumulative_channel: float
    alice_term: float
    between_term: float
    running_total: float


@dataclass(frozen=True)
class FluxSeries:
    """Per-cycle accumulation of the channel contribution, ``j_A = 1..N``."""

    records: tuple[FluxRecord, ...]

    def __len__(self) -> int:
        return len(self.records)

    def cumulative_at(self, j_A: int) -> float:
        if j_A == 0:
            return 0.0
        return self.records[j_A - 1].cumulative_channel

    def to_dict(self) -> dict[str, Any]:
        return {"records": [asdict(r) for r in self.records]}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> FluxSeries:
        return cls(tuple(FluxRecord(**r) for r in d["records"]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(FLUX_CSV_COLUMNS)
        for r in self.records:
            w.writerow([r.j_A, repr(r.cumulative_channel), repr(r.alice_term), repr(r.running_total)])
        return buf.getvalue()


def _check_pair(trace_up: SimTrace, trace_down: SimTrace) -> None:
    cu, cd = trace_up.config, trace_down.config
    if (cu.n_A, cu.n_B, cu.N) != (cd.n_A, cd.n_B, cd.N):
        raise ValueError(
            f"traces disagree: (n_A, n_B, N) = {(cu.n_A, cu.n_B, cu.N)} vs {(cd.n_A, cd.n_B, cd.N)}"
        )


def _overlap(u: complex | np.ndarray, d: complex | np.ndarray) -> Any:
    return np.real(np.conj(u) * d)


def _path_factors(trace_up: SimTrace, trace_down: SimTrace) -> tuple[np.ndarray, complex]:
    # occupancy(j_A, j_B) = entry[j_A] * channel_response[j_B], so the sum over
    # labelled paths factors into an outer-cycle and an inner-bounce part
    per_cycle = np.conj(trace_up.entry) * trace_down.entry
    per_bounce = complex(np.sum(np.conj(trace_up.channel_response[1:]) * trace_down.channel_response[1:]))
    return per_cycle, per_bounce


def exchange_expectation(
    trace_up: SimTrace, trace_down: SimTrace, *, mode: str = "simulated"
) -> OverlapDecomposition:
    """Region-resolved ``Re <psi_up | psi_down>`` at the end of cycle ``N``.

    ``mode="simulated"`` uses the traced amplitudes. ``mode="limit"`` uses the
    leading-order amplitudes instead (upper cavity logic 0, lower logic 1), so
    the two can be compared to expose finite-angle corrections.
    """
    _check_pair(trace_up, trace_down)
    N = trace_up.N
    if mode == "limit":
        return _limit_decomposition(trace_up.config)
    if mode != "simulated":
        raise ValueError(f"mode must be 'simulated' or 'limit', got {mode!r}")
    alice = _overlap(trace_up.alice[N], trace_down.alice[N])
    between = _overlap(trace_up.inner_at_end()[N], trace_down.inner_at_end()[N])
    per_cycle, per_bounce = _path_factors(trace_up, trace_down)
    channel = (complex(np.sum(per_cycle)) * per_bounce).real if N else 0.0
    return OverlapDecomposition.of(alice, between, channel)


def _limit_decomposition(cfg: ProtocolConfig) -> OverlapDecomposition:
    N = cfg.N
    # lower cavity never loses Alice's packet in the limit; its between-barrier
    # amplitude at the end of a cycle carries cos(n_B eps_B) = 0
    alice = math.cos(N * cfg.eps_A)
    channel = partial_transfer_sum(N, cfg.n_A) * riemann_transfer_sum(cfg.n_B) if N else 0.0
    return OverlapDecomposition.of(alice, 0.0, channel)


def flux_series(trace_up: SimTrace, trace_down: SimTrace) -> FluxSeries:
    """Channel contribution accumulated over paths with ``j_A <= J``, for each ``J``."""
    _check_pair(trace_up, trace_down)
    N = trace_up.N
    if N == 0:
        return FluxSeries(())
    per_cycle, per_bounce = _path_factors(trace_up, trace_down)
    cumulative = np.real(np.cumsum(per_cycle) * per_bounce)
    alice = _overlap(trace_up.alice[1:], trace_down.alice[1:])
    between = _overlap(trace_up.inner_at_end()[1:], trace_down.inner_at_end()[1:])
    records = tuple(
        FluxRecord(
            j_A=j + 1,
            cumulative_channel=float(cumulative[j]),
            alice_term=float(alice[j]),
            between_term=float(between[j]),
            running_total=float(alice[j] + between[j] + cumulative[j]),
        )
        for j in range(N)
    )
    return FluxSeries(records)


def riemann_transfer_sum(n: int) -> float:
    """``sum_{j=1..n} (pi / 2n) sin(j pi / 2n)``, which tends to 1."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    step = math.pi / (2 * n)
    return math.fsum(step * np.sin(step * np.arange(1, n + 1)))


def partial_transfer_sum(n_cycles: int, n_A: int) -> float:
    """``sum_{j=1..n_cycles} eps_A sin(j eps_A)`` with ``eps_A = pi / 2 n_A``.

    Tends to ``1 - cos(n_cycles eps_A)`` as ``n_A`` grows at fixed
    ``n_cycles / n_A``.
    """
    for name, v, lo in (("n_cycles", n_cycles, 0), ("n_A", n_A, 1)):
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < lo:
            raise ValueError(f"{name} must be an integer >= {lo}, got {v!r}")
    eps = math.pi / (2 * n_A)
    return math.fsum(eps * np.sin(eps * np.arange(1, n_cycles + 1)))


@dataclass(frozen=True)
class MirrorRun:
    exchange_series: tuple[float, ...]
    decomposition_at_end: OverlapDecomposition
    alice_region_overlap_at_end: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "exchange_series": list(self.exchange_series),
            "decomposition_at_end": self.decomposition_at_end.to_dict(),
            "alice_region_overlap_at_end": self.alice_region_overlap_at_end,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> MirrorRun:
        return cls(
            tuple(d["exchange_series"]),
            OverlapDecomposition.from_dict(d["decomposition_at_end"]),
            d["alice_region_overlap_at_end"],
        )


def mirror_superposition_run(base: ProtocolConfig, total_cycles: int) -> MirrorRun:
    """One cavity, Bob's mirror in a superposition of present and absent.

    The mirror only labels which branch the particle evolves in: the
    mirror-absent branch runs logic 0, the mirror-present branch logic 1.
    The exchange expectation for the mirror is the branch overlap, split by
    region exactly as for two cavities. ``exchange_series[t]`` is its value
    after ``t`` cycles.
    """
    if isinstance(total_cycles, bool) or not isinstance(total_cycles, (int, np.integer)) or total_cycles < 0:
        raise ValueError(f"total_cycles must be a non-negative integer, got {total_cycles!r}")
    open_branch = run_protocol(ProtocolConfig(base.n_A, base.n_B, 0, int(total_cycles), base.length_scale, base.speed))
    mirror_branch = run_protocol(ProtocolConfig(base.n_A, base.n_B, 1, int(total_cycles), base.length_scale, base.speed))
    flux = flux_series(open_branch, mirror_branch)
    series = (1.0,) + tuple(r.running_total for r in flux.records)
    end = exchange_expectation(open_branch, mirror_branch)
    return MirrorRun(series, end, end.alice_contrib)
