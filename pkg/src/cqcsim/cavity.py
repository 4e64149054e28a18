"""Discrete-event simulation of the one- and two-barrier cavity protocols.

Barrier A only opens when a packet from Alice's end arrives, once per outer
cycle of duration ``L / v``, so the state never needs spatial resolution:
per cycle it is a handful of mode amplitudes (Alice's side, between the
barriers, the local transmission channel) plus packets that have left.

Within one cycle the inner loop between the barriers is linear in the
amplitude that crossed barrier A. ``run_protocol`` steps that loop once on a
unit packet and then scales it per cycle, so a trace keeps O(N + n_B)
numbers and materialises per-step snapshots only on request.
"""

from __future__ import annotations

import math
from collections.abc import Iterator
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from cqcsim.amplitude import Barrier, apply_barrier

REGIONS = ("alice", "between", "channel")
ESCAPED = "escaped"
OCCUPANCY = "channel-occupancy"


def _check_int(name: str, value: Any, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


@dataclass(frozen=True)
class ProtocolConfig:
    """Integer parameterisation of a two-barrier run.

    ``eps_A = pi / (2 n_A)`` and ``eps_B = pi / (2 n_B)``, so ``n * eps`` is a
    quarter turn by construction. ``cycles`` defaults to ``n_A``.
    """

    n_A: int
    n_B: int
    logic: int
    cycles: int | None = None
    length_scale: float = 1.0
    speed: float = 1.0

    def __post_init__(self) -> None:
        _check_int("n_A", self.n_A, 1)
        _check_int("n_B", self.n_B, 1)
        if self.logic not in (0, 1) or isinstance(self.logic, bool):
            raise ValueError(f"logic must be 0 or 1, got {self.logic!r}")
        if self.cycles is None:
            object.__setattr__(self, "cycles", int(self.n_A))
        else:
            _check_int("cycles", self.cycles, 0)
        for name in ("length_scale", "speed"):
            val = getattr(self, name)
            if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be a positive finite number, got {val!r}")

    @property
    def N(self) -> int:
        return int(self.cycles)  # type: ignore[arg-type]

    @property
    def eps_A(self) -> float:
        return math.pi / (2 * self.n_A)

    @property
    def eps_B(self) -> float:
        return math.pi / (2 * self.n_B)

    @property
    def ratio(self) -> float:
        """``eps_B / eps_A``, equal to ``n_A / n_B``."""
        return self.n_A / self.n_B

    @property
    def cycle_time(self) -> float:
        return self.length_scale / self.speed

    @property
    def transfer_time(self) -> float:
        """Time for ``n_A`` cycles, when logic 0 has moved the particle past barrier A."""
        return self.n_A * self.cycle_time

    def with_logic(self, logic: int) -> ProtocolConfig:
        return ProtocolConfig(self.n_A, self.n_B, logic, self.cycles, self.length_scale, self.speed)

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_A": self.n_A,
            "n_B": self.n_B,
            "cycles": self.N,
            "logic": self.logic,
            "length_scale": self.length_scale,
            "speed": self.speed,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ProtocolConfig:
        return cls(
            n_A=d["n_A"],
            n_B=d["n_B"],
            logic=d["logic"],
            cycles=d.get("cycles"),
            length_scale=d.get("length_scale", 1.0),
            speed=d.get("speed", 1.0),
        )


@dataclass(frozen=True)
class PacketRecord:
    """A labelled packet past barrier B.

    ``j_B`` is ``None`` for the logic-1 packet released when Bob briefly
    removes his mirror at the end of cycle ``j_A``.
    """

    j_A: int
    j_B: int | None
    amplitude: complex
    status: str = ESCAPED

    @property
    def probability(self) -> float:
        return abs(self.amplitude) ** 2

    def to_dict(self) -> dict[str, Any]:
        return {
            "j_A": self.j_A,
            "j_B": self.j_B,
            "status": self.status,
            "re": self.amplitude.real,
            "im": self.amplitude.imag,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> PacketRecord:
        return cls(d["j_A"], d["j_B"], complex(d["re"], d["im"]), d.get("status", ESCAPED))


@dataclass(frozen=True)
class Snapshot:
    alice: complex
    inner: complex
    channel_local: complex


def _complex_list(arr: np.ndarray) -> dict[str, list[float]]:
    return {"re": arr.real.tolist(), "im": arr.imag.tolist()}


def _complex_array(d: dict[str, list[float]]) -> np.ndarray:
    return np.asarray(d["re"], dtype=float) + 1j * np.asarray(d["im"], dtype=float)


@dataclass(frozen=True, eq=False)
class SimTrace:
    """Complete output of ``run_protocol``.

    Attributes:
        config: the run parameters.
        alice: Alice-side amplitude at the start (index 0) and after each
            cycle's barrier-A scattering (index ``j_A``); it does not change
            during the inner loop.
        entry: amplitude between the barriers right after barrier A in cycle
            ``j_A`` (index ``j_A - 1``).
        inner_response: between-barrier amplitude after inner sub-step ``k``
            for a unit packet entering the loop (index 0 is 1).
        channel_response: per unit entering packet, the amplitude past
            barrier B labelled by sub-step ``k``. Logic 0: the packet emitted
            on that sub-step. Logic 1: the local channel occupancy in front
            of Bob's mirror. Index 0 is 0.
    """

    config: ProtocolConfig
    alice: np.ndarray
    entry: np.ndarray
    inner_response: np.ndarray
    channel_response: np.ndarray
    _cache: dict[str, Any] = field(default_factory=dict, repr=False, compare=False)

    @property
    def N(self) -> int:
        return self.config.N

    @property
    def n_B(self) -> int:
        return self.config.n_B

    @property
    def logic(self) -> int:
        return self.config.logic

    @property
    def snapshot_count(self) -> int:
        return self.N * (1 + self.n_B)

    def _check_label(self, j_A: int, j_B: int) -> None:
        if not 1 <= j_A <= self.N:
            raise IndexError(f"j_A={j_A} outside 1..{self.N}")
        if not 0 <= j_B <= self.n_B:
            raise IndexError(f"j_B={j_B} outside 0..{self.n_B}")

    def snapshot(self, j_A: int, j_B: int) -> Snapshot:
        """State during cycle ``j_A``; ``j_B = 0`` is right after barrier A."""
        self._check_label(j_A, j_B)
        e = self.entry[j_A - 1]
        chan = e * self.channel_response[j_B] if self.logic == 1 else 0j
        return Snapshot(complex(self.alice[j_A]), complex(e * self.inner_response[j_B]), complex(chan))

    def end_of_cycle(self, j_A: int) -> Snapshot:
        """Snapshot after the last inner sub-step of cycle ``j_A`` (``j_A = 0``: initial state)."""
        if j_A == 0:
            return Snapshot(complex(self.alice[0]), 0j, 0j)
        return self.snapshot(j_A, self.n_B)

    def alice_amplitude(self, j_A: int) -> complex:
        return complex(self.alice[j_A])

    def inner_at_end(self) -> np.ndarray:
        """Between-barrier amplitude at the end of cycles 0..N."""
        out = np.zeros(self.N + 1, dtype=np.complex128)
        out[1:] = self.entry * self.inner_response[-1]
        return out

    def inner_matrix(self) -> np.ndarray:
        """``(N, n_B + 1)`` between-barrier amplitudes at every snapshot."""
        return np.outer(self.entry, self.inner_response)

    def occupancy_matrix(self) -> np.ndarray:
        """``(N, n_B)`` channel amplitudes keyed by ``(j_A, j_B)``, both 1-based."""
        return np.outer(self.entry, self.channel_response[1:])

    def occupancy(self, j_A: int, j_B: int) -> complex:
        if not 1 <= j_B <= self.n_B:
            raise IndexError(f"j_B={j_B} outside 1..{self.n_B}")
        self._check_label(j_A, j_B)
        return complex(self.entry[j_A - 1] * self.channel_response[j_B])

    def iter_ledger(self) -> Iterator[PacketRecord]:
        """Escaped packets in emission order."""
        if self.logic == 0:
            for a, e in enumerate(self.entry, start=1):
                for b in range(1, self.n_B + 1):
                    yield PacketRecord(a, b, complex(e * self.channel_response[b]))
        else:
            last = self.channel_response[-1]
            for a, e in enumerate(self.entry, start=1):
                yield PacketRecord(a, None, complex(e * last))

    @property
    def ledger(self) -> tuple[PacketRecord, ...]:
        if "ledger" not in self._cache:
            self._cache["ledger"] = tuple(self.iter_ledger())
        return self._cache["ledger"]

    def iter_occupancy(self) -> Iterator[PacketRecord]:
        """Channel occupancy keyed by ``(j_A, j_B)``; for logic 0 these are the escaped packets."""
        if self.logic == 0:
            yield from self.iter_ledger()
            return
        for a, e in enumerate(self.entry, start=1):
            for b in range(1, self.n_B + 1):
                yield PacketRecord(a, b, complex(e * self.channel_response[b]), OCCUPANCY)

    def escaped_probability(self) -> float:
        """Total probability carried away by the ledger."""
        w = np.abs(self.entry) ** 2
        if self.logic == 0:
            return float(w.sum() * np.sum(np.abs(self.channel_response) ** 2))
        return float(w.sum() * abs(self.channel_response[-1]) ** 2)

    def probability_grid(self) -> np.ndarray:
        """``(N, n_B + 1)`` total probability (cavity modes plus ledger) at each snapshot."""
        w = np.abs(self.entry) ** 2
        inner_p = np.abs(self.inner_response) ** 2
        chan_p = np.abs(self.channel_response) ** 2
        alice_p = np.abs(self.alice[1:]) ** 2
        if self.logic == 0:
            per_cycle = np.sum(chan_p)
            before = np.concatenate(([0.0], np.cumsum(w)[:-1])) * per_cycle
            within = np.cumsum(chan_p)
            ledger = before[:, None] + np.outer(w, within)
            cavity = alice_p[:, None] + np.outer(w, inner_p)
        else:
            before = np.concatenate(([0.0], np.cumsum(w)[:-1])) * chan_p[-1]
            ledger = np.repeat(before[:, None], self.n_B + 1, axis=1)
            cavity = alice_p[:, None] + np.outer(w, inner_p + chan_p)
        return cavity + ledger

    def iter_snapshots(self) -> Iterator[tuple[int, int, Snapshot]]:
        for a in range(1, self.N + 1):
            for b in range(self.n_B + 1):
                yield a, b, self.snapshot(a, b)

    def to_dict(self, *, snapshots: bool = True, ledger: bool = True) -> dict[str, Any]:
        d: dict[str, Any] = {
            "config": self.config.to_dict(),
            "state": {
                "alice": _complex_list(self.alice),
                "entry": _complex_list(self.entry),
                "inner_response": _complex_list(self.inner_response),
                "channel_response": _complex_list(self.channel_response),
            },
        }
        if snapshots:
            rows = []
            for a, b, s in self.iter_snapshots():
                rows.append({"j_A": a, "j_B": b, "region": "alice", "re": s.alice.real, "im": s.alice.imag})
                rows.append({"j_A": a, "j_B": b, "region": "between", "re": s.inner.real, "im": s.inner.imag})
                if self.logic == 1:
                    rows.append(
                        {
                            "j_A": a,
                            "j_B": b,
                            "region": "channel",
                            "re": s.channel_local.real,
                            "im": s.channel_local.imag,
                        }
                    )
            d["snapshots"] = rows
        if ledger:
            d["ledger"] = [r.to_dict() for r in self.iter_ledger()]
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> SimTrace:
        st = d["state"]
        return cls(
            config=ProtocolConfig.from_dict(d["config"]),
            alice=_complex_array(st["alice"]),
            entry=_complex_array(st["entry"]),
            inner_response=_complex_array(st["inner_response"]),
            channel_response=_complex_array(st["channel_response"]),
        )


def _inner_response(config: ProtocolConfig) -> tuple[np.ndarray, np.ndarray]:
    n_B = config.n_B
    inner = np.zeros(n_B + 1, dtype=np.complex128)
    chan = np.zeros(n_B + 1, dtype=np.complex128)
    barrier_b = Barrier(config.eps_B)
    inner[0] = 1.0
    if config.logic == 0:
        # open end: whatever crosses B leaves for good
        t = barrier_b.transmission
        x = 1.0 + 0j
        for k in range(1, n_B + 1):
            chan[k] = t * x
            x = barrier_b.reflect(x)
            inner[k] = x
    else:
        pair = (1.0 + 0j, 0j)
        for k in range(1, n_B + 1):
            pair = apply_barrier(barrier_b, pair)
            inner[k], chan[k] = pair
    return inner, chan


def run_protocol(config: ProtocolConfig) -> SimTrace:
    """Run ``config.N`` outer cycles of the two-barrier protocol.

    Each cycle scatters ``(alice, inner)`` off barrier A, then runs ``n_B``
    inner sub-steps against barrier B. With Bob's end open (logic 0) each
    sub-step emits ``i sin(eps_B) * inner`` into the ledger; with the mirror
    in place (logic 1) barrier B mixes ``inner`` with the local channel mode,
    which is released into the ledger when the cycle ends.
    """
    if not isinstance(config, ProtocolConfig):
        raise TypeError("run_protocol expects a ProtocolConfig")
    inner_resp, chan_resp = _inner_response(config)
    tail = inner_resp[-1]

    barrier_a = Barrier(config.eps_A)
    N = config.N
    alice = np.empty(N + 1, dtype=np.complex128)
    entry = np.empty(N, dtype=np.complex128)
    a, inner = 1.0 + 0j, 0j
    alice[0] = a
    for j in range(N):
        a, inner = apply_barrier(barrier_a, (a, inner))
        alice[j + 1] = a
        entry[j] = inner
        inner = inner * tail
    for arr in (alice, entry, inner_resp, chan_resp):
        arr.setflags(write=False)
    return SimTrace(config, alice, entry, inner_resp, chan_resp)


@dataclass(frozen=True, eq=False)
class ToyTrace:
    """Single-barrier run: Alice and Bob side amplitudes after each lap."""

    epsilon: float
    laps: int
    bob_mirror: int
    alice: np.ndarray
    bob: np.ndarray
    ledger: tuple[PacketRecord, ...]

    @property
    def escaped_probability(self) -> float:
        return math.fsum(r.probability for r in self.ledger)

    def to_dict(self) -> dict[str, Any]:
        return {
            "epsilon": self.epsilon,
            "laps": self.laps,
            "bob_mirror": self.bob_mirror,
            "alice": _complex_list(self.alice),
            "bob": _complex_list(self.bob),
            "ledger": [r.to_dict() for r in self.ledger],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ToyTrace:
        return cls(
            epsilon=d["epsilon"],
            laps=d["laps"],
            bob_mirror=d["bob_mirror"],
            alice=_complex_array(d["alice"]),
            bob=_complex_array(d["bob"]),
            ledger=tuple(PacketRecord.from_dict(r) for r in d["ledger"]),
        )


def run_toy(epsilon: float, laps: int, bob_mirror: int) -> ToyTrace:
    """Single barrier halfway between Alice and Bob.

    With Bob's mirror in place the two sides exchange amplitude coherently.
    Without it, whatever crosses the barrier on a lap leaves the cavity.
    """
    if not (0.0 < epsilon <= math.pi / 2):
        raise ValueError(f"epsilon must lie in (0, pi/2], got {epsilon!r}")
    _check_int("laps", laps, 0)
    if bob_mirror not in (0, 1):
        raise ValueError(f"bob_mirror must be 0 or 1, got {bob_mirror!r}")
    barrier = Barrier(epsilon)
    alice = np.empty(laps + 1, dtype=np.complex128)
    bob = np.empty(laps + 1, dtype=np.complex128)
    ledger: list[PacketRecord] = []
    a, b = 1.0 + 0j, 0j
    alice[0], bob[0] = a, b
    for lap in range(1, laps + 1):
        a, b = apply_barrier(barrier, (a, b))
        if not bob_mirror:
            ledger.append(PacketRecord(lap, None, b))
            b = 0j
        alice[lap], bob[lap] = a, b
    return ToyTrace(float(epsilon), laps, int(bob_mirror), alice, bob, tuple(ledger))


def closed_form_amplitude(
    region: str,
    logic: int,
    j_A: int,
    j_B: int,
    eps_A: float,
    eps_B: float,
    form: str = "exact",
) -> complex:
    """Table entries for the amplitude in each region after ``j_A`` outer and ``j_B`` inner collisions.

    ``form="exact"`` gives the finite-angle expression, ``form="limit"`` its
    leading order as ``eps_A -> 0`` and ``eps_B / eps_A -> 0``.
    """
    if region not in REGIONS:
        raise ValueError(f"region must be one of {REGIONS}, got {region!r}")
    if logic not in (0, 1):
        raise ValueError(f"logic must be 0 or 1, got {logic!r}")
    if form not in ("exact", "limit"):
        raise ValueError(f"form must be 'exact' or 'limit', got {form!r}")
    _check_int("j_A", j_A, 0)
    if region != "alice":
        _check_int("j_B", j_B, 1 if region == "channel" else 0)
    exact = form == "exact"

    if logic == 0:
        if region == "alice":
            return complex(math.cos(j_A * eps_A))
        if region == "between":
            if exact:
                return 1j * math.sin(j_A * eps_A) * math.cos(eps_B) ** j_B
            return 1j * math.sin(j_A * eps_A)
        if exact:
            return 1j * math.sin(j_A * eps_A) * math.cos(eps_B) ** (j_B - 1) * (1j * math.sin(eps_B))
        return complex(-eps_B * math.sin(j_A * eps_A))

    if region == "alice":
        return complex(math.cos(eps_A) ** j_A) if exact else 1 + 0j
    if j_A == 0:
        # nothing has crossed barrier A yet
        return 0j
    if region == "between":
        if exact:
            return math.cos(eps_A) ** (j_A - 1) * (1j * math.sin(eps_A)) * math.cos(j_B * eps_B)
        return 1j * eps_A * math.cos(j_B * eps_B)
    if exact:
        return math.cos(eps_A) ** (j_A - 1) * (1j * math.sin(eps_A)) * (1j * math.sin(j_B * eps_B))
    return complex(-eps_A * math.sin(j_B * eps_B))


@dataclass(frozen=True)
class ChannelProbability:
    measured: float
    closed_form: float
    ratio: float


def channel_probability(trace: SimTrace) -> ChannelProbability:
    """Probability that ever went past barrier B, against its closed-form scale.

    Logic 0 compares with ``(pi^2 / 8) eps_B / eps_A``; logic 1 with the upper
    bound ``pi eps_A / 2``. Only full runs (``N = n_A``) are accepted, plus
    the empty run ``N = 0``.
    """
    cfg = trace.config
    if trace.N not in (0, cfg.n_A):
        raise ValueError(f"closed forms assume N = n_A = {cfg.n_A}, trace has N = {trace.N}")
    if cfg.logic == 0:
        reference = math.pi**2 / 8 * cfg.eps_B / cfg.eps_A
    else:
        reference = math.pi * cfg.eps_A / 2
    measured = trace.escaped_probability() if trace.N else 0.0
    return ChannelProbability(measured, reference, measured / reference)


def decode_bit(trace: SimTrace, detection_cycle: int | None = None) -> int:
    """Alice's readout: 1 if she finds the particle with probability above 1/2."""
    cycle = trace.config.n_A if detection_cycle is None else detection_cycle
    if not 1 <= cycle <= trace.N:
        raise ValueError(f"detection_cycle={cycle} outside recorded cycles 1..{trace.N}")
    return int(abs(trace.alice[cycle]) ** 2 > 0.5)
