"""Parameter sweeps along double-limit sequences and empirical convergence orders.

Reference values in a table always come from closed forms, never from
another run. Fitted orders are empirical observations.
"""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Any

import numpy as np

from cqcsim.cavity import ProtocolConfig, channel_probability, run_protocol
from cqcsim.modular import exchange_expectation, riemann_transfer_sum

TARGETS = (
    "channel_prob_logic0",
    "channel_prob_logic1",
    "exchange_total",
    "alice_contrib",
    "channel_contrib",
    "riemann_sum",
)
ABSCISSAE = ("eps_A", "ratio", "inv_n_A")
CSV_HEADER = ("n_A", "n_B", "ratio", "measured", "reference", "deviation")


class SweepError(RuntimeError):
    """A single row failed; the message names the row."""


def default_ladder(k_max: int = 3) -> list[tuple[int, int]]:
    """``(25 * 2**k, 2500 * 4**k)`` for ``k = 0..k_max``: eps_A and eps_B/eps_A both halve."""
    if k_max < 0:
        raise ValueError(f"k_max must be >= 0, got {k_max}")
    return [(25 * 2**k, 2500 * 4**k) for k in range(k_max + 1)]


@dataclass(frozen=True)
class SweepSpec:
    """What to sweep.

    ``cycles`` is ``"full"`` (``N = n_A``) or a fraction ``f`` giving
    ``N = round(f * n_A)``. For ``riemann_sum`` only ``n_A`` is used, as the
    number of terms.
    """

    pairs: tuple[tuple[int, int], ...]
    target: str
    cycles: str | float = "full"

    def __post_init__(self) -> None:
        object.__setattr__(self, "pairs", tuple((int(a), int(b)) for a, b in self.pairs))
        if self.target not in TARGETS:
            raise ValueError(f"target must be one of {TARGETS}, got {self.target!r}")
        if self.cycles != "full":
            f = self.cycles
            if isinstance(f, str) or not (0.0 < float(f) <= 1.0):
                raise ValueError(f"cycles must be 'full' or a fraction in (0, 1], got {f!r}")
        for a, b in self.pairs:
            if not b >= a >= 2:
                raise ValueError(f"pair {(a, b)} violates n_B >= n_A >= 2")

    @property
    def increasing(self) -> bool:
        n = [a for a, _ in self.pairs]
        return all(x < y for x, y in zip(n, n[1:]))

    def cycles_for(self, n_A: int) -> int:
        if self.cycles == "full":
            return n_A
        return int(round(float(self.cycles) * n_A))


@dataclass(frozen=True)
class SweepRow:
    n_A: int
    n_B: int
    ratio: float
    measured: float
    reference: float
    deviation: float


@dataclass(frozen=True)
class SweepTable:
    target: str
    rows: tuple[SweepRow, ...]

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([r.n_A, r.n_B, repr(r.ratio), repr(r.measured), repr(r.reference), repr(r.deviation)])
        return buf.getvalue()

    def to_dict(self) -> dict[str, Any]:
        return {"target": self.target, "rows": [asdict(r) for r in self.rows]}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> SweepTable:
        return cls(d["target"], tuple(SweepRow(**r) for r in d["rows"]))


def reference_value(target: str, n_A: int, n_B: int, cycles: int) -> float:
    """Closed-form value the sweep compares against."""
    eps_A = math.pi / (2 * n_A)
    eps_B = math.pi / (2 * n_B)
    if target == "channel_prob_logic0":
        return math.pi**2 / 8 * eps_B / eps_A
    if target == "channel_prob_logic1":
        return math.pi * eps_A / 2
    if target in ("exchange_total", "riemann_sum"):
        return 1.0
    if target == "alice_contrib":
        return math.cos(cycles * eps_A)
    if target == "channel_contrib":
        return 1.0 - math.cos(cycles * eps_A)
    raise ValueError(f"unknown target {target!r}")


def _measure(target: str, n_A: int, n_B: int, cycles: int) -> float:
    if target == "riemann_sum":
        return riemann_transfer_sum(n_A)
    if target in ("channel_prob_logic0", "channel_prob_logic1"):
        logic = 0 if target.endswith("0") else 1
        return channel_probability(run_protocol(ProtocolConfig(n_A, n_B, logic, cycles))).measured
    up = run_protocol(ProtocolConfig(n_A, n_B, 0, cycles))
    down = run_protocol(ProtocolConfig(n_A, n_B, 1, cycles))
    d = exchange_expectation(up, down)
    return {"exchange_total": d.total, "alice_contrib": d.alice_contrib, "channel_contrib": d.channel_contrib}[target]


def _row(spec: SweepSpec, index: int) -> SweepRow:
    n_A, n_B = spec.pairs[index]
    cycles = spec.cycles_for(n_A)
    try:
        measured = _measure(spec.target, n_A, n_B, cycles)
    except (ValueError, TypeError, ArithmeticError) as exc:
        raise SweepError(f"row {index} (n_A={n_A}, n_B={n_B}): {exc}") from exc
    reference = reference_value(spec.target, n_A, n_B, cycles)
    return SweepRow(n_A, n_B, n_A / n_B, measured, reference, measured - reference)


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepTable:
    """One fresh deterministic run per pair, rows in spec order."""
    idx = range(len(spec.pairs))
    if workers > 1 and len(spec.pairs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = tuple(pool.map(lambda i: _row(spec, i), idx))
    else:
        rows = tuple(_row(spec, i) for i in idx)
    return SweepTable(spec.target, rows)


@dataclass(frozen=True)
class ConvergenceFit:
    """Least-squares fit ``|deviation| ~ constant * x**order``.

    ``fittable`` is False (and the numbers NaN) when the table cannot
    support a fit; ``reason`` says why.
    """

    order: float
    constant: float
    r_squared: float
    fittable: bool = True
    reason: str = ""


def _abscissa(rows: Sequence[SweepRow], kind: str) -> np.ndarray:
    n_A = np.array([r.n_A for r in rows], dtype=float)
    if kind == "eps_A":
        return np.pi / (2 * n_A)
    if kind == "ratio":
        return np.array([r.ratio for r in rows], dtype=float)
    if kind == "inv_n_A":
        return 1.0 / n_A
    raise ValueError(f"abscissa must be one of {ABSCISSAE}, got {kind!r}")


def convergence_fit(table: SweepTable, abscissa: str = "inv_n_A") -> ConvergenceFit:
    x = _abscissa(table.rows, abscissa)

    def unfit(reason: str) -> ConvergenceFit:
        return ConvergenceFit(math.nan, math.nan, math.nan, False, reason)

    if len(table.rows) < 3:
        return unfit(f"need at least 3 rows, got {len(table.rows)}")
    dev = table.column("deviation")
    if np.any(dev == 0.0) or not np.all(np.isfinite(dev)):
        return unfit("zero or non-finite deviation")
    if not (np.all(dev > 0) or np.all(dev < 0)):
        return unfit("deviations change sign")
    if np.unique(x).size < 2:
        return unfit("abscissa does not vary")
    lx, ly = np.log(x), np.log(np.abs(dev))
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return ConvergenceFit(float(slope), float(math.exp(intercept)), r2)
