"""Command-line entry point.

Subcommands map one-to-one onto library operations::

    cqcsim toy         single-barrier cavity (eps = pi / 2 n_A, --cycles laps, --logic = Bob's mirror)
    cqcsim protocol    two-barrier run, channel probability and decoded bit
    cqcsim expectation region split of the exchange expectation, two cavities
    cqcsim flux        per-cycle accumulation of the channel contribution
    cqcsim mirror      one cavity, Bob's mirror in superposition (default 2 n_A cycles)
    cqcsim riemann     the transfer Riemann sum for --n terms
    cqcsim sweep       double-limit ladder (25*2^k, 2500*4^k), k = 0..--ladder

CSV columns:
    toy          lap,alice_re,alice_im,bob_re,bob_im
    protocol     j_A,j_B,region,re,im
    expectation  region,contribution,reference
    flux         j_A,cumulative_channel,alice_term,running_total
    mirror       cycle,exchange
    riemann      n,value,deviation
    sweep        n_A,n_B,ratio,measured,reference,deviation

Exit codes: 0 success, 2 invalid input, 3 output failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

from cqcsim.cavity import (
    ProtocolConfig,
    channel_probability,
    decode_bit,
    run_protocol,
    run_toy,
)
from cqcsim.modular import (
    exchange_expectation,
    flux_series,
    mirror_superposition_run,
    riemann_transfer_sum,
)
from cqcsim.sweep import TARGETS, SweepError, SweepSpec, convergence_fit, default_ladder, run_sweep

SUBCOMMANDS = ("toy", "protocol", "expectation", "flux", "mirror", "riemann", "sweep")
EXIT_OK, EXIT_INPUT, EXIT_IO = 0, 2, 3


class InputError(ValueError):
    pass


@dataclass(frozen=True)
class CliInvocation:
    subcommand: str
    n_A: int = 100
    n_B: int = 10000
    cycles: int | None = None
    logic: int | None = None
    format: str = "text"
    out: str | None = None
    n: int = 1000
    ladder: int = 3
    target: str = "exchange_total"
    fraction: float | None = None
    limit: bool = False
    workers: int = 1


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {v}")
    return v


def _non_negative(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _fraction(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not 0.0 < v <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1], got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--out", metavar="PATH", help="write output here instead of stdout")

    cavity = argparse.ArgumentParser(add_help=False)
    cavity.add_argument("--n-a", dest="n_A", type=_positive, default=100)
    cavity.add_argument("--n-b", dest="n_B", type=_positive, default=10000)
    cavity.add_argument("--cycles", type=_non_negative, default=None)

    parser = argparse.ArgumentParser(prog="cqcsim", description="Counterfactual communication cavity simulator.")
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")

    p = sub.add_parser("toy", parents=[common, cavity], help="single-barrier cavity")
    p.add_argument("--logic", type=int, choices=(0, 1), default=1, help="1 = Bob's mirror in place")

    p = sub.add_parser("protocol", parents=[common, cavity], help="two-barrier protocol run")
    p.add_argument("--logic", type=int, choices=(0, 1), default=0)

    for name, text in (("expectation", "exchange expectation by region"), ("flux", "channel flux per cycle")):
        p = sub.add_parser(name, parents=[common, cavity], help=text)
        p.add_argument("--limit", action="store_true", help="use leading-order amplitudes")

    sub.add_parser("mirror", parents=[common, cavity], help="mirror-superposition run")

    p = sub.add_parser("riemann", parents=[common], help="transfer Riemann sum")
    p.add_argument("--n", type=_positive, default=1000)

    p = sub.add_parser("sweep", parents=[common], help="double-limit ladder sweep")
    p.add_argument("--ladder", type=_non_negative, default=3, metavar="K_MAX")
    p.add_argument("--target", choices=TARGETS, default="exchange_total")
    p.add_argument("--fraction", type=_fraction, default=None, help="cycles = fraction * n_A")
    p.add_argument("--workers", type=_positive, default=1)
    return parser


def parse_invocation(argv: Sequence[str]) -> CliInvocation:
    """Parse ``argv``; usage errors exit with status 2 and name the flag."""
    ns = build_parser().parse_args(list(argv))
    fields = {k: v for k, v in vars(ns).items() if v is not None}
    return CliInvocation(**fields)


def _g17(x: float) -> str:
    return format(x, ".17g")


def _g6(x: float) -> str:
    return format(x, ".6g")


def _amp6(z: complex) -> str:
    return f"{z.real:.6g}{z.imag:+.6g}i"


def _csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_g17(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _config(inv: CliInvocation, logic: int, default_cycles: int | None = None) -> ProtocolConfig:
    cycles = inv.cycles if inv.cycles is not None else default_cycles
    return ProtocolConfig(inv.n_A, inv.n_B, logic, cycles)


def _render(inv: CliInvocation) -> str:
    fmt = inv.format
    name = inv.subcommand

    if name == "toy":
        laps = inv.cycles if inv.cycles is not None else inv.n_A
        mirror = 1 if inv.logic is None else inv.logic
        tr = run_toy(math.pi / (2 * inv.n_A), laps, mirror)
        if fmt == "json":
            return json.dumps(tr.to_dict())
        if fmt == "csv":
            rows = [(k, a.real, a.imag, b.real, b.imag) for k, (a, b) in enumerate(zip(tr.alice, tr.bob))]
            return _csv(("lap", "alice_re", "alice_im", "bob_re", "bob_im"), rows)
        a, b = tr.alice[-1], tr.bob[-1]
        return "\n".join(
            [
                f"toy cavity: eps = pi/{2 * inv.n_A}, laps = {laps}, Bob's mirror = {'in' if mirror else 'out'}",
                f"  Alice amplitude   {_amp6(a)}   probability {_g6(abs(a) ** 2)}",
                f"  Bob amplitude     {_amp6(b)}   probability {_g6(abs(b) ** 2)}",
                f"  escaped           {len(tr.ledger)} packets, probability {_g6(tr.escaped_probability)}",
            ]
        )

    if name == "protocol":
        cfg = _config(inv, 0 if inv.logic is None else inv.logic)
        tr = run_protocol(cfg)
        if fmt == "json":
            return json.dumps(tr.to_dict())
        if fmt == "csv":
            rows = []
            for a, b, s in tr.iter_snapshots():
                rows.append((a, b, "alice", s.alice.real, s.alice.imag))
                rows.append((a, b, "between", s.inner.real, s.inner.imag))
                if cfg.logic == 1:
                    rows.append((a, b, "channel", s.channel_local.real, s.channel_local.imag))
            return _csv(("j_A", "j_B", "region", "re", "im"), rows)
        lines = [
            f"protocol: n_A = {cfg.n_A}, n_B = {cfg.n_B}, N = {cfg.N}, logic = {cfg.logic}",
            f"  Alice probability after N cycles   {_g6(abs(tr.alice[cfg.N]) ** 2)}",
            f"  probability past barrier B         {_g6(tr.escaped_probability())}",
        ]
        if cfg.N == cfg.n_A:
            cp = channel_probability(tr)
            label = "(pi^2/8) eps_B/eps_A" if cfg.logic == 0 else "bound pi eps_A/2"
            lines.append(f"  closed form {label:<22} {_g6(cp.closed_form)}   ratio {_g6(cp.ratio)}")
            lines.append(f"  decoded bit                        {decode_bit(tr)}")
        return "\n".join(lines)

    if name in ("expectation", "flux"):
        up = run_protocol(_config(inv, 0))
        down = run_protocol(_config(inv, 1))
        eps_A = up.config.eps_A
        N = up.config.N
        if name == "expectation":
            d = exchange_expectation(up, down, mode="limit" if inv.limit else "simulated")
            refs = {"alice": math.cos(N * eps_A), "between": 0.0, "channel": 1 - math.cos(N * eps_A), "total": 1.0}
            vals = {"alice": d.alice_contrib, "between": d.between_contrib, "channel": d.channel_contrib, "total": d.total}
            if fmt == "json":
                return json.dumps(d.to_dict())
            if fmt == "csv":
                return _csv(("region", "contribution", "reference"), [(k, vals[k], refs[k]) for k in vals])
            lines = [
                f"exchange expectation: n_A = {up.config.n_A}, n_B = {up.config.n_B}, N = {N}"
                + (" (leading-order amplitudes)" if inv.limit else ""),
                f"  {'region':<10}{'value':>14}{'reference':>14}",
            ]
            lines += [f"  {k:<10}{_g6(vals[k]):>14}{_g6(refs[k]):>14}" for k in vals]
            return "\n".join(lines)
        fs = flux_series(up, down)
        if fmt == "json":
            return json.dumps(fs.to_dict())
        if fmt == "csv":
            return _csv(
                ("j_A", "cumulative_channel", "alice_term", "running_total"),
                [(r.j_A, r.cumulative_channel, r.alice_term, r.running_total) for r in fs.records],
            )
        lines = [f"flux: n_A = {up.config.n_A}, n_B = {up.config.n_B}, N = {N}"]
        lines.append(f"  {'j_A':>6}{'channel':>14}{'1-cos':>14}{'alice':>14}{'total':>14}")
        step = max(1, N // 10)
        for r in fs.records:
            if r.j_A % step == 0 or r.j_A == N:
                ref = 1 - math.cos(r.j_A * eps_A)
                lines.append(
                    f"  {r.j_A:>6}{_g6(r.cumulative_channel):>14}{_g6(ref):>14}"
                    f"{_g6(r.alice_term):>14}{_g6(r.running_total):>14}"
                )
        return "\n".join(lines)

    if name == "mirror":
        base = ProtocolConfig(inv.n_A, inv.n_B, 0)
        total = inv.cycles if inv.cycles is not None else 2 * inv.n_A
        run = mirror_superposition_run(base, total)
        if fmt == "json":
            return json.dumps(run.to_dict())
        if fmt == "csv":
            return _csv(("cycle", "exchange"), list(enumerate(run.exchange_series)))
        d = run.decomposition_at_end
        return "\n".join(
            [
                f"mirror superposition: n_A = {inv.n_A}, n_B = {inv.n_B}, cycles = {total}",
                f"  Alice-region overlap   {_g6(run.alice_region_overlap_at_end)}",
                f"  between barriers       {_g6(d.between_contrib)}",
                f"  transmission channel   {_g6(d.channel_contrib)}",
                f"  total                  {_g6(d.total)}",
            ]
        )

    if name == "riemann":
        value = riemann_transfer_sum(inv.n)
        if fmt == "json":
            return json.dumps({"n": inv.n, "value": value, "deviation": value - 1.0})
        if fmt == "csv":
            return _csv(("n", "value", "deviation"), [(inv.n, value, value - 1.0)])
        return f"riemann sum: n = {inv.n}, value = {_g6(value)}, deviation = {_g6(value - 1.0)}"

    if name == "sweep":
        spec = SweepSpec(tuple(default_ladder(inv.ladder)), inv.target, inv.fraction or "full")
        table = run_sweep(spec, workers=inv.workers)
        if fmt == "json":
            return json.dumps(table.to_dict())
        if fmt == "csv":
            return table.to_csv()
        lines = [f"sweep: target = {table.target}, ladder k = 0..{inv.ladder}"]
        lines.append(f"  {'n_A':>6}{'n_B':>9}{'ratio':>12}{'measured':>14}{'reference':>14}{'deviation':>14}")
        for r in table.rows:
            lines.append(
                f"  {r.n_A:>6}{r.n_B:>9}{_g6(r.ratio):>12}{_g6(r.measured):>14}"
                f"{_g6(r.reference):>14}{_g6(r.deviation):>14}"
            )
        fit = convergence_fit(table, "eps_A")
        if fit.fittable:
            lines.append(f"  empirical order in eps_A: {fit.order:.3f} (r^2 = {fit.r_squared:.4f})")
        else:
            lines.append(f"  no convergence fit: {fit.reason}")
        return "\n".join(lines)

    raise InputError(f"unknown subcommand {name!r}")


def execute(inv: CliInvocation) -> int:
    try:
        text = _render(inv)
    except (ValueError, TypeError, ArithmeticError, SweepError) as exc:
        print(f"cqcsim {inv.subcommand}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if not text.endswith("\n"):
        text += "\n"
    try:
        if inv.out:
            with open(inv.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"cqcsim {inv.subcommand}: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    inv = parse_invocation(sys.argv[1:] if argv is None else argv)
    return execute(inv)


if __name__ == "__main__":
    sys.exit(main())
