"""Exit criteria, one test each. Run ``pytest tests/test_acceptance.py -v`` for the PASS/FAIL summary."""

import math
import time

import numpy as np
import pytest
from conftest import ACCEPTANCE_LOG
from oracles import dense_protocol

from cqcsim.amplitude import Barrier, barrier_matrix, barrier_power
from cqcsim.cavity import (
    ProtocolConfig,
    channel_probability,
    closed_form_amplitude,
    decode_bit,
    run_protocol,
)
from cqcsim.modular import exchange_expectation, flux_series, mirror_superposition_run, riemann_transfer_sum
from cqcsim.sweep import SweepSpec, convergence_fit, default_ladder, run_sweep


def record(name, ok, detail):
    ACCEPTANCE_LOG.append((name, bool(ok), detail))
    print(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
    assert ok, f"{name}: {detail}"


def run(n_A, n_B, logic, cycles=None):
    return run_protocol(ProtocolConfig(n_A, n_B, logic, cycles))


def test_01_unitary_algebra():
    rng = np.random.default_rng(20261017)
    n = 1000
    eps = rng.uniform(0.0, math.pi / 2, n)
    js = rng.integers(0, 10_001, n)
    z = rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))
    z /= np.linalg.norm(z, axis=1, keepdims=True)

    t0 = time.perf_counter()
    got = np.array([barrier_power(Barrier(e), int(j), (a, b), check=False) for e, j, (a, b) in zip(eps, js, z)])
    # j-fold application, all triples stepped together
    c, s = np.cos(eps), 1j * np.sin(eps)
    a, b = z[:, 0].copy(), z[:, 1].copy()
    for k in range(int(js.max())):
        live = js > k
        a, b = np.where(live, c * a + s * b, a), np.where(live, s * a + c * b, b)
    single = np.array([barrier_matrix(j * e) @ v for e, j, v in zip(eps, js, z)])
    elapsed = time.perf_counter() - t0

    gap_iter = float(np.max(np.abs(got - np.stack([a, b], axis=1))))
    gap_single = float(np.max(np.abs(got - single)))
    record(
        "#1 unitary algebra",
        gap_iter <= 1e-12 and gap_single <= 1e-12 and elapsed < 1.0,
        f"max|power - iterate| = {gap_iter:.2e}, max|power - U(j eps)| = {gap_single:.2e}, {elapsed:.2f}s",
    )


CONSERVATION_CONFIGS = (
    [(a, b, lg, None) for a in range(2, 11) for b in (2, 3, 17, 50, 100) for lg in (0, 1)]
    + [(50, 5000, 0, None), (100, 100, 1, None), (100, 10000, 0, None), (100, 10000, 1, None)]
    + [(200, 20000, lg, c) for lg in (0, 1) for c in (100, 200, 400)]
    + [(20, 2000, lg, None) for lg in (0, 1)]
)


def test_02_probability_conservation():
    worst = 0.0
    snapshots = 0
    for n_A, n_B, logic, cycles in CONSERVATION_CONFIGS:
        grid = run(n_A, n_B, logic, cycles).probability_grid()
        snapshots += grid.size
        worst = max(worst, float(np.max(np.abs(grid - 1.0))))
    record(
        "#2 probability conservation",
        worst <= 1e-12,
        f"{len(CONSERVATION_CONFIGS)} traces, {snapshots} snapshots, max|total - 1| = {worst:.2e}",
    )


def test_03_oracle_equivalence():
    t0 = time.perf_counter()
    worst = 0.0
    for n_A in range(2, 11):
        for n_B in range(2, 101):
            for logic in (0, 1):
                tr = run(n_A, n_B, logic)
                ref = dense_protocol(n_A, n_B, logic)
                snaps = ref["snapshots"]
                worst = max(
                    worst,
                    float(np.max(np.abs(snaps[:, :, 0] - tr.alice[1:, None]))),
                    float(np.max(np.abs(snaps[:, :, 1] - tr.inner_matrix()))),
                )
                if logic == 1:
                    chan = np.outer(tr.entry, tr.channel_response)
                    ledger = tr.entry * tr.channel_response[-1]
                else:
                    chan = np.zeros_like(snaps[:, :, 2])
                    ledger = tr.occupancy_matrix().ravel()
                worst = max(
                    worst,
                    float(np.max(np.abs(snaps[:, :, 2] - chan))),
                    float(np.max(np.abs(ref["ledger"] - ledger))),
                )
    elapsed = time.perf_counter() - t0
    record(
        "#3 oracle equivalence",
        worst <= 1e-12 and elapsed < 10.0,
        f"891 x 2 runs, max deviation {worst:.2e}, {elapsed:.2f}s",
    )


def test_04_table_logic1_exact():
    tr = run(100, 100, 1)
    eA, eB = tr.config.eps_A, tr.config.eps_B
    worst = 0.0
    for a, b, s in tr.iter_snapshots():
        worst = max(worst, abs(s.alice - closed_form_amplitude("alice", 1, a, 0, eA, eB)))
        worst = max(worst, abs(s.inner - closed_form_amplitude("between", 1, a, b, eA, eB)))
        if b:
            worst = max(worst, abs(s.channel_local - closed_form_amplitude("channel", 1, a, b, eA, eB)))
    record("#4 table, logic 1 exact", worst <= 1e-12, f"max deviation {worst:.2e} over {tr.snapshot_count} snapshots")


def test_05_counterfactual_logic0():
    t0 = time.perf_counter()
    cp = channel_probability(run(50, 5000, 0))
    elapsed = time.perf_counter() - t0
    ok = abs(cp.closed_form - math.pi**2 / 800) < 1e-15 and abs(cp.ratio - 1) <= 0.10 and elapsed < 5.0
    record(
        "#5 counterfactuality, logic 0",
        ok,
        f"measured {cp.measured:.6f} vs (pi^2/8) eps_B/eps_A = {cp.closed_form:.6f} (ratio {cp.ratio:.4f}), {elapsed:.2f}s",
    )


def test_06_counterfactual_logic1():
    bound = math.pi * (math.pi / 200) / 2
    measured = [channel_probability(run(100, n_B, 1)).measured for n_B in (100, 1000, 10000)]
    record(
        "#6 counterfactuality, logic 1",
        all(m <= bound for m in measured),
        f"measured {max(measured):.6f} <= pi eps_A / 2 = {bound:.6f}",
    )


def test_07_riemann_convergence():
    ns = (10, 100, 1000, 10_000)
    devs = [abs(riemann_transfer_sum(n) - 1) for n in ns]
    fit = convergence_fit(run_sweep(SweepSpec(tuple((n, n) for n in ns), "riemann_sum")), "inv_n_A")
    ok = all(d <= 2 / n for d, n in zip(devs, ns)) and fit.fittable and abs(fit.order - 1.0) <= 0.1
    record(
        "#7 transfer-sum convergence",
        ok,
        "deviations " + ", ".join(f"{d:.2e}" for d in devs) + f"; fitted order {fit.order:.3f}",
    )


@pytest.fixture(scope="module")
def full_pair():
    return run(200, 20000, 0), run(200, 20000, 1)


def test_08a_conservation_decomposition(full_pair):
    t0 = time.perf_counter()
    d = exchange_expectation(*full_pair)
    eps = math.pi / 400
    ok = (
        -0.02 <= d.alice_contrib <= 0.02
        and abs(d.between_contrib) <= 2 * eps
        and 0.95 <= d.channel_contrib <= 1.02
        and abs(d.total - 1) <= 0.05
    )
    record(
        "#8a region decomposition at (200, 20000)",
        ok and time.perf_counter() - t0 < 60,
        f"alice {d.alice_contrib:.5f}, between {d.between_contrib:.2e}, channel {d.channel_contrib:.5f}, "
        f"total {d.total:.12f}",
    )


def test_08b_ladder_monotone():
    t0 = time.perf_counter()
    gaps = []
    for n_A, n_B in default_ladder(3):
        gaps.append(abs(exchange_expectation(run(n_A, n_B, 0), run(n_A, n_B, 1)).total - 1))
    elapsed = time.perf_counter() - t0
    decreasing = all(b < a for a, b in zip(gaps, gaps[1:]))
    record(
        "#8b |total - 1| strictly decreasing along the ladder",
        decreasing and elapsed < 60,
        "|total - 1| = " + ", ".join(f"{g:.2e}" for g in gaps) + f" ({elapsed:.2f}s)",
    )


def test_09_arbitrary_n_flux():
    fs = flux_series(run(200, 20000, 0, 100), run(200, 20000, 1, 100))
    got = fs.cumulative_at(100)
    ref = 1 - math.cos(math.pi / 4)
    record("#9 flux at N = n_A / 2", abs(got - ref) <= 0.02, f"cumulative channel {got:.5f} vs 1 - cos(pi/4) = {ref:.5f}")


def test_10_mirror_disentanglement():
    r = mirror_superposition_run(ProtocolConfig(200, 20000, 0), 400)
    d = r.decomposition_at_end
    ok = abs(r.alice_region_overlap_at_end + 1) <= 0.05 and abs(d.total - 1) <= 0.05
    record(
        "#10 mirror superposition at 2 T_A",
        ok,
        f"Alice overlap {r.alice_region_overlap_at_end:.5f}, channel {d.channel_contrib:.5f}, total {d.total:.12f}",
    )


def test_11_bit_decoding():
    errors = 0
    for n_A, n_B in ((20, 2000), (50, 5000), (100, 10_000), (200, 20_000)):
        for logic in (0, 1):
            errors += decode_bit(run(n_A, n_B, logic)) != logic
    record("#11 bit decoding", errors == 0, f"{errors} errors in 8 runs")
