import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cqcsim.amplitude import Barrier, apply_barrier, barrier_matrix, barrier_power, norm2

angles = st.floats(min_value=0.0, max_value=math.pi / 2, allow_nan=False)
parts = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False)
amps = st.builds(complex, parts, parts)
pairs = st.tuples(amps, amps)


def close(p, q, tol=1e-12):
    return abs(p[0] - q[0]) <= tol and abs(p[1] - q[1]) <= tol


def test_quarter_turn_moves_everything_across():
    out = apply_barrier(Barrier(math.pi / 2), (1, 0))
    assert close(out, (0, 1j))


def test_zero_angle_is_identity():
    pair = (0.3 - 0.2j, -1.1 + 0.5j)
    assert close(apply_barrier(Barrier(0.0), pair), pair, 0.0)


def test_half_splitting():
    out = apply_barrier(Barrier(math.pi / 4), (1, 0))
    h = math.sqrt(2) / 2
    assert close(out, (h, 1j * h))
    assert abs(abs(out[0]) ** 2 - 0.5) < 1e-15
    assert abs(norm2(out) - 1.0) < 1e-15


@pytest.mark.parametrize("bad", [-1e-9, math.pi / 2 + 1e-9, math.nan, math.inf])
def test_barrier_rejects_bad_angle(bad):
    with pytest.raises(ValueError):
        Barrier(bad)


def test_amplitudes():
    b = Barrier(0.3)
    assert b.reflection == pytest.approx(math.cos(0.3))
    assert b.transmission == pytest.approx(1j * math.sin(0.3))


@pytest.mark.parametrize("n", [1, 2, 7, 100, 5000])
def test_power_reaches_bob_after_quarter_turn(n):
    assert close(barrier_power(Barrier(math.pi / (2 * n)), n, (1, 0)), (0, 1j))


@pytest.mark.parametrize("n", [1, 3, 100, 2500])
def test_power_half_turn_returns_with_sign_flip(n):
    assert close(barrier_power(Barrier(math.pi / (2 * n)), 2 * n, (1, 0)), (-1, 0))


def test_power_zero_is_identity():
    pair = (0.6 + 0.1j, -0.2j)
    assert barrier_power(Barrier(0.4), 0, pair) == pair


def test_power_rejects_negative():
    with pytest.raises(ValueError):
        barrier_power(Barrier(0.1), -1, (1, 0))


@settings(max_examples=200, deadline=None)
@given(angles, pairs)
def test_unitarity_preserves_norm(eps, pair):
    out = apply_barrier(Barrier(eps), pair)
    assert abs(norm2(out) - norm2(pair)) <= 1e-12 * max(1.0, norm2(pair))
    m = barrier_matrix(eps)
    np.testing.assert_allclose(m.conj().T @ m, np.eye(2), atol=1e-12, rtol=0)


@settings(max_examples=200, deadline=None)
@given(angles, angles, pairs)
def test_composition_adds_angles(e1, e2, pair):
    two_steps = apply_barrier(Barrier(e2), apply_barrier(Barrier(e1), pair))
    m = barrier_matrix(e1 + e2)
    one = m @ np.array(pair, dtype=complex)
    scale = max(1.0, math.sqrt(norm2(pair)))
    assert close(two_steps, tuple(one), 1e-12 * scale)


def test_composition_on_dense_grid():
    grid = np.linspace(0, math.pi / 2, 41)
    for e1 in grid:
        for e2 in grid:
            np.testing.assert_allclose(
                barrier_matrix(e2) @ barrier_matrix(e1), barrier_matrix(e1 + e2), atol=1e-12, rtol=0
            )


@settings(max_examples=60, deadline=None)
@given(angles, st.integers(min_value=0, max_value=10_000), st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
def test_power_matches_iteration(eps, j, phase, mix):
    pair = (math.cos(mix) * complex(math.cos(phase), math.sin(phase)), complex(math.sin(mix)))
    b = Barrier(eps)
    it = pair
    for _ in range(j):
        it = apply_barrier(b, it)
    direct = barrier_power(b, j, pair, check=False)
    # rounding in the j-fold loop grows linearly; 1e-12 holds through j = 1e4
    assert close(direct, it, 1e-12)
