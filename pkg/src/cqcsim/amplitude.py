"""Two-mode barrier unitary and its powers.

Amplitudes are plain Python ``complex`` values. A barrier with angle ``eps``
reflects with amplitude ``cos(eps)`` and transmits with ``1j * sin(eps)``.
Bounces off the closed cavity ends carry no phase of their own; every sign
flip seen in a protocol comes from composing rotations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

Pair = tuple[complex, complex]

POWER_CHECK_TOL = 1e-12
# each iterated step can misplace the rotation angle by about one ulp
_STEP_ROUNDING = 2.0 * np.finfo(float).eps


@dataclass(frozen=True)
class Barrier:
    """A thin partially transmitting barrier, ``0 <= epsilon <= pi/2``."""

    epsilon: float

    def __post_init__(self) -> None:
        eps = float(self.epsilon)
        if not math.isfinite(eps) or eps < 0.0 or eps > math.pi / 2:
            raise ValueError(f"barrier angle must lie in [0, pi/2], got {self.epsilon!r}")

    @property
    def reflection(self) -> complex:
        return complex(math.cos(self.epsilon))

    @property
    def transmission(self) -> complex:
        return 1j * math.sin(self.epsilon)

    @property
    def reflection_defect(self) -> float:
        """``1 - cos(epsilon)``, evaluated without cancellation."""
        return _defect(self.epsilon)

    def reflect(self, a: complex) -> complex:
        """Reflection amplitude applied to ``a``, i.e. ``cos(epsilon) * a``."""
        return a - self.reflection_defect * a

    def matrix(self) -> np.ndarray:
        return barrier_matrix(self.epsilon)


def barrier_matrix(epsilon: float) -> np.ndarray:
    """Return ``[[cos e, i sin e], [i sin e, cos e]]`` for any real angle."""
    c = math.cos(epsilon)
    s = math.sin(epsilon)
    return np.array([[c, 1j * s], [1j * s, c]], dtype=np.complex128)


def _defect(epsilon: float) -> float:
    h = math.sin(epsilon / 2)
    return 2.0 * h * h


def _rotate(epsilon: float, pair: Pair) -> Pair:
    # cos(e) * a is formed as a - (1 - cos e) * a: for small angles a rounded
    # cos(e) misstates 1 - cos(e) by ~1e-8 relative, which leaks probability
    # systematically over millions of steps
    a, b = complex(pair[0]), complex(pair[1])
    h = _defect(epsilon)
    s = 1j * math.sin(epsilon)
    return (a + (s * b - h * a), b + (s * a - h * b))


def apply_barrier(b: Barrier, pair: Pair) -> Pair:
    """Scatter the mode pair ``(a, b)`` once off the barrier."""
    return _rotate(b.epsilon, pair)


def barrier_power(b: Barrier, j: int, pair: Pair, *, check: bool = True) -> Pair:
    """Apply the barrier ``j`` times.

    The result is the single rotation by ``j * epsilon``. With ``check`` set,
    the j-fold iteration is also carried out and the two routes must agree to
    ``POWER_CHECK_TOL`` per component (widened only when ``j`` is so large
    that per-step rounding alone could exceed it), otherwise
    ``ArithmeticError`` is raised.
    """
    if j < 0:
        raise ValueError(f"power must be non-negative, got {j}")
    direct = _rotate(j * b.epsilon, pair)
    if check:
        iterated = (complex(pair[0]), complex(pair[1]))
        for _ in range(j):
            iterated = _rotate(b.epsilon, iterated)
        gap = max(abs(direct[0] - iterated[0]), abs(direct[1] - iterated[1]))
        if gap > max(POWER_CHECK_TOL, j * _STEP_ROUNDING):
            raise ArithmeticError(
                f"U(eps)^{j} and U({j}*eps) disagree by {gap:.3e} at eps={b.epsilon!r}"
            )
    return direct


def norm2(pair: Pair) -> float:
    return abs(pair[0]) ** 2 + abs(pair[1]) ** 2
