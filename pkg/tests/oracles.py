"""Independent oracles: closed forms, frozen hand values, finite differences.

Frozen numbers were derived symbolically (polar integration over the unit
disk) before the corresponding code was exercised; they are not outputs of
the package.
"""
from __future__ import annotations

from math import comb, pi, sqrt

import mpmath
import numpy as np

SQRT_PI = sqrt(pi)

# ||d^i T^beta x|| on the unit disk with rho = (1 - x^2 - y^2)/2; words act
# right to left, (2, 3) means T2 T3 x = T2 y = rho. Derivative norms are
# summed over all multi-indices of order i.
UX_TABLE = {
    (0, ()): SQRT_PI / 2,
    (1, ()): SQRT_PI,
    (2, ()): 0.0,
    (0, (1,)): sqrt(3) * SQRT_PI / 6,  # ||rho||
    (1, (1,)): SQRT_PI,  # ||x|| + ||y||
    (0, (2,)): 0.0,
    (1, (2,)): 0.0,
    (0, (3,)): SQRT_PI / 2,  # ||y||
    (1, (3,)): SQRT_PI,
    (0, (1, 1)): sqrt(6) * SQRT_PI / 24,  # ||rho rho_x||
    (0, (1, 2)): 0.0,
    (0, (1, 3)): 0.0,
    (0, (2, 1)): sqrt(6) * SQRT_PI / 24,
    (0, (2, 2)): 0.0,
    (0, (2, 3)): sqrt(3) * SQRT_PI / 6,
    (0, (3, 1)): 0.0,  # T3 rho = 0
    (0, (3, 2)): 0.0,
    (0, (3, 3)): SQRT_PI / 2,  # ||-x||
}

# [T1, Lap] x^2 = 8x, so the left side is ||8x|| = 4 sqrt(pi); the Leibniz
# right side at (0, 1) is K (||d^2 x^2|| + ||d x^2||) = K (2 sqrt(pi) + sqrt(pi)).
K_STAR_X2 = 4.0 / 3.0

ELLIPSE_2_1_PERIMETER = 9.688448220547675


def phi_disk_fx(p):
    """``Lap phi = -x`` on the unit disk with ``phi = 0`` on the circle:
    ``-x^3/6`` plus the harmonic extension of ``cos^3 t / 6``."""
    x, y = p[..., 0], p[..., 1]
    return -x**3 / 6 + (3 * x + x**3 - 3 * x * y**2) / 24


def phi_disk_const(p):
    """``Lap phi = 4`` with zero boundary values."""
    x, y = p[..., 0], p[..., 1]
    return x**2 + y**2 - 1


# finite differences -------------------------------------------------------------
#
# Stencils are summed in extended precision so that the oracle error is the
# h^2k truncation alone; kernels below are written against mpmath scalars.

FD_DPS = 40


def _central_weights(n: int, h):
    """Offsets and weights of the n-th central difference with step ``h``."""
    offs = [(mpmath.mpf(n) / 2 - k) * h for k in range(n + 1)]
    w = [(-1) ** k * comb(n, k) / h**n for k in range(n + 1)]
    return offs, w


def fd_derivative(f, point, a: int, b: int, h: float) -> float:
    """Tensor-product central difference for ``d^a_x d^b_y f``; ``O(h^2)``.
    ``f`` takes two scalars."""
    with mpmath.workdps(FD_DPS):
        h = mpmath.mpf(h)
        x0, y0 = mpmath.mpf(float(point[0])), mpmath.mpf(float(point[1]))
        ox, wx = _central_weights(a, h)
        oy, wy = _central_weights(b, h)
        total = mpmath.mpf(0)
        for dx, cx in zip(ox, wx):
            for dy, cy in zip(oy, wy):
                total += cx * cy * f(x0 + dx, y0 + dy)
        return total


def richardson(f, point, a: int, b: int, h: float = 0.02, levels: int = 3) -> float:
    """Richardson extrapolation of :func:`fd_derivative` over ``h, h/2, ...``
    eliminating the ``h^2, h^4, ...`` error terms."""
    with mpmath.workdps(FD_DPS):
        table = [fd_derivative(f, point, a, b, h / 2**k) for k in range(levels)]
        for lev in range(1, levels):
            fac = mpmath.mpf(4) ** lev
            table = [(fac * table[k + 1] - table[k]) / (fac - 1) for k in range(len(table) - 1)]
        return float(table[0])


def log_charge(source):
    sx, sy = (float(c) for c in source)
    return lambda x, y: mpmath.log((x - sx) ** 2 + (y - sy) ** 2) / 2


def stokeslet_velocity(source, i: int, j: int):
    sx, sy = (float(c) for c in source)

    def g(x, y):
        r = (x - sx, y - sy)
        r2 = r[0] ** 2 + r[1] ** 2
        out = r[i - 1] * r[j - 1] / r2
        if i == j:
            out -= mpmath.log(r2) / 2
        return out

    return g


def stokeslet_pressure(source, j: int):
    sx, sy = (float(c) for c in source)

    def g(x, y):
        r = (x - sx, y - sy)
        return 2 * r[j - 1] / (r[0] ** 2 + r[1] ** 2)

    return g


def log_charge_derivative_exact(target, source, a: int, b: int) -> float:
    """``d^a_x d^b_y log|z - s|`` via ``log|z-s| = Re log(z - s)`` and
    ``d_y = i d_z`` on holomorphic functions."""
    z = complex(target[0] - source[0], target[1] - source[1])
    n = a + b
    if n == 0:
        return float(np.log(abs(z)))
    from math import factorial

    dn = (-1) ** (n - 1) * factorial(n - 1) / z**n
    return float((1j**b * dn).real)
