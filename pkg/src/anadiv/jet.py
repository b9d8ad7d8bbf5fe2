"""Truncated bivariate Taylor jets, batched over base points.

A :class:`Jet` holds ``coeffs[..., a, b] = d^a_x d^b_y u / (a! b!)`` at the
base point(s), for ``a + b <= order``. The leading axes are a batch of
independent base points, so one Jet usually describes a field sampled at a
whole quadrature set. Storage is a dense ``(order+1, order+1)`` square per
point with the entries above the anti-diagonal kept at zero.
"""
from __future__ import annotations

from functools import lru_cache
from math import factorial

import numpy as np

from .errors import (
    BasePointMismatch,
    OrderExhausted,
    OrderMismatch,
    OutsideConvergence,
    SourceTargetCoincide,
)


@lru_cache(maxsize=None)
def triangle_mask(m: int) -> np.ndarray:
    a = np.arange(m + 1)
    mask = (a[:, None] + a[None, :] <= m).astype(float)
    mask.flags.writeable = False
    return mask


@lru_cache(maxsize=None)
def factorial_scale(m: int) -> np.ndarray:
    """``a! b!`` on the (m+1, m+1) grid; converts scaled coefficients to derivatives."""
    f = np.array([float(factorial(k)) for k in range(m + 1)])
    out = np.outer(f, f)
    out.flags.writeable = False
    return out


class Jet:
    __slots__ = ("base", "coeffs")

    def __init__(self, base, coeffs):
        self.base = np.asarray(base, dtype=float)
        self.coeffs = np.asarray(coeffs, dtype=float)
        if self.coeffs.ndim < 2 or self.coeffs.shape[-1] != self.coeffs.shape[-2]:
            raise ValueError(f"coefficient block must be square, got {self.coeffs.shape}")
        if self.base.shape[-1] != 2:
            raise ValueError("base points must be 2D")

    # construction -------------------------------------------------------
    @classmethod
    def zeros(cls, base, order: int) -> "Jet":
        base = np.asarray(base, dtype=float)
        return cls(base, np.zeros(base.shape[:-1] + (order + 1, order + 1)))

    @classmethod
    def constant(cls, base, order: int, value) -> "Jet":
        out = cls.zeros(base, order)
        out.coeffs[..., 0, 0] = value
        return out

    @classmethod
    def from_poly(cls, poly, base, order: int) -> "Jet":
        base = np.asarray(base, dtype=float)
        return cls(base, poly.taylor(base, order))

    @classmethod
    def variable(cls, base, order: int, direction: str) -> "Jet":
        """Jet of the coordinate function ``x`` or ``y``."""
        base = np.asarray(base, dtype=float)
        out = cls.zeros(base, order)
        k = {"x": 0, "y": 1}[direction]
        out.coeffs[..., 0, 0] = base[..., k]
        if order >= 1:
            out.coeffs[..., 1 - k, k] = 1.0
        return out

    # basic properties ---------------------------------------------------
    @property
    def order(self) -> int:
        return self.coeffs.shape[-1] - 1

    @property
    def batch_shape(self) -> tuple:
        return self.coeffs.shape[:-2]

    def __len__(self):
        m = self.order
        return (m + 1) * (m + 2) // 2

    def packed(self) -> np.ndarray:
        """Triangular coefficient vector, ordered by total degree then by ``b``."""
        m = self.order
        idx = [(d - b, b) for d in range(m + 1) for b in range(d + 1)]
        return np.stack([self.coeffs[..., a, b] for a, b in idx], axis=-1)

    @property
    def value(self) -> np.ndarray:
        return self.coeffs[..., 0, 0]

    def derivative(self, a: int, b: int) -> np.ndarray:
        """``d^a_x d^b_y`` at the base point(s)."""
        if a + b > self.order:
            raise OrderExhausted(f"derivative ({a},{b}) exceeds jet order {self.order}")
        return self.coeffs[..., a, b] * (factorial(a) * factorial(b))

    def derivatives(self, total: int) -> np.ndarray:
        """All derivatives of total order ``total``; last axis indexed by ``b``."""
        if total > self.order:
            raise OrderExhausted(f"order {total} exceeds jet order {self.order}")
        return np.stack([self.derivative(total - b, b) for b in range(total + 1)], axis=-1)

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise OrderExhausted(f"cannot raise jet order {self.order} to {order}")
        if order == self.order:
            return self
        c = self.coeffs[..., : order + 1, : order + 1] * triangle_mask(order)
        return Jet(self.base, c)

    def evaluate(self, offsets) -> np.ndarray:
        """Evaluate the Taylor polynomial at ``base + offsets``."""
        h = np.asarray(offsets, dtype=float)
        m = self.order
        hx = h[..., 0, None] ** np.arange(m + 1)
        hy = h[..., 1, None] ** np.arange(m + 1)
        return np.einsum("...ab,...a,...b->...", self.coeffs, hx, hy)

    # arithmetic ---------------------------------------------------------
    def _check(self, other: "Jet"):
        if self.order != other.order:
            raise OrderMismatch(f"orders differ: {self.order} vs {other.order}")
        if self.base is not other.base and not np.array_equal(self.base, other.base):
            raise BasePointMismatch("jets are expanded at different base points")

    def __add__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return Jet(self.base, self.coeffs + other.coeffs)
        out = self.coeffs.copy()
        out[..., 0, 0] += other
        return Jet(self.base, out)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.base, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            return jet_mul(self, other)
        other = np.asarray(other, dtype=float)
        return Jet(self.base, self.coeffs * other[..., None, None])

    __rmul__ = __mul__

    def scale(self, factor) -> "Jet":
        return self * factor

    def diff(self, direction: str) -> "Jet":
        return jet_diff(self, direction)

    def laplacian(self) -> "Jet":
        return jet_laplacian(self)

    def __repr__(self):
        return f"Jet(order={self.order}, batch={self.batch_shape})"


def jet_add(a: Jet, b: Jet) -> Jet:
    return a + b


def jet_mul(a: Jet, b: Jet) -> Jet:
    """Truncated Cauchy product. Loops over the structurally nonzero
    coefficients of the sparser operand."""
    a._check(b)
    m = a.order
    nza = np.any(a.coeffs != 0, axis=tuple(range(a.coeffs.ndim - 2)))
    nzb = np.any(b.coeffs != 0, axis=tuple(range(b.coeffs.ndim - 2)))
    if nzb.sum() < nza.sum():
        a, b = b, a
        nza = nzb
    shape = np.broadcast_shapes(a.coeffs.shape, b.coeffs.shape)
    out = np.zeros(shape)
    B = b.coeffs
    for i, j in zip(*np.nonzero(nza)):
        out[..., i:, j:] += a.coeffs[..., i, j, None, None] * B[..., : m + 1 - i, : m + 1 - j]
    out *= triangle_mask(m)
    return Jet(a.base, out)


def jet_diff(a: Jet, direction: str) -> Jet:
    m = a.order
    if m < 1:
        raise OrderExhausted("cannot differentiate an order-0 jet")
    k = np.arange(1, m + 1, dtype=float)
    if direction == "x":
        c = a.coeffs[..., 1:, :m] * k[:, None]
    elif direction == "y":
        c = a.coeffs[..., :m, 1:] * k[None, :]
    else:
        raise ValueError(f"direction must be 'x' or 'y', got {direction!r}")
    return Jet(a.base, c * triangle_mask(m - 1))


def jet_laplacian(a: Jet) -> Jet:
    m = a.order
    if m < 2:
        raise OrderExhausted("Laplacian needs jet order >= 2")
    k = np.arange(m - 1, dtype=float)
    w = (k + 1) * (k + 2)
    c = a.coeffs[..., 2:, : m - 1] * w[:, None] + a.coeffs[..., : m - 1, 2:] * w[None, :]
    return Jet(a.base, c * triangle_mask(m - 2))


# series composition ------------------------------------------------------

def compose_series(outer, inner: Jet) -> Jet:
    """Jet of ``F(inner)`` given the Taylor coefficients of ``F`` about
    ``inner(0)``.

    ``outer`` has shape ``batch + (K,)`` (or ``(K,)``); coefficients beyond
    ``inner.order`` are ignored and K must be at least ``inner.order + 1``.
    """
    outer = np.asarray(outer, dtype=float)
    m = inner.order
    if outer.shape[-1] < m + 1:
        raise ValueError(f"outer series needs at least {m + 1} coefficients")
    t = Jet(inner.base, inner.coeffs.copy())
    t.coeffs[..., 0, 0] = 0.0
    res = Jet.constant(inner.base, m, outer[..., m])
    for k in range(m - 1, -1, -1):
        res = jet_mul(res, t)
        res.coeffs[..., 0, 0] += outer[..., k]
    return res


def _series_coefficients(name: str, c0: np.ndarray, m: int) -> np.ndarray:
    k = np.arange(m + 1)
    if name == "reciprocal":
        if np.any(c0 == 0):
            raise OutsideConvergence("reciprocal of a jet with zero constant term")
        return ((-1.0) ** k) / c0[..., None] ** (k + 1)
    if name == "log":
        if np.any(c0 <= 0):
            raise OutsideConvergence("log of a jet with nonpositive constant term")
        out = np.empty(c0.shape + (m + 1,))
        out[..., 0] = np.log(c0)
        kk = k[1:]
        out[..., 1:] = ((-1.0) ** (kk + 1)) / kk / c0[..., None] ** kk
        return out
    if name == "sqrt":
        if np.any(c0 <= 0):
            raise OutsideConvergence("square root of a jet with nonpositive constant term")
        # binomial(1/2, k) c0^(1/2 - k)
        coef = np.ones(m + 1)
        for j in range(1, m + 1):
            coef[j] = coef[j - 1] * (0.5 - (j - 1)) / j
        return coef * np.sqrt(c0)[..., None] / c0[..., None] ** k
    raise ValueError(f"unknown atom {name!r}")


def jet_reciprocal(a: Jet) -> Jet:
    return compose_series(_series_coefficients("reciprocal", np.asarray(a.value), a.order), a)


def jet_log(a: Jet) -> Jet:
    return compose_series(_series_coefficients("log", np.asarray(a.value), a.order), a)


def jet_sqrt(a: Jet) -> Jet:
    return compose_series(_series_coefficients("sqrt", np.asarray(a.value), a.order), a)


# fundamental-solution kernels --------------------------------------------

KERNELS = ("log-charge", "stokeslet-velocity", "stokeslet-pressure")


def _separation(target, source):
    target = np.asarray(target, dtype=float)
    source = np.asarray(source, dtype=float)
    r0 = target - source
    r2 = np.sum(r0 * r0, axis=-1)
    if np.any(r2 == 0):
        raise SourceTargetCoincide("kernel evaluated at its source point")
    return target, r0, r2


def _r2_jet(base, r0, r2, m):
    c = np.zeros(r2.shape + (m + 1, m + 1))
    c[..., 0, 0] = r2
    if m >= 1:
        c[..., 1, 0] = 2 * r0[..., 0]
        c[..., 0, 1] = 2 * r0[..., 1]
    if m >= 2:
        c[..., 2, 0] = 1.0
        c[..., 0, 2] = 1.0
    return Jet(base, c)


def _linear_jet(base, value, k, m):
    c = np.zeros(value.shape + (m + 1, m + 1))
    c[..., 0, 0] = value
    if m >= 1:
        c[..., 1 - k, k] = 1.0
    return Jet(base, c)


class KernelJets:
    """Shared building blocks for all kernels at a batch of (target, source)
    pairs: jets of ``r_1``, ``r_2``, ``log r`` and ``1/r^2``."""

    def __init__(self, target, source, order: int):
        base, r0, r2 = _separation(target, source)
        base = np.broadcast_to(base, r0.shape)
        m = int(order)
        self.order = m
        self.base = base
        rr = _r2_jet(base, r0, r2, m)
        self.log_r = jet_log(rr) * 0.5
        self.inv_r2 = jet_reciprocal(rr)
        self.r = (_linear_jet(base, r0[..., 0], 0, m), _linear_jet(base, r0[..., 1], 1, m))

    def log_charge(self) -> Jet:
        return self.log_r

    def velocity(self, i: int, j: int) -> Jet:
        # i, j are 1-based component indices
        out = jet_mul(jet_mul(self.r[i - 1], self.r[j - 1]), self.inv_r2)
        if i == j:
            out = out - self.log_r
        return out

    def pressure(self, j: int) -> Jet:
        return jet_mul(self.r[j - 1], self.inv_r2) * 2.0


def kernel_jet(kernel: str, source, target, order: int, i: int = 1, j: int = 1) -> Jet:
    """Jet at ``target`` of a fundamental-solution kernel with pole at ``source``.

    ``kernel`` is ``"log-charge"`` (``log|x - s|``), ``"stokeslet-velocity"``
    (component ``G_ij = -delta_ij log r + r_i r_j / r^2``) or
    ``"stokeslet-pressure"`` (``P_j = 2 r_j / r^2``).
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    kj = KernelJets(target, source, order)
    if kernel == "log-charge":
        return kj.log_charge()
    if kernel == "stokeslet-velocity":
        return kj.velocity(i, j)
    if kernel == "stokeslet-pressure":
        return kj.pressure(j)
    raise ValueError(f"unknown kernel {kernel!r}; expected one of {KERNELS}")
