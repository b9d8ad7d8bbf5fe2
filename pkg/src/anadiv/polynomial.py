"""Dense bivariate polynomials.

A :class:`Poly` stores ``c[a, b]``, the coefficient of ``x**a * y**b``.
"""
from __future__ import annotations

from fractions import Fraction
from math import comb

import numpy as np


class Poly:
    __slots__ = ("c",)

    def __init__(self, coeffs):
        c = np.atleast_2d(np.asarray(coeffs, dtype=float))
        self.c = _trim(c)

    # construction -------------------------------------------------------
    @classmethod
    def zero(cls) -> "Poly":
        return cls([[0.0]])

    @classmethod
    def const(cls, value: float) -> "Poly":
        return cls([[value]])

    @classmethod
    def x(cls) -> "Poly":
        return cls([[0.0], [1.0]])

    @classmethod
    def y(cls) -> "Poly":
        return cls([[0.0, 1.0]])

    @classmethod
    def from_terms(cls, terms) -> "Poly":
        """Build from an iterable of ``(a, b, coefficient)`` triples."""
        terms = [(int(a), int(b), float(v)) for a, b, v in terms]
        if not terms:
            return cls.zero()
        na = max(t[0] for t in terms) + 1
        nb = max(t[1] for t in terms) + 1
        c = np.zeros((na, nb))
        for a, b, v in terms:
            if a < 0 or b < 0:
                raise ValueError(f"negative exponent in term {(a, b, v)}")
            c[a, b] += v
        return cls(c)

    def terms(self):
        """Nonzero ``(a, b, coefficient)`` triples in lexicographic order."""
        return [(int(a), int(b), float(self.c[a, b])) for a, b in zip(*np.nonzero(self.c))]

    # properties ---------------------------------------------------------
    @property
    def degree(self) -> int:
        nz = np.nonzero(self.c)
        if len(nz[0]) == 0:
            return 0
        return int(max(nz[0] + nz[1]))

    def is_zero(self) -> bool:
        return not np.any(self.c)

    def __repr__(self):
        parts = [f"{v:+g}*x^{a}*y^{b}" for a, b, v in self.terms()]
        return "Poly(" + (" ".join(parts) or "0") + ")"

    # arithmetic ---------------------------------------------------------
    def _binary(self, other, sign):
        if not isinstance(other, Poly):
            other = Poly.const(float(other))
        na = max(self.c.shape[0], other.c.shape[0])
        nb = max(self.c.shape[1], other.c.shape[1])
        out = np.zeros((na, nb))
        out[: self.c.shape[0], : self.c.shape[1]] += self.c
        out[: other.c.shape[0], : other.c.shape[1]] += sign * other.c
        return Poly(out)

    def __add__(self, other):
        return self._binary(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, -1.0)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Poly(-self.c)

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return Poly(self.c * float(other))
        a, b = self.c, other.c
        out = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1] + b.shape[1] - 1))
        for i, j in zip(*np.nonzero(a)):
            out[i : i + b.shape[0], j : j + b.shape[1]] += a[i, j] * b
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = Poly.const(1.0)
        for _ in range(int(n)):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return (self - other).is_zero()

    def allclose(self, other: "Poly", atol: float = 1e-12) -> bool:
        d = self - other
        return bool(np.all(np.abs(d.c) <= atol))

    # calculus -----------------------------------------------------------
    def diff(self, direction: str) -> "Poly":
        if direction == "x":
            if self.c.shape[0] == 1:
                return Poly.zero()
            k = np.arange(1, self.c.shape[0])[:, None]
            return Poly(self.c[1:] * k)
        if direction == "y":
            if self.c.shape[1] == 1:
                return Poly.zero()
            k = np.arange(1, self.c.shape[1])[None, :]
            return Poly(self.c[:, 1:] * k)
        raise ValueError(f"direction must be 'x' or 'y', got {direction!r}")

    def laplacian(self) -> "Poly":
        return self.diff("x").diff("x") + self.diff("y").diff("y")

    def gradient(self) -> tuple["Poly", "Poly"]:
        return self.diff("x"), self.diff("y")

    # evaluation ---------------------------------------------------------
    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        # Horner in x with polynomial-in-y coefficients
        out = np.zeros(np.broadcast(x, y).shape)
        for a in range(self.c.shape[0] - 1, -1, -1):
            row = np.zeros_like(out)
            for b in range(self.c.shape[1] - 1, -1, -1):
                row = row * y + self.c[a, b]
            out = out * x + row
        return out

    def eval_points(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        return self(p[..., 0], p[..., 1])

    def affine(self, scale: float, center) -> "Poly":
        """Return ``q(x) = p(center + (x - center) / scale)``."""
        cx, cy = map(float, center)
        s = 1.0 / float(scale)
        # x' = s*x + (1 - s)*cx
        lx = Poly([[(1.0 - s) * cx], [s]])
        ly = Poly([[(1.0 - s) * cy, s]])
        out = Poly.zero()
        px = [Poly.const(1.0)]
        for _ in range(1, self.c.shape[0]):
            px.append(px[-1] * lx)
        py = [Poly.const(1.0)]
        for _ in range(1, self.c.shape[1]):
            py.append(py[-1] * ly)
        for a, b, v in self.terms():
            out = out + v * px[a] * py[b]
        return out

    def taylor(self, points, order: int) -> np.ndarray:
        """Scaled Taylor coefficients at each point.

        Returns an array of shape ``points.shape[:-1] + (order+1, order+1)``
        with ``out[..., a, b] = d^a_x d^b_y p / (a! b!)`` for ``a+b <= order``
        and zeros elsewhere.
        """
        p = np.asarray(points, dtype=float)
        m = int(order)
        na, nb = self.c.shape
        X = _shift_matrix(p[..., 0], na, m)
        Y = _shift_matrix(p[..., 1], nb, m)
        out = np.einsum("...ka,kl,...lb->...ab", X, self.c, Y)
        return out * _triangle_mask(m)


def _shift_matrix(x0, n, m):
    # X[..., k, a] = C(k, a) x0^(k-a) for a <= min(k, m)
    X = np.zeros(np.shape(x0) + (n, m + 1))
    for k in range(n):
        for a in range(min(k, m) + 1):
            X[..., k, a] = comb(k, a) * np.asarray(x0) ** (k - a)
    return X


def _triangle_mask(m: int) -> np.ndarray:
    a = np.arange(m + 1)
    return (a[:, None] + a[None, :] <= m).astype(float)


def _trim(c: np.ndarray) -> np.ndarray:
    nz = np.nonzero(c)
    if len(nz[0]) == 0:
        return np.zeros((1, 1))
    return np.array(c[: nz[0].max() + 1, : nz[1].max() + 1], dtype=float)


def monomial_integral_disk(a: int, b: int, radius: float = 1.0) -> float:
    """Exact integral of ``x**a * y**b`` over the disk of given radius."""
    if a % 2 or b % 2:
        return 0.0
    from math import gamma

    # int_0^{2pi} cos^a sin^b = 2 B((a+1)/2, (b+1)/2)
    ang = 2.0 * gamma((a + 1) / 2) * gamma((b + 1) / 2) / gamma((a + b + 2) / 2)
    return ang * radius ** (a + b + 2) / (a + b + 2)


# exact particular solutions ------------------------------------------------

def _antilaplace_monomial(a: int, b: int) -> dict[tuple[int, int], Fraction]:
    """Polynomial P with Laplacian(P) = x^a y^b, via repeated double
    antiderivatives in the dominant variable (average on ties)."""
    if a > b:
        return _antilaplace_x(a, b)
    if b > a:
        return {(i, j): v for (j, i), v in _antilaplace_x(b, a).items()}
    px = _antilaplace_x(a, b)
    py = {(i, j): v for (j, i), v in _antilaplace_x(b, a).items()}
    out: dict[tuple[int, int], Fraction] = {}
    for d in (px, py):
        for k, v in d.items():
            out[k] = out.get(k, Fraction(0)) + v / 2
    return out


def _antilaplace_x(a: int, b: int) -> dict[tuple[int, int], Fraction]:
    # u = sum_m (-1)^m A^{m+1} d_yy^m g,  A = double x-antiderivative
    out: dict[tuple[int, int], Fraction] = {}
    coef = Fraction(1)
    ea, eb = a, b
    sign = 1
    while eb >= 0:
        # A^{m+1}: integrate x^ea twice
        c = coef
        na = ea
        for _ in range(2):
            na += 1
            c /= na
        out[(na, eb)] = out.get((na, eb), Fraction(0)) + sign * c
        # next: d_yy, one more A
        if eb < 2:
            break
        coef = c * eb * (eb - 1)
        ea, eb = na, eb - 2
        sign = -sign
    return out


def antilaplacian(f: Poly) -> Poly:
    """Polynomial ``P`` with ``Laplacian(P) == f``, computed in exact rational
    arithmetic from the float coefficients of ``f``."""
    acc: dict[tuple[int, int], Fraction] = {}
    for a, b, v in f.terms():
        fv = Fraction(v)
        for k, w in _antilaplace_monomial(a, b).items():
            acc[k] = acc.get(k, Fraction(0)) + fv * w
    return Poly.from_terms((a, b, float(v)) for (a, b), v in acc.items() if v != 0)
