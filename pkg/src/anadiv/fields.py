"""Polynomial tangential vector fields built from a defining function.

For a defining function ``rho`` the family is

    X0 = grad(rho) . grad        (transversal)
    T1 = rho d_x,  T2 = rho d_y  (vanish on the boundary)
    T3 = -rho_y d_x + rho_x d_y  (rotated gradient, tangent to level sets)

and with ``D = |grad rho|^2 + rho^2`` every partial derivative decomposes as
``D d_k = rho_k X0 + rho T_k + (J grad rho)_k T3``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .domain import AnalyticDomain, QuadratureSet
from .errors import DegenerateBoundary, OrderExhausted
from .jet import Jet, jet_laplacian, jet_mul
from .polynomial import Poly

LETTERS = (1, 2, 3)


@dataclass(frozen=True)
class VectorField:
    coeff_x: Poly
    coeff_y: Poly

    def apply_poly(self, u: Poly) -> Poly:
        return self.coeff_x * u.diff("x") + self.coeff_y * u.diff("y")

    def coefficients_at(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        return np.stack([self.coeff_x.eval_points(p), self.coeff_y.eval_points(p)], axis=-1)


@dataclass(frozen=True, eq=False)
class TangentFieldFamily:
    domain: AnalyticDomain
    X0: VectorField
    tangential: tuple[VectorField, VectorField, VectorField]
    n_interior: int = 2  # T1, T2 alone span on the interior
    n_fields: int = 3

    @cached_property
    def D(self) -> Poly:
        rx, ry = self.domain.rho.gradient()
        return rx * rx + ry * ry + self.domain.rho * self.domain.rho

    def field(self, letter: int) -> VectorField:
        return self.tangential[letter - 1]

    def xi(self, points) -> np.ndarray:
        """``xi_k`` at points, shape ``(..., 2)``."""
        rx, ry = self.domain.rho.gradient()
        d = self.D.eval_points(points)
        return np.stack([rx.eval_points(points) / d, ry.eval_points(points) / d], axis=-1)

    def eta(self, points) -> np.ndarray:
        """``eta[..., j-1, k-1]`` for j in 1..3 and k in 1..2."""
        rho = self.domain.rho
        rx, ry = rho.gradient()
        p = np.asarray(points, dtype=float)
        d = self.D.eval_points(p)
        r = rho.eval_points(p) / d
        out = np.zeros(p.shape[:-1] + (3, 2))
        out[..., 0, 0] = r
        out[..., 1, 1] = r
        out[..., 2, 0] = -ry.eval_points(p) / d
        out[..., 2, 1] = rx.eval_points(p) / d
        return out

    def zeta(self, points) -> np.ndarray:
        """``zeta_k = 1/rho`` so that ``d_k = zeta_k T_k`` where ``rho > 0``."""
        return 1.0 / self.domain.rho.eval_points(points)

    def interior_points(self, quad: QuadratureSet) -> np.ndarray:
        """Volume nodes at approximate distance >= collar width from the boundary."""
        rx, ry = self.domain.rho.gradient()
        b = self.domain.boundary_trace(256).points
        gmin = np.hypot(rx.eval_points(b), ry.eval_points(b)).min()
        mask = self.domain.rho.eval_points(quad.points) >= self.domain.collar_width * gmin
        return quad.points[mask]

    def representation_residual(self, points) -> np.ndarray:
        """Max over k of |xi_k X0 + sum_j eta_jk T_j - d_k| as vector-field coefficients."""
        p = np.asarray(points, dtype=float)
        X0 = self.X0.coefficients_at(p)
        T = np.stack([t.coefficients_at(p) for t in self.tangential], axis=-2)  # (...,3,2)
        xi = self.xi(p)
        eta = self.eta(p)
        res = 0.0
        for k in range(2):
            vec = xi[..., k, None] * X0 + np.einsum("...j,...jc->...c", eta[..., :, k], T)
            vec[..., k] -= 1.0
            res = max(res, float(np.abs(vec).max()))
        return res

    def tangency_residual(self, quad: QuadratureSet) -> np.ndarray:
        """``|T_j rho|`` at the nodes, shape ``(n, 3)``."""
        rho = self.domain.rho
        return np.stack([np.abs(t.apply_poly(rho).eval_points(quad.points)) for t in self.tangential], axis=-1)

    def at(self, points, order: int) -> "FieldJets":
        return FieldJets(self, points, order)


def build_family(domain: AnalyticDomain) -> TangentFieldFamily:
    rho = domain.rho
    rx, ry = rho.gradient()
    fam = TangentFieldFamily(
        domain=domain,
        X0=VectorField(rx, ry),
        tangential=(
            VectorField(rho, Poly.zero()),
            VectorField(Poly.zero(), rho),
            VectorField(-ry, rx),
        ),
    )
    vol = domain.volume_quadrature(12, 64)
    bnd = domain.boundary_trace(128)
    dmin = min(fam.D.eval_points(vol.points).min(), fam.D.eval_points(bnd.points).min())
    if not dmin > 1e-12:
        raise DegenerateBoundary(f"|grad rho|^2 + rho^2 reaches {dmin:.3g}")
    return fam


class FieldJets:
    """Coefficient jets of the tangential fields at a fixed batch of points,
    reused across every word application."""

    def __init__(self, family: TangentFieldFamily, points, order: int):
        self.family = family
        self.points = np.asarray(points, dtype=float)
        self.order = int(order)
        self._cache: dict[tuple[int, int], tuple[Jet | None, Jet | None]] = {}
        self._full = []
        for t in family.tangential:
            cx = None if t.coeff_x.is_zero() else Jet.from_poly(t.coeff_x, self.points, self.order)
            cy = None if t.coeff_y.is_zero() else Jet.from_poly(t.coeff_y, self.points, self.order)
            self._full.append((cx, cy))

    def _coeffs(self, letter: int, order: int):
        key = (letter, order)
        if key not in self._cache:
            if order > self.order:
                raise OrderExhausted(f"field jets prepared to order {self.order}, need {order}")
            cx, cy = self._full[letter - 1]
            self._cache[key] = (
                None if cx is None else cx.truncate(order),
                None if cy is None else cy.truncate(order),
            )
        return self._cache[key]

    def apply(self, letter: int, u: Jet) -> Jet:
        """Jet of ``T_letter u``; the order drops by one."""
        if u.order < 1:
            raise OrderExhausted("word application needs jet order >= 1")
        cx, cy = self._coeffs(letter, u.order - 1)
        out = None
        if cx is not None:
            out = jet_mul(Jet(u.base, cx.coeffs), u.diff("x"))
        if cy is not None:
            term = jet_mul(Jet(u.base, cy.coeffs), u.diff("y"))
            out = term if out is None else out + term
        return out

    def apply_word(self, word, u: Jet) -> Jet:
        for letter in reversed(tuple(word)):
            u = self.apply(letter, u)
        return u


def apply_word(family: TangentFieldFamily, word, u_jet: Jet) -> Jet:
    """Jet of ``T_{b1} ... T_{bj} u``; ``T_{bj}`` acts first."""
    word = tuple(word)
    if len(word) > u_jet.order:
        raise OrderExhausted(f"word of length {len(word)} on a jet of order {u_jet.order}")
    return family.at(u_jet.base, u_jet.order).apply_word(word, u_jet)


def commutator_with_laplacian(family: TangentFieldFamily, word, u_jet: Jet) -> Jet:
    """Jet of ``T^b (Lap u) - Lap (T^b u)``."""
    word = tuple(word)
    if u_jet.order < len(word) + 2:
        raise OrderExhausted("commutator with the Laplacian needs order >= |word| + 2")
    fj = family.at(u_jet.base, u_jet.order)
    return fj.apply_word(word, jet_laplacian(u_jet)) - jet_laplacian(fj.apply_word(word, u_jet))


def commutator_with_gradient(family: TangentFieldFamily, word, q_jet: Jet) -> tuple[Jet, Jet]:
    """Jets of ``T^b (grad q) - grad (T^b q)``, one per component."""
    word = tuple(word)
    if q_jet.order < len(word) + 1:
        raise OrderExhausted("commutator with the gradient needs order >= |word| + 1")
    fj = family.at(q_jet.base, q_jet.order)
    tq = fj.apply_word(word, q_jet)
    return tuple(fj.apply_word(word, q_jet.diff(d)) - tq.diff(d) for d in ("x", "y"))


def all_words(length: int, letters=LETTERS):
    """All words of the given length in lexicographic order."""
    from itertools import product

    return [tuple(w) for w in product(letters, repeat=length)]
