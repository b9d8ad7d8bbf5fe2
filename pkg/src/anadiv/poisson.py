"""Dirichlet problem ``-Lap(phi) = f`` on the enlarged domain with zero
boundary values, for polynomial ``f``.

``phi`` is an exact polynomial particular solution plus a harmonic
correction represented by logarithmic charges outside the enlarged domain.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import AnalyticDomain
from .errors import DegreeCap, IllConditioned
from .jet import Jet
from .mfs import log_potential_jets, log_potential_values, source_circle, tsvd_lstsq, RCOND
from .polynomial import Poly, antilaplacian

MAX_DEGREE = 20


def poly_particular(f: Poly) -> Poly:
    """Polynomial ``phi_p`` with ``Lap(phi_p) = -f``."""
    if f.degree > MAX_DEGREE:
        raise DegreeCap(f"degree {f.degree} exceeds the cap {MAX_DEGREE}")
    return -antilaplacian(f)


@dataclass(frozen=True)
class MfsFit:
    charges: np.ndarray
    weights: np.ndarray
    residual_max: float
    residual_l2: float
    rank: int

    def __call__(self, points) -> np.ndarray:
        return log_potential_values(np.asarray(points, dtype=float), self.charges, self.weights)


def mfs_harmonic_fit(
    domain_prime: AnalyticDomain,
    boundary_values,
    n_charges: int = 96,
    n_collocation: int | None = None,
    radius_factor: float = 1.5,
    rcond: float = RCOND,
    tol: float = 1e-6,
) -> MfsFit:
    """Fit ``sum_i w_i log|x - s_i|`` to ``boundary_values`` on the boundary.

    The residual is reported on a boundary set four times denser than the
    collocation set. ``IllConditioned`` is raised when the maximum residual
    exceeds ``tol`` times the data scale.
    """
    n_col = 2 * n_charges if n_collocation is None else n_collocation
    if n_charges < n_col / 2:
        raise ValueError("need n_charges >= n_collocation / 2")
    charges = source_circle(domain_prime, n_charges, radius_factor)
    col = domain_prime.boundary_trace(n_col).points
    d = col[:, None, :] - charges[None, :, :]
    A = 0.5 * np.log(np.sum(d * d, axis=-1))
    b = np.asarray(boundary_values(col), dtype=float)
    sol = tsvd_lstsq(A, b, rcond)
    dense = domain_prime.boundary_trace(4 * n_col)
    target = np.asarray(boundary_values(dense.points), dtype=float)
    res = log_potential_values(dense.points, charges, sol.x) - target
    res_max = float(np.abs(res).max())
    res_l2 = float(np.sqrt(np.sum(dense.weights * res * res)))
    scale = max(1.0, float(np.abs(target).max()))
    if not res_max <= tol * scale:
        raise IllConditioned(f"MFS boundary residual {res_max:.3g} above {tol:g} x scale {scale:.3g}")
    return MfsFit(charges, sol.x, res_max, res_l2, sol.rank)


@dataclass(frozen=True)
class PoissonSolution:
    f: Poly
    particular: Poly
    harmonic: MfsFit
    domain_prime: AnalyticDomain

    @property
    def charges(self) -> np.ndarray:
        return self.harmonic.charges

    @property
    def boundary_residual(self) -> float:
        return self.harmonic.residual_max

    def value(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        return self.particular.eval_points(p) + self.harmonic(p)

    def jets(self, points, order: int) -> Jet:
        p = np.asarray(points, dtype=float)
        h = log_potential_jets(p, self.harmonic.charges, self.harmonic.weights, order)
        return Jet(p, h.coeffs + self.particular.taylor(p, order))

    def gradient(self, points) -> np.ndarray:
        j = self.jets(points, 1)
        return np.stack([j.derivative(1, 0), j.derivative(0, 1)], axis=-1)

    def gradient_jets(self, points, order: int) -> tuple[Jet, Jet]:
        j = self.jets(points, order + 1)
        return j.diff("x"), j.diff("y")


def solve_poisson(
    domain: AnalyticDomain,
    f: Poly,
    scale: float | None = None,
    n_charges: int = 96,
    radius_factor: float = 1.5,
    rcond: float = RCOND,
    tol: float = 1e-6,
) -> PoissonSolution:
    """Solve on ``Omega' = scale * Omega`` (``scale=1`` solves on Omega itself)."""
    s = domain.enlargement_scale if scale is None else scale
    dprime = domain if s == 1 else domain.dilate(s)
    phi_p = poly_particular(f)
    fit = mfs_harmonic_fit(
        dprime, lambda pts: -phi_p.eval_points(pts), n_charges,
        radius_factor=radius_factor, rcond=rcond, tol=tol,
    )
    return PoissonSolution(f, phi_p, fit, dprime)
