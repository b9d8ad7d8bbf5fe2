"""Homogeneous Stokes system with Dirichlet data by Stokeslet collocation.

Kernel normalization (weights absorb the 1/(4 pi) factor)::

    G_ij(x, s) = -delta_ij log r + r_i r_j / r^2
    P_j(x, s)  = 2 r_j / r^2,            r = x - s

so that ``-Lap G_.j + grad P_j = 0`` and ``div G_.j = 0`` away from ``s``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import AnalyticDomain, QuadratureSet
from .errors import IllConditioned, IncompatibleFlux
from .jet import Jet, KernelJets
from .mfs import RCOND, chunks, source_circle, tsvd_lstsq


def stokeslet_values(points, sources):
    """Velocity kernel ``G[p, s, i, j]`` and pressure kernel ``P[p, s, j]``."""
    d = np.asarray(points, dtype=float)[:, None, :] - sources[None, :, :]
    r2 = np.sum(d * d, axis=-1)
    G = d[..., :, None] * d[..., None, :] / r2[..., None, None]
    logr = 0.5 * np.log(r2)
    G[..., 0, 0] -= logr
    G[..., 1, 1] -= logr
    P = 2.0 * d / r2[..., None]
    return G, P


def boundary_flux(quad: QuadratureSet, values) -> float:
    """``oint g . n ds`` for vector data sampled at the boundary nodes."""
    values = np.asarray(values, dtype=float)
    return float(np.sum(quad.weights * np.sum(values * quad.normals, axis=-1)))


@dataclass(frozen=True)
class StokesSolution:
    domain: AnalyticDomain
    sources: np.ndarray
    weights: np.ndarray  # (S, 2)
    pressure_offset: float
    residual_max: float
    residual_l2: float
    rank: int

    def velocity(self, points) -> np.ndarray:
        G, _ = stokeslet_values(points, self.sources)
        return np.einsum("psij,sj->pi", G, self.weights)

    def pressure(self, points) -> np.ndarray:
        _, P = stokeslet_values(points, self.sources)
        return np.einsum("psj,sj->p", P, self.weights) + self.pressure_offset

    def jets(self, points, order: int) -> tuple[Jet, Jet, Jet]:
        """Jets of ``(v_1, v_2, q)`` at each point."""
        points = np.asarray(points, dtype=float)
        n = len(points)
        shape = (n, order + 1, order + 1)
        v1, v2, q = np.zeros(shape), np.zeros(shape), np.zeros(shape)
        w = self.weights
        for sl in chunks(n, len(self.sources)):
            kj = KernelJets(points[sl, None, :], self.sources[None, :, :], order)
            g11 = kj.velocity(1, 1).coeffs
            g12 = kj.velocity(1, 2).coeffs
            g22 = kj.velocity(2, 2).coeffs
            v1[sl] = np.einsum("s,psab->pab", w[:, 0], g11) + np.einsum("s,psab->pab", w[:, 1], g12)
            v2[sl] = np.einsum("s,psab->pab", w[:, 0], g12) + np.einsum("s,psab->pab", w[:, 1], g22)
            q[sl] = np.einsum("s,psab->pab", w[:, 0], kj.pressure(1).coeffs) + np.einsum(
                "s,psab->pab", w[:, 1], kj.pressure(2).coeffs
            )
        q[:, 0, 0] += self.pressure_offset
        return Jet(points, v1), Jet(points, v2), Jet(points, q)


def solve_stokes_bvp(
    domain: AnalyticDomain,
    boundary_data,
    n_sources: int = 96,
    n_collocation: int | None = None,
    radius_factor: float = 1.5,
    rcond: float = RCOND,
    tol: float = 1e-6,
    flux_tol: float = 1e-8,
    gauge_quadrature: QuadratureSet | None = None,
) -> StokesSolution:
    """Fit Stokeslet weights so that ``v = boundary_data`` on the boundary.

    ``boundary_data`` maps an ``(n, 2)`` point array to ``(n, 2)`` values.
    """
    n_col = 2 * n_sources if n_collocation is None else n_collocation
    check = domain.boundary_trace(4 * n_col)
    g_dense = np.asarray(boundary_data(check.points), dtype=float)
    scale = float(np.abs(g_dense).max())
    perimeter = float(check.weights.sum())
    flux = boundary_flux(check, g_dense)
    if abs(flux) > flux_tol * max(scale * perimeter, np.finfo(float).tiny):
        raise IncompatibleFlux(f"boundary data carries net flux {flux:.6g}", flux=flux)

    sources = source_circle(domain, n_sources, radius_factor)
    col = domain.boundary_trace(n_col).points
    G, _ = stokeslet_values(col, sources)
    A = G.transpose(0, 2, 1, 3).reshape(2 * n_col, 2 * n_sources)
    b = np.asarray(boundary_data(col), dtype=float).reshape(-1)
    sol = tsvd_lstsq(A, b, rcond)
    weights = sol.x.reshape(n_sources, 2)

    quad = gauge_quadrature or domain.volume_quadrature(16, 96)
    _, P = stokeslet_values(quad.points, sources)
    qraw = np.einsum("psj,sj->p", P, weights)
    offset = -quad.integrate(qraw) / float(quad.weights.sum())

    Gd, _ = stokeslet_values(check.points, sources)
    res = np.linalg.norm(np.einsum("psij,sj->pi", Gd, weights) - g_dense, axis=-1)
    res_max = float(res.max())
    res_l2 = float(np.sqrt(np.sum(check.weights * res * res)))
    if not res_max <= tol * max(scale, 1.0):
        raise IllConditioned(f"Stokes boundary residual {res_max:.3g} above {tol:g} x scale {scale:.3g}")
    return StokesSolution(domain, sources, weights, float(offset), res_max, res_l2, sol.rank)
