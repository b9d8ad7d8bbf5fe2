"""End-to-end construction of ``u`` with ``div u = f`` in Omega, ``u = 0``
on the boundary:

1. ``-Lap phi = f`` on the enlarged domain, ``phi = 0`` on its boundary;
2. Stokes flow ``(v, q)`` with ``v = grad phi`` on the boundary;
3. ``u = v - grad phi`` and ``p = q + f``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domain import AnalyticDomain, QuadratureSet
from .errors import NonzeroMean, ToleranceViolation
from .fields import LETTERS, TangentFieldFamily, build_family
from .jet import Jet, jet_laplacian
from .lemmas import (
    AuditTables,
    BootstrapReport,
    FittedConstants,
    InequalityReport,
    bootstrap_scan,
    check_bootstrap,
    fit_constants,
    sweep,
)
from .norms import (
    CertifyResult,
    DerivativeTable,
    NormWeights,
    build_commutator_table,
    build_table,
    certify_radius,
    psi_norm,
    rho_norm,
)
from .poisson import PoissonSolution, solve_poisson
from .polynomial import Poly
from .stokes import StokesSolution, boundary_flux, solve_stokes_bvp


@dataclass(frozen=True)
class SolverSettings:
    scale: float | None = None  # Omega' dilation; None uses the domain's own
    n_charges: int = 96
    n_sources: int = 96
    radius_factor: float = 1.5
    rcond: float = 1e-13
    n_radial: int = 16
    n_angular: int = 96
    mean_tol: float = 1e-9
    flux_tol: float = 1e-8
    div_tol: float = 1e-6
    boundary_tol: float = 1e-6


def check_compatibility(domain: AnalyticDomain, phi: PoissonSolution, n: int = 256) -> float:
    """Boundary flux of ``grad phi``; equals ``-int f`` by the divergence theorem."""
    b = domain.boundary_trace(n)
    return boundary_flux(b, phi.gradient(b.points))


@dataclass
class DivergenceSolution:
    domain: AnalyticDomain
    f: Poly
    phi: PoissonSolution
    stokes: StokesSolution
    settings: SolverSettings
    residuals: dict = field(default_factory=dict)

    # evaluators ---------------------------------------------------------------
    def velocity(self, points) -> np.ndarray:
        """``u = v - grad phi``."""
        return self.stokes.velocity(points) - self.phi.gradient(points)

    def pressure(self, points) -> np.ndarray:
        """``p = q + f``."""
        return self.stokes.pressure(points) + self.f.eval_points(np.asarray(points, dtype=float))

    def jets(self, points, order: int) -> dict[str, list[Jet]]:
        """Jets of every pipeline field at ``points`` to the given order."""
        points = np.asarray(points, dtype=float)
        v1, v2, q = self.stokes.jets(points, order)
        gx, gy = self.phi.gradient_jets(points, order)
        fj = Jet.from_poly(self.f, points, order)
        return {
            "v": [v1, v2],
            "q": [q],
            "grad_phi": [gx, gy],
            "u": [v1 - gx, v2 - gy],
            "p": [q + fj],
            "f": [fj],
        }

    def check_tolerances(self) -> None:
        r = self.residuals
        if r["div_residual"] > self.settings.div_tol * max(r["f_norm"], 1e-300) and r["f_norm"] > 0:
            raise ToleranceViolation(f"||div u - f|| = {r['div_residual']:.3g} exceeds tolerance")
        if r["boundary_max"] > self.settings.boundary_tol * max(r["data_scale"], 1.0):
            raise ToleranceViolation(f"max |u| on the boundary = {r['boundary_max']:.3g} exceeds tolerance")


def solve_divergence(domain: AnalyticDomain, f: Poly, settings: SolverSettings | None = None) -> DivergenceSolution:
    s = settings or SolverSettings()
    quad = domain.volume_quadrature(s.n_radial, s.n_angular)
    fv = f.eval_points(quad.points)
    mean = quad.integrate(fv)
    phi = solve_poisson(domain, f, s.scale, s.n_charges, s.radius_factor, s.rcond)
    flux = check_compatibility(domain, phi)
    if abs(mean) > s.mean_tol * max(1.0, quad.integrate(np.abs(fv))):
        raise NonzeroMean(f"int f = {mean:.6g} (boundary flux of grad phi = {flux:.6g})", mean=mean, flux=flux)
    stokes = solve_stokes_bvp(
        domain, phi.gradient, s.n_sources, radius_factor=s.radius_factor, rcond=s.rcond,
        flux_tol=s.flux_tol, gauge_quadrature=quad,
    )
    sol = DivergenceSolution(domain, f, phi, stokes, s)
    sol.residuals = divergence_residuals(sol, quad)
    sol.residuals.update(mean_f=mean, flux=flux)
    return sol


def divergence_residuals(sol: DivergenceSolution, quad: QuadratureSet) -> dict:
    j = sol.jets(quad.points, 2)
    u1, u2 = j["u"]
    div = u1.diff("x").value + u2.diff("y").value
    fv = sol.f.eval_points(quad.points)
    b = sol.domain.boundary_trace(4 * 2 * sol.settings.n_sources)
    ub = sol.velocity(b.points)
    data = sol.phi.gradient(b.points)
    p = j["p"][0]
    mom = [-jet_laplacian(u1).value + p.derivative(1, 0), -jet_laplacian(u2).value + p.derivative(0, 1)]
    return {
        "div_residual": float(np.sqrt(quad.integrate((div - fv) ** 2))),
        "f_norm": float(np.sqrt(quad.integrate(fv**2))),
        "boundary_max": float(np.abs(ub).max()),
        "data_scale": float(np.abs(data).max()),
        "momentum_max": float(max(np.abs(m).max() for m in mom)),
        "poisson_boundary_residual": sol.phi.boundary_residual,
        "stokes_boundary_residual": sol.stokes.residual_max,
    }


def nonuniqueness_witness(domain: AnalyticDomain) -> tuple[Poly, Poly]:
    """Divergence-free polynomial field vanishing on the boundary:
    the rotated gradient of ``rho^2``."""
    r2 = domain.rho * domain.rho
    return -r2.diff("y"), r2.diff("x")


# reports ------------------------------------------------------------------------------

@dataclass(frozen=True)
class AuditSettings:
    M: int = 6
    i_sweep: int = 3
    j_sweep: int = 3
    leibniz_max: tuple[int, int] = (2, 3)
    n_radial: int = 12
    n_angular: int = 64
    letters: tuple[int, ...] = LETTERS
    threads: int = 1
    i_max: int | None = None  # table caps; default to M
    j_max: int | None = None


def audit_tables(sol: DivergenceSolution, family: TangentFieldFamily, a: AuditSettings, commutators: bool = True):
    """All derivative tables for one pipeline solution."""
    quad = sol.domain.volume_quadrature(a.n_radial, a.n_angular)
    comm_total = max(a.i_sweep - 2, a.leibniz_max[0]) + a.j_sweep
    i_max = a.M if a.i_max is None else a.i_max
    j_max = a.M if a.j_max is None else a.j_max
    order = max(min(a.M, i_max + j_max), comm_total + 2)
    jets = sol.jets(quad.points, order)
    kw = dict(letters=a.letters, threads=a.threads)

    def tab(name, comps):
        return build_table(name, comps, quad, family, i_max, j_max, a.M, **kw)

    tables = {name: tab(name, jets[name]) for name in ("u", "v", "q", "grad_phi", "f")}
    if not commutators:
        return tables, quad
    ci = comm_total - a.j_sweep
    tables["comm_lap_v"] = build_commutator_table(
        "laplacian", "comm_lap_v", jets["v"], quad, family, ci, a.j_sweep, comm_total, **kw)
    tables["comm_grad_q"] = build_commutator_table(
        "gradient", "comm_grad_q", jets["q"], quad, family, ci, a.j_sweep, comm_total, **kw)
    return tables, quad


def as_audit(tables: dict) -> AuditTables:
    return AuditTables(tables["v"], tables["q"], tables["f"], tables["comm_lap_v"], tables["comm_grad_q"])


@dataclass
class ReportBundle:
    solution: DivergenceSolution
    tables: dict
    weights: NormWeights
    rho_u: float
    rho_f: float
    rho_grad_phi: float
    psi: float
    certification: CertifyResult
    lemma_reports: list[InequalityReport]
    constants: FittedConstants
    bootstrap: BootstrapReport
    bootstrap_grid: list[BootstrapReport]
    bootstrap_max_eps2: float | None

    @property
    def ratio(self) -> float | None:
        return self.rho_u / self.rho_f if self.rho_f > 0 else None

    def summary(self) -> dict:
        r = self.solution.residuals
        return {
            "domain": self.solution.domain.name,
            "f": [list(t) for t in self.solution.f.terms()],
            "eps1": self.weights.eps1,
            "eps2": self.weights.eps2,
            "M": self.weights.M,
            "rho_u": self.rho_u,
            "rho_f": self.rho_f,
            "rho_grad_phi": self.rho_grad_phi,
            "psi": self.psi,
            "rho_u_over_rho_f": self.ratio,
            "combination_holds": self.rho_u <= self.psi + self.rho_grad_phi,
            "certified_eps": list(self.certification.best) if self.certification.best else None,
            "C_star": self.constants.C_star,
            "K_star": self.constants.K_star,
            "C_by_lemma": dict(sorted(self.constants.C.items())),
            "K_by_lemma": dict(sorted(self.constants.K.items())),
            "degenerate_audits": [list(d) for d in self.constants.degenerate],
            "bootstrap_absorbed": self.bootstrap.absorbed,
            "bootstrap_max_eps2": self.bootstrap_max_eps2,
            "residuals": dict(sorted(r.items())),
        }


def full_report(
    domain: AnalyticDomain,
    f: Poly,
    w: NormWeights,
    settings: SolverSettings | None = None,
    audit: AuditSettings | None = None,
    solution: DivergenceSolution | None = None,
) -> ReportBundle:
    a = audit or AuditSettings(M=w.M)
    sol = solution or solve_divergence(domain, f, settings)
    family = build_family(domain)
    tables, _ = audit_tables(sol, family, a)
    t = as_audit(tables)
    reports = sweep(t, a.i_sweep, a.j_sweep, a.leibniz_max)
    consts = fit_constants(reports)
    grid, best = bootstrap_scan(t, w.M, consts.C_star, consts.K_star)
    return ReportBundle(
        solution=sol,
        tables=tables,
        weights=w,
        rho_u=rho_norm(tables["u"], w).total,
        rho_f=rho_norm(tables["f"], w).total,
        rho_grad_phi=rho_norm(tables["grad_phi"], w).total,
        psi=psi_norm(tables["v"], tables["q"], w).total,
        certification=certify_radius(tables["u"], w.M),
        lemma_reports=reports,
        constants=consts,
        bootstrap=check_bootstrap(t, w),
        bootstrap_grid=grid,
        bootstrap_max_eps2=best,
    )
