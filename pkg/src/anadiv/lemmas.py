"""Finite-order audits of the derivative-reduction, commutator and
absorption inequalities.

Every inequality of the form ``lhs <~ rhs`` is evaluated with the implicit
constant set to one; the report carries ``ratio = lhs / rhs`` and a sweep
fits ``C* = max ratio``. Leibniz-type bounds additionally fit the smallest
geometric constant ``K`` that makes ``lhs <= rhs(K)``.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from math import comb, factorial

import numpy as np
from scipy.optimize import brentq

from .errors import TruncationTooSmall
from .norms import EPS2_GRID, DerivativeTable, NormWeights, psi_norm, rho_norm


@dataclass
class InequalityReport:
    lemma: str
    i: int
    j: int
    lhs: float
    rhs: float
    ratio: float | None
    degenerate: bool
    K_star: float | None = None
    terms: dict = field(default_factory=dict)

    @property
    def passes(self) -> bool:
        """Holds with constant one and is not a degenerate ``0 <= 0``."""
        return (not self.degenerate) and self.lhs <= self.rhs

    def to_json(self) -> dict:
        d = asdict(self)
        for k in ("lhs", "rhs", "ratio", "K_star"):
            if d[k] is not None and not np.isfinite(d[k]):
                d[k] = str(d[k])
        return d


def _report(lemma, i, j, lhs, rhs, **kw) -> InequalityReport:
    lhs, rhs = float(lhs), float(rhs)
    if rhs > 0:
        ratio = lhs / rhs
        degenerate = False
    else:
        ratio = None if lhs == 0 else float("inf")
        degenerate = lhs == 0
    return InequalityReport(lemma, i, j, lhs, rhs, ratio, degenerate, **kw)


@dataclass
class AuditTables:
    """Tables consumed by the audits. ``comm_lap_v`` holds
    ``||d^i [T^b, Lap] v||`` and ``comm_grad_q`` holds ``||d^i [T^b, grad] q||``."""

    v: DerivativeTable
    q: DerivativeTable
    f: DerivativeTable
    comm_lap_v: DerivativeTable
    comm_grad_q: DerivativeTable


# H2 regularity ------------------------------------------------------------------

def check_h2_stokes(v_table: DerivativeTable, q_table: DerivativeTable, g_norm: float) -> InequalityReport:
    """``||v||_H2 + ||grad q|| <~ ||g|| + ||T v||_H1 + ||v||`` with
    ``g = -Lap v + grad q``."""
    hv = v_table.norm(0, 0) + v_table.norm(1, 0) + v_table.norm(2, 0)
    lhs = hv + q_table.norm(1, 0)
    tv = v_table.norm(0, 1) + v_table.norm(1, 1)
    rhs = g_norm + tv + v_table.norm(0, 0)
    return _report("h2_stokes", 2, 0, lhs, rhs, terms={"H2(v)": hv, "grad q": q_table.norm(1, 0), "g": g_norm, "H1(Tv)": tv, "v": v_table.norm(0, 0)})


# derivative reductions --------------------------------------------------------------

def check_normal_reduction(t: AuditTables, i: int, j: int) -> InequalityReport:
    """Normal-derivative reduction: the ``i >= 2`` form, or the ``i = 1``,
    ``j >= 1`` form whose right side carries ``||T^j f||``."""
    if i >= 2:
        lhs_v = t.v.norm(i, j)
        lhs_q = t.q.norm(i - 1, j)
        h1 = t.v.norm(i - 2, j + 1) + t.v.norm(i - 1, j + 1)
        low = t.v.norm(i - 2, j)
        cv = t.comm_lap_v.norm(i - 2, j)
        cq = t.comm_grad_q.norm(i - 2, j)
        terms = {"d^i T^j v": lhs_v, "d^(i-1) T^j q": lhs_q, "H1(d^(i-2) T^(j+1) v)": h1,
                 "d^(i-2) T^j v": low, "[T^j,Lap]v": cv, "[T^j,grad]q": cq}
        return _report("normal", i, j, lhs_v + lhs_q, h1 + low + cv + cq, terms=terms)
    if i == 1 and j >= 1:
        lhs_v = t.v.norm(1, j)
        lhs_q = t.q.norm(0, j)
        cv = t.comm_lap_v.norm(0, j - 1)
        cq = t.comm_grad_q.norm(0, j - 1)
        tf = t.f.norm(0, j)
        terms = {"d T^j v": lhs_v, "T^j q": lhs_q, "[T^(j-1),Lap]v": cv, "[T^(j-1),grad]q": cq, "T^j f": tf}
        return _report("normal_first", i, j, lhs_v + lhs_q, cv + cq + tf, terms=terms)
    raise ValueError(f"normal reduction needs i >= 2, or i = 1 and j >= 1; got ({i}, {j})")


def check_tangential_reduction(t: AuditTables, j: int) -> InequalityReport:
    if j < 2:
        raise ValueError("tangential reduction needs j >= 2")
    lhs_v = t.v.norm(0, j)
    lhs_q = t.q.norm(0, j - 1)
    cv = t.comm_lap_v.norm(0, j - 2)
    cq = t.comm_grad_q.norm(0, j - 2)
    tf = t.f.norm(0, j - 1)
    terms = {"T^j v": lhs_v, "T^(j-1) q": lhs_q, "[T^(j-2),Lap]v": cv, "[T^(j-2),grad]q": cq, "T^(j-1) f": tf}
    return _report("tangential", 0, j, lhs_v + lhs_q, cv + cq + tf, terms=terms)


# Leibniz-type commutator bounds ------------------------------------------------------------

def leibniz_rhs_polynomial(lemma: str, base: DerivativeTable, i: int, j: int) -> dict[int, float]:
    """Right side as ``{power of K: coefficient}``."""
    poly: dict[int, float] = {}

    def add(p, c):
        poly[p] = poly.get(p, 0.0) + c

    if lemma == "lap_comm_tangential":
        if i != 0 or j < 1:
            raise ValueError("lap_comm_tangential is the i = 0, j >= 1 case")
        for jp in range(1, j + 1):
            c = factorial(j) / factorial(j - jp)
            add(jp, c * base.norm(2, j - jp))
            add(jp, c * jp * base.norm(1, j - jp))
    elif lemma == "lap_comm_mixed":
        if i < 1 or j < 1:
            raise ValueError("lap_comm_mixed needs i, j >= 1")
        for jp in range(j):
            for ip in range(i + 1):
                i3 = i - ip
                c = comb(ip + j - jp, ip) * factorial(i) * factorial(j) / (factorial(i3) * factorial(jp))
                add(ip + j - jp, c * base.norm(i3 + 2, jp))
    elif lemma == "grad_comm_tangential":
        if i != 0 or j < 1:
            raise ValueError("grad_comm_tangential is the i = 0, j >= 1 case")
        for jp in range(1, j + 1):
            add(jp, factorial(j) / factorial(j - jp) * base.norm(1, j - jp))
    elif lemma == "grad_comm_mixed":
        if i < 1 or j < 1:
            raise ValueError("grad_comm_mixed needs i, j >= 1")
        for jp in range(j):
            for ip in range(i + 1):
                c = comb(ip + j - jp, ip) * factorial(i) * factorial(j) / (factorial(i - ip) * factorial(jp))
                add(ip + j - jp, c * base.norm(i - ip + 1, jp))
    else:
        raise ValueError(f"unknown Leibniz bound {lemma!r}")
    return poly


def _poly_eval(poly: dict[int, float], K: float) -> float:
    return float(sum(c * K**p for p, c in poly.items()))


def fit_K(lhs: float, poly: dict[int, float]) -> float:
    """Smallest ``K >= 0`` with ``lhs <= poly(K)``; ``inf`` when unattainable."""
    if lhs <= _poly_eval(poly, 0.0):
        return 0.0
    if not any(c > 0 for p, c in poly.items() if p > 0):
        return float("inf")
    hi = 1.0
    while _poly_eval(poly, hi) < lhs:
        hi *= 2.0
    return float(brentq(lambda K: _poly_eval(poly, K) - lhs, 0.0, hi, xtol=1e-15, rtol=1e-15, maxiter=500))


def check_leibniz(lemma: str, comm: DerivativeTable, base: DerivativeTable, i: int, j: int) -> InequalityReport:
    """Commutator norm against the Leibniz-type double sum; ``rhs`` is
    evaluated at ``K = 1`` and ``K_star`` is the minimal admissible K."""
    lhs = comm.norm(i, j)
    poly = leibniz_rhs_polynomial(lemma, base, i, j)
    rep = _report(lemma, i, j, lhs, _poly_eval(poly, 1.0), terms={f"K^{p}": c for p, c in sorted(poly.items())})
    rep.K_star = fit_K(lhs, poly)
    if lhs == 0.0:
        rep.degenerate = True
    return rep


# sweeps ------------------------------------------------------------------------------------------

def sweep(t: AuditTables, i_max: int = 3, j_max: int = 3, leibniz_max=(2, 3)) -> list[InequalityReport]:
    """All audits at orders up to the given caps, sorted by key."""
    out = []
    for i in range(2, i_max + 1):
        for j in range(0, j_max + 1):
            out.append(check_normal_reduction(t, i, j))
    for j in range(1, j_max + 1):
        out.append(check_normal_reduction(t, 1, j))
    for j in range(2, j_max + 1):
        out.append(check_tangential_reduction(t, j))
    li, lj = leibniz_max
    for j in range(1, lj + 1):
        out.append(check_leibniz("lap_comm_tangential", t.comm_lap_v, t.v, 0, j))
        out.append(check_leibniz("grad_comm_tangential", t.comm_grad_q, t.q, 0, j))
        for i in range(1, li + 1):
            out.append(check_leibniz("lap_comm_mixed", t.comm_lap_v, t.v, i, j))
            out.append(check_leibniz("grad_comm_mixed", t.comm_grad_q, t.q, i, j))
    return sorted(out, key=lambda r: (r.lemma, r.i, r.j))


@dataclass(frozen=True)
class FittedConstants:
    C: dict  # lemma -> max ratio over non-degenerate reports
    K: dict  # lemma -> max K* over non-degenerate reports
    degenerate: tuple  # (lemma, i, j) flagged 0 <= 0

    @property
    def C_star(self) -> float:
        return max(self.C.values(), default=0.0)

    @property
    def K_star(self) -> float:
        return max(self.K.values(), default=0.0)


def fit_constants(reports) -> FittedConstants:
    C: dict[str, float] = {}
    K: dict[str, float] = {}
    deg = []
    for r in reports:
        if r.degenerate:
            deg.append((r.lemma, r.i, r.j))
            continue
        if r.K_star is None:
            C[r.lemma] = max(C.get(r.lemma, 0.0), r.ratio)
        else:
            K[r.lemma] = max(K.get(r.lemma, 0.0), r.K_star)
    return FittedConstants(C, K, tuple(deg))


# bootstrap absorption --------------------------------------------------------------------------

@dataclass
class BootstrapReport:
    eps1: float
    eps2: float
    M: int
    S1: float
    S2: float
    S3: float
    psi: float
    rho_f: float
    S1_ok: bool
    S2_ok: bool
    S3_ok: bool
    degenerate: bool

    @property
    def absorbed(self) -> bool:
        return self.S1_ok and self.S2_ok and self.S3_ok and not self.degenerate

    def to_json(self) -> dict:
        d = asdict(self)
        d["absorbed"] = self.absorbed
        return d


def bootstrap_sums(t: AuditTables, w: NormWeights) -> tuple[float, float, float]:
    """The three sums of the absorption argument truncated at ``i + j <= M``.
    The pressure part of the first sum uses ``||d^(i-1) T^j q||`` with weight
    ``eps1^i eps2^j / (i+j)!``, matching its place in the velocity-pressure norm."""
    M, e1, e2 = w.M, w.eps1, w.eps2
    S1 = S2 = S3 = 0.0
    for i in range(2, M + 1):
        for j in range(1, M + 1 - i):
            S1 += w.w(i, j) * (t.v.norm(i, j) + t.q.norm(i - 1, j))
    for j in range(2, M):
        S2 += e1 * e2**j / factorial(j + 1) * (t.v.norm(1, j) + t.q.norm(0, j))
    for j in range(3, M + 1):
        S3 += e2**j / factorial(j) * (t.v.norm(0, j) + t.q.norm(0, j - 1))
    return S1, S2, S3


def check_bootstrap(t: AuditTables, w: NormWeights) -> BootstrapReport:
    if t.v.total_max < w.M:
        raise TruncationTooSmall(f"velocity table complete to {t.v.total_max} < M = {w.M}")
    S1, S2, S3 = bootstrap_sums(t, w)
    psi = psi_norm(t.v, t.q, w).total
    rf = rho_norm(t.f, w).total
    degenerate = psi == 0 and rf == 0
    return BootstrapReport(
        w.eps1, w.eps2, w.M, S1, S2, S3, psi, rf,
        S1 <= psi / 10, S2 <= psi / 25 + rf, S3 <= psi / 25 + rf, degenerate,
    )


def tied_eps1(eps2: float, C: float, K: float) -> float:
    return eps2 / (100.0 * (C + 1.0) * (K + 1.0))


def bootstrap_scan(t: AuditTables, M: int, C: float, K: float, grid=EPS2_GRID):
    """Reports on the ``eps2`` grid with ``eps1`` tied to the fitted constants,
    plus the largest ``eps2`` at which all three absorptions hold."""
    reports = [check_bootstrap(t, NormWeights(tied_eps1(e2, C, K), e2, M)) for e2 in sorted(grid)]
    ok = [r.eps2 for r in reports if r.absorbed]
    return reports, (max(ok) if ok else None)
