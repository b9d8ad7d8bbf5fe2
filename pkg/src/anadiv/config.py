"""TOML run configuration."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
try:
    import tomllib as tomli
except ModuleNotFoundError:  # Python < 3.11
    import tomli

from .errors import ConfigError
from .norms import EPS2_GRID, EPS_RATIO, NormWeights
from .pipeline import AuditSettings, SolverSettings
from .polynomial import Poly

MAX_WORD_LENGTH = 8


@dataclass
class RunConfig:
    domain: dict
    f_terms: list
    solver: SolverSettings
    audit: AuditSettings
    weights: NormWeights
    I_max: int = 6
    J_max: int = 6
    ratio: float | None = EPS_RATIO
    grid: tuple = EPS2_GRID
    out: str = "out"
    seed: int = 0
    raw: dict = field(default_factory=dict)

    def polynomial(self) -> Poly:
        return Poly.from_terms(self.f_terms)

    def max_word_length(self) -> int:
        return max(self.J_max, self.audit.M, self.audit.j_sweep)


def _get(d: dict, path: str, kind, default=None, check=None):
    section, _, key = path.rpartition(".")
    node = d
    for part in filter(None, section.split(".")):
        node = node.get(part, {})
        if not isinstance(node, dict):
            raise ConfigError(f"field '{part}': expected a table")
    if key not in node:
        return default
    val = node[key]
    try:
        if kind is int and (isinstance(val, bool) or not float(val).is_integer()):
            raise TypeError
        val = kind(val)
    except (TypeError, ValueError):
        raise ConfigError(f"field '{path}': expected {kind.__name__}, got {node[key]!r}") from None
    if check is not None and not check(val):
        raise ConfigError(f"field '{path}': value {val!r} out of range")
    return val


def _positive(x):
    return x > 0


def _unit(x):
    return 0 < x < 1


def random_zero_mean_terms(degree: int, seed: int):
    """Random polynomial coefficients; the mean is removed later against the domain."""
    rng = np.random.default_rng(seed)
    return [(a, d - a, float(rng.standard_normal())) for d in range(1, degree + 1) for a in range(d + 1)]


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    known = {"domain", "f", "solver", "quadrature", "norms", "audit", "tolerances", "output", "seed"}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"{source}: unknown section(s) {', '.join(unknown)}")

    dom = raw.get("domain")
    if not isinstance(dom, dict) or not ({"spec", "kind", "coefficients"} & set(dom)):
        raise ConfigError("field 'domain': need 'spec', 'kind' or 'coefficients'")
    dom = dict(dom)
    if "spec" in dom and not isinstance(dom["spec"], str):
        raise ConfigError("field 'domain.spec': expected a string")

    seed = _get(raw, "seed", int, 0, lambda s: s >= 0)
    fsec = raw.get("f", {})
    if not isinstance(fsec, dict):
        raise ConfigError("field 'f': expected a table")
    if "terms" in fsec:
        terms = fsec["terms"]
        if not isinstance(terms, list) or not all(isinstance(t, list) and len(t) == 3 for t in terms):
            raise ConfigError("field 'f.terms': expected a list of [a, b, coefficient] triples")
        try:
            terms = [(int(a), int(b), float(c)) for a, b, c in terms]
        except (TypeError, ValueError):
            raise ConfigError("field 'f.terms': exponents must be integers and coefficients numbers") from None
        if any(a < 0 or b < 0 for a, b, _ in terms):
            raise ConfigError("field 'f.terms': exponents must be nonnegative")
    elif "random_degree" in fsec:
        terms = random_zero_mean_terms(_get(raw, "f.random_degree", int, 1, _positive), seed)
    else:
        raise ConfigError("field 'f': need 'terms' or 'random_degree'")

    solver = SolverSettings(
        scale=_get(raw, "domain.enlargement_scale", float, None, lambda s: s >= 1),
        n_charges=_get(raw, "solver.n_charges", int, 96, _positive),
        n_sources=_get(raw, "solver.n_sources", int, 96, _positive),
        radius_factor=_get(raw, "solver.radius_factor", float, 1.5, lambda s: s > 1),
        rcond=_get(raw, "solver.rcond", float, 1e-13, _unit),
        n_radial=_get(raw, "quadrature.n_radial", int, 16, lambda n: n >= 8),
        n_angular=_get(raw, "quadrature.n_angular", int, 96, lambda n: n >= 8),
        mean_tol=_get(raw, "tolerances.mean", float, 1e-9, _unit),
        flux_tol=_get(raw, "tolerances.flux", float, 1e-8, _unit),
        div_tol=_get(raw, "tolerances.div", float, 1e-6, _unit),
        boundary_tol=_get(raw, "tolerances.boundary", float, 1e-6, _unit),
    )
    M = _get(raw, "norms.M", int, 6, lambda m: m >= 0)
    li = _get(raw, "audit.leibniz_i", int, 2, lambda n: n >= 1)
    lj = _get(raw, "audit.leibniz_j", int, 3, lambda n: n >= 1)
    audit = AuditSettings(
        M=M,
        i_sweep=_get(raw, "audit.i_sweep", int, 3, lambda n: n >= 2),
        j_sweep=_get(raw, "audit.j_sweep", int, 3, lambda n: n >= 2),
        leibniz_max=(li, lj),
        n_radial=_get(raw, "quadrature.table_n_radial", int, 12, lambda n: n >= 8),
        n_angular=_get(raw, "quadrature.table_n_angular", int, 64, lambda n: n >= 8),
    )
    ratio_raw = raw.get("norms", {}).get("ratio", EPS_RATIO)
    ratio = None if ratio_raw in ("free", 0) else _get(raw, "norms.ratio", float, EPS_RATIO, _positive)
    eps2 = _get(raw, "norms.eps2", float, 2.0**-6, lambda e: 0 < e <= 1)
    eps1 = _get(raw, "norms.eps1", float, eps2 / (ratio or 1.0), lambda e: 0 < e <= 1)
    grid = raw.get("norms", {}).get("grid", list(EPS2_GRID))
    if not isinstance(grid, list) or not all(isinstance(g, (int, float)) and 0 < g <= 1 for g in grid):
        raise ConfigError("field 'norms.grid': expected a list of numbers in (0, 1]")
    I_max = _get(raw, "norms.I_max", int, M, lambda n: n >= 0)
    J_max = _get(raw, "norms.J_max", int, M, lambda n: n >= 0)
    return RunConfig(
        domain=dom,
        f_terms=terms,
        solver=solver,
        audit=audit,
        weights=NormWeights(eps1, eps2, M),
        I_max=I_max,
        J_max=J_max,
        ratio=ratio,
        grid=tuple(float(g) for g in grid),
        out=str(raw.get("output", {}).get("dir", "out")),
        seed=seed,
        raw=raw,
    )


def load_config(path) -> tuple[RunConfig, bytes]:
    p = Path(path)
    try:
        data = p.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from None
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        raise ConfigError(f"{p}: not valid UTF-8") from None
    return parse_config(text, str(p)), data
