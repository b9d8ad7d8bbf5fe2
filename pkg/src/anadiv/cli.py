"""Batch command line: ``anadiv {solve,table,certify,lemmas,bootstrap,report}``.

Exit status: 0 success, 2 configuration error, 3 numerical failure,
4 tolerance violation.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import platform
import shutil
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import MAX_WORD_LENGTH, RunConfig, load_config
from .domain import make_domain
from .errors import (
    ConfigError,
    DomainError,
    InsufficientOrders,
    NumericalFailure,
    OrderExhausted,
    ToleranceViolation,
    TruncationTooSmall,
)
from .fields import build_family
from .lemmas import bootstrap_scan, check_bootstrap, fit_constants, sweep
from .norms import certify_radius, psi_norm, rho_norm, tables_to_csv
from .pipeline import as_audit, audit_tables, solve_divergence
from .polynomial import Poly

log = logging.getLogger("anadiv")

SUBCOMMANDS = ("solve", "table", "certify", "lemmas", "bootstrap", "report")
EXIT_CONFIG, EXIT_NUMERICAL, EXIT_TOLERANCE = 2, 3, 4


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _finite(x):
    if isinstance(x, float) and not np.isfinite(x):
        return str(x)
    return x


class Run:
    """State for a single invocation; writes every artifact from one thread."""

    def __init__(self, cfg: RunConfig, out: Path, threads: int):
        self.cfg = cfg
        self.out = out
        self.domain = make_domain(cfg.domain, **(
            {"enlargement_scale": cfg.solver.scale} if cfg.solver.scale else {}))
        f = cfg.polynomial()
        if "random_degree" in cfg.raw.get("f", {}):
            q = self.domain.volume_quadrature(cfg.solver.n_radial, cfg.solver.n_angular)
            f = f - q.integrate(f.eval_points(q.points)) / float(q.weights.sum())
        self.f = f
        self.audit = replace(cfg.audit, threads=threads, i_max=cfg.I_max, j_max=cfg.J_max)
        self.summary: list[str] = []
        self.files: list[str] = []
        self._solution = None
        self._tables = None
        self._done: set[str] = set()
        self.want_commutators = False

    def once(self, name: str) -> bool:
        if name in self._done:
            return False
        self._done.add(name)
        return True

    def write(self, rel: str, text: str):
        p = self.out / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text)
        self.files.append(rel)

    @property
    def solution(self):
        if self._solution is None:
            self._solution = solve_divergence(self.domain, self.f, self.cfg.solver)
        return self._solution

    def tables(self, commutators: bool):
        commutators = commutators or self.want_commutators
        if self._tables is None or (commutators and "comm_lap_v" not in self._tables):
            family = build_family(self.domain)
            self._tables, _ = audit_tables(self.solution, family, self.audit, commutators)
            for name, t in sorted(self._tables.items()):
                self.write(f"tables/{name}.csv", tables_to_csv([t]))
        return self._tables

    # subcommands ---------------------------------------------------------------------
    def solve(self):
        if not self.once('solve'):
            return
        sol = self.solution
        r = sol.residuals
        self.write("reports/solve.json", _dump({"domain": self.domain.name, "f": self.f.terms(), "residuals": r}))
        self.summary += [
            f"domain: {self.domain.name}",
            f"div residual ||div u - f||: {r['div_residual']:.3e} (||f|| = {r['f_norm']:.3e})",
            f"boundary residual max|u|: {r['boundary_max']:.3e} (data scale {r['data_scale']:.3e})",
            f"momentum residual max|-Lap u + grad p|: {r['momentum_max']:.3e}",
            f"mean of f: {r['mean_f']:.3e}; flux of grad phi: {r['flux']:.3e}",
        ]
        sol.check_tolerances()

    def table(self):
        if not self.once('table'):
            return
        self.solve()
        t = self.tables(False)
        w = self.cfg.weights
        norms = {name: rho_norm(t[name], w).total for name in ("u", "v", "q", "grad_phi", "f")}
        norms["psi"] = psi_norm(t["v"], t["q"], w).total
        self.write("reports/norms.json", _dump({"eps1": w.eps1, "eps2": w.eps2, "M": w.M, "norms": norms}))
        self.summary += [f"rho({k}) = {v:.6e}" for k, v in sorted(norms.items())]

    def certify(self):
        if not self.once('certify'):
            return
        self.table()
        t = self.tables(False)
        c = certify_radius(t["u"], self.cfg.weights.M, ratio=self.cfg.ratio, grid=self.cfg.grid)
        self.write("reports/certify.json", _dump({
            "best": c.best, "certified_eps2": c.certified,
            "ratios": {format(k, ".17g"): [_finite(x) for x in v] for k, v in c.ratios.items()},
        }))
        self.summary.append(f"certified (eps1, eps2): {c.best}")

    def _lemma_reports(self):
        t = as_audit(self.tables(True))
        a = self.audit
        reps = sweep(t, a.i_sweep, a.j_sweep, a.leibniz_max)
        return t, reps, fit_constants(reps)

    def lemmas(self):
        if not self.once('lemmas'):
            return
        self.solve()
        _, reps, consts = self._lemma_reports()
        self.write("reports/lemmas.json", _dump([r.to_json() for r in reps]))
        self.write("reports/constants.json", _dump({
            "C": consts.C, "K": consts.K, "C_star": consts.C_star, "K_star": consts.K_star,
            "degenerate": consts.degenerate,
        }))
        lines = [f"{'lemma':20} {'i':>2} {'j':>2} {'lhs':>12} {'rhs':>12} {'ratio':>10} {'K*':>10}"]
        for r in reps:
            ratio = "degenerate" if r.degenerate else f"{r.ratio:.4g}"
            k = "" if r.K_star is None else f"{r.K_star:.4g}"
            lines.append(f"{r.lemma:20} {r.i:>2} {r.j:>2} {r.lhs:12.5e} {r.rhs:12.5e} {ratio:>10} {k:>10}")
        self.write("reports/lemmas.txt", "\n".join(lines) + "\n")
        self.summary.append(f"fitted C* = {consts.C_star:.6g}, K* = {consts.K_star:.6g}")

    def bootstrap(self):
        if not self.once('bootstrap'):
            return
        self.solve()
        t, _, consts = self._lemma_reports()
        rep = check_bootstrap(t, self.cfg.weights)
        grid, best = bootstrap_scan(t, self.cfg.weights.M, consts.C_star, consts.K_star, self.cfg.grid)
        self.write("reports/bootstrap.json", _dump({
            "configured": rep.to_json(), "grid": [g.to_json() for g in grid], "max_eps2": best,
            "C_star": consts.C_star, "K_star": consts.K_star,
        }))
        self.summary.append(f"absorption at configured eps: {rep.absorbed}; max grid eps2: {best}")

    def report(self):
        self.certify()
        self.lemmas()
        self.bootstrap()
        t = self.tables(True)
        w = self.cfg.weights
        ru, rf = rho_norm(t["u"], w).total, rho_norm(t["f"], w).total
        self.summary.append(f"rho(u)/rho(f) = {ru / rf:.6e}" if rf > 0 else "rho(f) = 0")


def check_orders(cfg: RunConfig, subcommand: str) -> None:
    """Reject configurations whose tables cannot serve the requested audits."""
    M = cfg.weights.M
    if subcommand == "solve":
        return
    if cfg.I_max < M or cfg.J_max < M:
        raise ConfigError(f"norms need I_max, J_max >= M = {M} (have {cfg.I_max}, {cfg.J_max})")
    if subcommand in ("certify", "report") and M < 5:
        raise ConfigError("certification needs M >= 5")
    if subcommand in ("lemmas", "bootstrap", "report"):
        a = cfg.audit
        li, lj = a.leibniz_max
        need = max(a.i_sweep + a.j_sweep, li + lj + 1)
        if M < need:
            raise ConfigError(
                f"audits up to i={a.i_sweep}, j={a.j_sweep} and Leibniz ({li}, {lj}) need M >= {need}, have {M}")


def estimate_cost(cfg: RunConfig) -> int:
    return sum(3**j for j in range(cfg.max_word_length() + 1))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="anadiv", description=__doc__.splitlines()[0])
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", required=True, type=Path)
    ap.add_argument("--out", type=Path, default=None, help="artifact directory (overrides config)")
    ap.add_argument("--force", action="store_true", help="allow word lengths above the cost guard")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    t0 = time.perf_counter()
    try:
        cfg, raw = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be nonnegative")
            cfg.seed = args.seed
            if "random_degree" in cfg.raw.get("f", {}):
                from .config import random_zero_mean_terms

                cfg.f_terms = random_zero_mean_terms(int(cfg.raw["f"]["random_degree"]), cfg.seed)
        check_orders(cfg, args.subcommand)
        if args.threads < 1:
            raise ConfigError("--threads must be positive")
        if args.subcommand != "solve" and cfg.max_word_length() > MAX_WORD_LENGTH and not args.force:
            raise ConfigError(
                f"word length {cfg.max_word_length()} means {estimate_cost(cfg)} words per table "
                f"(3^{cfg.max_word_length()} at the top level); rerun with --force"
            )
        out = args.out or Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        run = Run(cfg, out, args.threads)
        run.want_commutators = args.subcommand in ("lemmas", "bootstrap", "report")
    except (ConfigError, DomainError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    status = 0
    try:
        getattr(run, args.subcommand)()
    except ToleranceViolation as exc:
        run.summary.append(f"TOLERANCE VIOLATION: {exc}")
        status = EXIT_TOLERANCE
    except NumericalFailure as exc:
        run.summary.append(f"NUMERICAL FAILURE: {exc}")
        status = EXIT_NUMERICAL
    except (TruncationTooSmall, InsufficientOrders, OrderExhausted) as exc:
        run.summary.append(f"CONFIG ERROR: {exc}")
        print(f"config error: {exc}", file=sys.stderr)
        status = EXIT_CONFIG

    shutil.copyfile(args.config, out / "config.toml")
    run.write("summary.txt", "\n".join(run.summary) + "\n")
    manifest = {
        "subcommand": args.subcommand,
        "input_sha256": hashlib.sha256(raw).hexdigest(),
        "seed": cfg.seed,
        "threads": args.threads,
        "exit_status": status,
        "versions": {"anadiv": __version__, "python": platform.python_version(),
                     "numpy": np.__version__, "scipy": scipy.__version__},
        "wall_time_s": round(time.perf_counter() - t0, 3),
        "files": sorted(set(run.files)),
    }
    (out / "manifest.json").write_text(_dump(manifest))
    print(f"{args.subcommand}: exit {status}; artifacts in {out}")
    return status


if __name__ == "__main__":
    sys.exit(main())
