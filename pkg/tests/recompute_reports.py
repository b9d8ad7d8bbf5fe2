"""Recompute every report quantity of an artifact bundle from its CSV tables.

Standalone on purpose: uses only csv, json and math, so it checks the
serialized artifacts rather than the package that wrote them.

    python tests/recompute_reports.py OUT_DIR
"""
from __future__ import annotations

import csv
import json
import math
import sys
from pathlib import Path

REL_TOL = 1e-10


def load_tables(bundle: Path) -> dict:
    tables = {}
    for path in sorted((bundle / "tables").glob("*.csv")):
        with path.open(newline="") as fh:
            for row in csv.DictReader(fh):
                tables.setdefault(row["subject"], {})[(int(row["i"]), row["word"])] = float(row["value"])
    return tables


def norm(table: dict, i: int, j: int) -> float:
    vals = [v for (ii, w), v in table.items() if ii == i and len(w) == j]
    if not vals:
        raise KeyError(f"missing order ({i}, {j})")
    return math.fsum(vals)


def weight(e1, e2, i, j):
    return e1**i * e2**j / math.factorial(i + j)


def rho(table, e1, e2, M):
    return sum(weight(e1, e2, i, j) * norm(table, i, j) for i in range(M + 1) for j in range(M + 1 - i))


def psi(v, q, e1, e2, M):
    total = 0.0
    for i in range(M + 1):
        for j in range(M + 1 - i):
            total += weight(e1, e2, i, j) * norm(v, i, j)
            if i >= 2:
                total += weight(e1, e2, i, j) * norm(q, i - 1, j)
            elif i == 1:
                total += e1 * e2**j / math.factorial(1 + j) * norm(q, 0, j)
            elif j >= 1:
                total += e2**j / math.factorial(j) * norm(q, 0, j - 1)
    return total


def lemma_sides(t: dict, lemma: str, i: int, j: int) -> tuple[float, float]:
    v, q, f, cl, cg = t["v"], t["q"], t["f"], t["comm_lap_v"], t["comm_grad_q"]
    fac = math.factorial
    if lemma == "normal":
        lhs = norm(v, i, j) + norm(q, i - 1, j)
        rhs = (norm(v, i - 2, j + 1) + norm(v, i - 1, j + 1) + norm(v, i - 2, j)
               + norm(cl, i - 2, j) + norm(cg, i - 2, j))
        return lhs, rhs
    if lemma == "normal_first":
        return (norm(v, 1, j) + norm(q, 0, j),
                norm(cl, 0, j - 1) + norm(cg, 0, j - 1) + norm(f, 0, j))
    if lemma == "tangential":
        return (norm(v, 0, j) + norm(q, 0, j - 1),
                norm(cl, 0, j - 2) + norm(cg, 0, j - 2) + norm(f, 0, j - 1))
    if lemma == "lap_comm_tangential":
        rhs = sum(fac(j) / fac(j - jp) * (norm(v, 2, j - jp) + jp * norm(v, 1, j - jp)) for jp in range(1, j + 1))
        return norm(cl, 0, j), rhs
    if lemma == "grad_comm_tangential":
        rhs = sum(fac(j) / fac(j - jp) * norm(q, 1, j - jp) for jp in range(1, j + 1))
        return norm(cg, 0, j), rhs
    if lemma in ("lap_comm_mixed", "grad_comm_mixed"):
        base, comm, shift = (v, cl, 2) if lemma == "lap_comm_mixed" else (q, cg, 1)
        rhs = 0.0
        for jp in range(j):
            for ip in range(i + 1):
                c = math.comb(ip + j - jp, ip) * fac(i) * fac(j) / (fac(i - ip) * fac(jp))
                rhs += c * norm(base, i - ip + shift, jp)
        return norm(comm, i, j), rhs
    raise ValueError(f"unknown lemma {lemma!r}")


def bootstrap(t, e1, e2, M):
    v, q = t["v"], t["q"]
    S1 = sum(weight(e1, e2, i, j) * (norm(v, i, j) + norm(q, i - 1, j))
             for i in range(2, M + 1) for j in range(1, M + 1 - i))
    S2 = sum(e1 * e2**j / math.factorial(j + 1) * (norm(v, 1, j) + norm(q, 0, j)) for j in range(2, M))
    S3 = sum(e2**j / math.factorial(j) * (norm(v, 0, j) + norm(q, 0, j - 1)) for j in range(3, M + 1))
    return {"S1": S1, "S2": S2, "S3": S3, "psi": psi(v, q, e1, e2, M), "rho_f": rho(t["f"], e1, e2, M)}


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= REL_TOL * max(abs(a), abs(b)) or abs(a - b) <= 1e-300


def recompute(bundle) -> tuple[int, list[str]]:
    """Return ``(number of checked values, mismatch descriptions)``."""
    bundle = Path(bundle)
    t = load_tables(bundle)
    reports = bundle / "reports"
    checked, bad = 0, []

    def check(label, got, want):
        nonlocal checked
        checked += 1
        if not _close(got, want):
            bad.append(f"{label}: recomputed {got!r} vs reported {want!r}")

    p = reports / "norms.json"
    if p.exists():
        d = json.loads(p.read_text())
        e1, e2, M = d["eps1"], d["eps2"], d["M"]
        for name, val in d["norms"].items():
            got = psi(t["v"], t["q"], e1, e2, M) if name == "psi" else rho(t[name], e1, e2, M)
            check(f"norm {name}", got, val)
    p = reports / "lemmas.json"
    if p.exists():
        for r in json.loads(p.read_text()):
            lhs, rhs = lemma_sides(t, r["lemma"], r["i"], r["j"])
            check(f"{r['lemma']}({r['i']},{r['j']}) lhs", lhs, r["lhs"])
            check(f"{r['lemma']}({r['i']},{r['j']}) rhs", rhs, r["rhs"])
    p = reports / "bootstrap.json"
    if p.exists():
        d = json.loads(p.read_text())
        for rep in [d["configured"], *d["grid"]]:
            got = bootstrap(t, rep["eps1"], rep["eps2"], rep["M"])
            for k, val in got.items():
                check(f"bootstrap eps2={rep['eps2']} {k}", val, rep[k])
    return checked, bad


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1:
        print(__doc__)
        return 2
    n, bad = recompute(argv[0])
    for line in bad:
        print("MISMATCH", line)
    print(f"checked {n} values, {len(bad)} mismatches")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
