"""Derivative tables ``||d^i T^beta w||`` and the weighted analytic norms
built from them."""
from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import factorial

import numpy as np

from .domain import QuadratureSet
from .errors import InsufficientOrders, OrderExhausted, TruncationTooSmall
from .fields import LETTERS, TangentFieldFamily
from .jet import Jet, jet_laplacian

EPS2_GRID = tuple(2.0**-k for k in range(1, 9))
EPS_RATIO = 100.0
DECAY_THRESHOLD = 0.9


def word_str(word) -> str:
    return "".join(str(k) for k in word)


def parse_word(text: str) -> tuple[int, ...]:
    return tuple(int(ch) for ch in text.strip())


@dataclass
class DerivativeTable:
    subject: str
    i_max: int
    j_max: int
    total_max: int
    letters: tuple[int, ...] = LETTERS
    entries: dict = field(default_factory=dict)
    quadrature_id: str = ""

    def __post_init__(self):
        self._agg: dict[tuple[int, int], float] = {}

    def keys_expected(self):
        from .fields import all_words

        for j in range(self.j_max + 1):
            for w in all_words(j, self.letters):
                for i in range(min(self.i_max, self.total_max - j) + 1):
                    yield (i, w)

    def is_complete(self) -> bool:
        return all(k in self.entries for k in self.keys_expected())

    def has(self, i: int, j: int) -> bool:
        return 0 <= i <= self.i_max and 0 <= j <= self.j_max and i + j <= self.total_max

    def norm(self, i: int, j: int) -> float:
        """``||d^i T^j w||``: the entry sum over all words of length ``j``."""
        key = (i, j)
        if key not in self._agg:
            if not self.has(i, j):
                raise OrderExhausted(f"table {self.subject!r} has no order ({i}, {j})")
            self._agg[key] = float(sum(v for (ii, w), v in self.entries.items() if ii == i and len(w) == j))
        return self._agg[key]

    def scaled(self, c: float) -> "DerivativeTable":
        return DerivativeTable(
            self.subject, self.i_max, self.j_max, self.total_max, self.letters,
            {k: abs(c) * v for k, v in self.entries.items()}, self.quadrature_id,
        )

    def rows(self):
        """Rows ``(subject, i, word, value)`` in canonical order."""
        keys = sorted(self.entries, key=lambda k: (k[0], len(k[1]), k[1]))
        return [(self.subject, i, word_str(w), self.entries[(i, w)]) for i, w in keys]


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def tables_to_csv(tables) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["subject", "i", "word", "value"])
    for t in tables:
        for s, i, w, v in t.rows():
            wr.writerow([s, i, w, format_float(v)])
    return buf.getvalue()


def tables_from_csv(text: str) -> dict[str, dict[tuple[int, tuple[int, ...]], float]]:
    out: dict[str, dict] = {}
    for row in csv.DictReader(io.StringIO(text)):
        out.setdefault(row["subject"], {})[(int(row["i"]), parse_word(row["word"]))] = float(row["value"])
    return out


# table construction -------------------------------------------------------

def _entry(components, i: int, weights: np.ndarray) -> float:
    total = 0.0
    for c in components:
        d = c.derivatives(i)
        total += float(np.sum(np.sqrt(np.maximum(weights @ (d * d), 0.0))))
    return total


def _walk_words(family_jets, subjects, j_max, letters, threads=1):
    """Yield ``(word, jets)`` for every word up to length ``j_max``, where
    ``jets`` applies the word to each jet in ``subjects``."""
    level = {(): list(subjects)}
    yield from level.items()
    pool = ThreadPoolExecutor(threads) if threads > 1 else None
    try:
        for _ in range(j_max):
            items = sorted(level.items())

            def extend(item):
                w, jets = item
                return [((k,) + w, [family_jets.apply(k, s) for s in jets]) for k in letters]

            results = pool.map(extend, items) if pool else map(extend, items)
            nxt = {}
            for group in results:
                for w, jets in group:
                    nxt[w] = jets
            level = nxt
            yield from sorted(level.items())
    finally:
        if pool:
            pool.shutdown()


def required_order(i_max: int, j_max: int, total_max: int | None, extra: int = 0) -> int:
    total = i_max + j_max if total_max is None else min(total_max, i_max + j_max)
    return total + extra


def build_table(
    subject: str,
    components,
    quad: QuadratureSet,
    family: TangentFieldFamily,
    i_max: int,
    j_max: int,
    total_max: int | None = None,
    letters=LETTERS,
    threads: int = 1,
) -> DerivativeTable:
    """Tabulate ``sum_alpha ||d^alpha T^beta w||`` for every word ``beta``.

    ``components`` is a jet (scalar subject) or a sequence of jets (vector
    subject) at the quadrature nodes; their norms are summed.
    """
    comps = [components] if isinstance(components, Jet) else list(components)
    total_max = i_max + j_max if total_max is None else total_max
    need = required_order(i_max, j_max, total_max)
    order = comps[0].order
    if order < need:
        raise OrderExhausted(f"table to total order {need} needs jets of order {need}, got {order}")
    table = DerivativeTable(subject, i_max, j_max, total_max, tuple(letters), quadrature_id=_quad_id(quad))
    fj = family.at(quad.points, order)
    for w, jets in _walk_words(fj, comps, j_max, letters, threads):
        j = len(w)
        for i in range(min(i_max, total_max - j) + 1):
            table.entries[(i, w)] = _entry(jets, i, quad.weights)
    return table


def build_commutator_table(
    kind: str,
    subject: str,
    components,
    quad: QuadratureSet,
    family: TangentFieldFamily,
    i_max: int,
    j_max: int,
    total_max: int | None = None,
    letters=LETTERS,
    threads: int = 1,
) -> DerivativeTable:
    """Tabulate ``||d^alpha [T^beta, L] w||`` with ``L`` the Laplacian
    (``kind="laplacian"``, applied per component) or the gradient
    (``kind="gradient"``, scalar subject, two output components)."""
    comps = [components] if isinstance(components, Jet) else list(components)
    total_max = i_max + j_max if total_max is None else total_max
    extra = {"laplacian": 2, "gradient": 1}[kind]
    need = required_order(i_max, j_max, total_max, extra)
    order = comps[0].order
    if order < need:
        raise OrderExhausted(f"commutator table needs jets of order {need}, got {order}")
    if kind == "laplacian":
        seeds = comps + [jet_laplacian(c) for c in comps]
    else:
        if len(comps) != 1:
            raise ValueError("gradient commutators take a scalar subject")
        seeds = comps + [comps[0].diff("x"), comps[0].diff("y")]
    n = len(comps)
    table = DerivativeTable(subject, i_max, j_max, total_max, tuple(letters), quadrature_id=_quad_id(quad))
    fj = family.at(quad.points, order)
    for w, jets in _walk_words(fj, seeds, j_max, letters, threads):
        j = len(w)
        if kind == "laplacian":
            diff = [jets[n + c] - jet_laplacian(jets[c]) for c in range(n)]
        else:
            diff = [jets[1] - jets[0].diff("x"), jets[2] - jets[0].diff("y")]
        for i in range(min(i_max, total_max - j) + 1):
            table.entries[(i, w)] = _entry(diff, i, quad.weights)
    return table


def _quad_id(quad: QuadratureSet) -> str:
    return f"{quad.kind}:{len(quad)}"


# weighted norms ---------------------------------------------------------------

@dataclass(frozen=True)
class NormWeights:
    eps1: float
    eps2: float
    M: int = 6

    def __post_init__(self):
        if not (0 <= self.eps1 <= 1 and 0 <= self.eps2 <= 1):
            raise ValueError("weights must lie in [0, 1]")
        if self.M < 0:
            raise ValueError("truncation order must be nonnegative")

    def w(self, i: int, j: int) -> float:
        return self.eps1**i * self.eps2**j / factorial(i + j)


@dataclass(frozen=True)
class RhoNorm:
    total: float
    b_part: float
    bc_part: float
    partial_sums: tuple[float, ...]


def _require(table: DerivativeTable, M: int, shift: int = 0):
    for i in range(M + 1):
        for j in range(M + 1 - i):
            ii = i - shift if i >= shift else i
            if not table.has(ii, j):
                raise TruncationTooSmall(f"table {table.subject!r} lacks order ({ii}, {j}) for M={M}")


def rho_norm(table: DerivativeTable, w: NormWeights) -> RhoNorm:
    """``sum_{i+j<=M} eps1^i eps2^j / (i+j)! ||d^i T^j u||`` split into the
    orders with ``i+j >= 3`` and the rest."""
    _require(table, w.M)
    a = [0.0] * (w.M + 1)
    b = bc = 0.0
    for i in range(w.M + 1):
        for j in range(w.M + 1 - i):
            term = w.w(i, j) * table.norm(i, j)
            a[i + j] += term
            if i + j >= 3:
                b += term
            else:
                bc += term
    return RhoNorm(b + bc, b, bc, tuple(a))


@dataclass(frozen=True)
class PsiNorm:
    total: float
    velocity: float
    pressure: float
    partial_sums: tuple[float, ...]


def psi_norm(table_v: DerivativeTable, table_q: DerivativeTable, w: NormWeights) -> PsiNorm:
    """Velocity-pressure norm; pressure enters one derivative lower."""
    M = w.M
    _require(table_v, M)
    a = [0.0] * (M + 1)
    vel = pre = 0.0
    for i in range(M + 1):
        for j in range(M + 1 - i):
            t = w.w(i, j) * table_v.norm(i, j)
            vel += t
            a[i + j] += t
            if i >= 2:
                t = w.w(i, j) * table_q.norm(i - 1, j)
            elif i == 1:
                t = w.eps1 * w.eps2**j / factorial(1 + j) * table_q.norm(0, j)
            elif j >= 1:
                t = w.eps2**j / factorial(j) * table_q.norm(0, j - 1)
            else:
                t = 0.0
            pre += t
            a[i + j] += t
    return PsiNorm(vel + pre, vel, pre, tuple(a))


# analyticity certification --------------------------------------------------------

@dataclass(frozen=True)
class CertifyResult:
    best: tuple[float, float] | None
    ratios: dict  # eps2 -> list of a_{m+1}/a_m
    certified: tuple[float, ...]
    grid: tuple[tuple[float, float], ...]


def tail_ratios(partial_sums, m_lo: int = 3) -> list[float]:
    """``a_{m+1} / a_m`` for ``m_lo <= m < len - 1``; ``0/0`` counts as 0."""
    a = np.asarray(partial_sums, dtype=float)
    out = []
    for m in range(m_lo, len(a) - 1):
        if a[m] == 0.0:
            out.append(0.0 if a[m + 1] == 0.0 else float("inf"))
        else:
            out.append(float(a[m + 1] / a[m]))
    return out


def _clean_partial_sums(table: DerivativeTable, w: NormWeights, floor: float) -> list[float]:
    norms = {(i, j): table.norm(i, j) for i in range(w.M + 1) for j in range(w.M + 1 - i)}
    cut = floor * max(norms.values())
    a = [0.0] * (w.M + 1)
    for (i, j), v in norms.items():
        if v > cut:
            a[i + j] += w.w(i, j) * v
    return a


def certify_radius(
    table: DerivativeTable,
    M: int | None = None,
    ratio: float | None = EPS_RATIO,
    grid=EPS2_GRID,
    threshold: float = DECAY_THRESHOLD,
    noise_floor: float = 1e-12,
) -> CertifyResult:
    """Scan ``eps2`` over ``grid`` with ``eps1 = eps2 / ratio`` (``ratio=None``
    ties ``eps1 = eps2``) and keep the points whose tail ratios
    ``a_{m+1}/a_m``, ``3 <= m < M``, stay below ``threshold``. Table norms
    below ``noise_floor`` times the largest norm are treated as exact zeros."""
    if not table.entries:
        raise InsufficientOrders("empty table")
    M = table.total_max if M is None else M
    if M < 5 or M > table.total_max:
        raise InsufficientOrders(f"certification needs a table complete to order >= 5, have {table.total_max}")
    ratios = {}
    certified = []
    pts = []
    for e2 in sorted(grid):
        e1 = e2 if ratio is None else e2 / ratio
        pts.append((e1, e2))
        w = NormWeights(e1, e2, M)
        _require(table, M)
        r = tail_ratios(_clean_partial_sums(table, w, noise_floor))
        ratios[e2] = r
        if all(x <= threshold for x in r):
            certified.append(e2)
    best = None
    if certified:
        e2 = max(certified)
        best = (e2 if ratio is None else e2 / ratio, e2)
    return CertifyResult(best, ratios, tuple(certified), tuple(pts))
