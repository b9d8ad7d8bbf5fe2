"""Star-shaped analytic domains with polynomial defining functions.

The domain is the component of ``{rho > 0}`` containing ``center``. Boundary
points are found along equi-angular rays from the center, which also gives
a tensor-product volume rule (trapezoid in angle, Gauss-Legendre in radius)
that converges spectrally for analytic integrands.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import DegenerateBoundary, LengthMismatch, NotStarShaped, RootFindFailure
from .polynomial import Poly

GRAD_THRESHOLD = 1e-6
DEFAULT_SCALE = 1.2


@dataclass(frozen=True)
class QuadratureSet:
    points: np.ndarray
    weights: np.ndarray
    kind: str
    normals: np.ndarray | None = None

    def __len__(self):
        return len(self.weights)

    def integrate(self, values) -> float:
        values = np.asarray(values, dtype=float)
        if values.shape[0] != len(self.weights):
            raise LengthMismatch(f"{values.shape[0]} values for {len(self.weights)} points")
        return float(np.tensordot(self.weights, values, axes=(0, 0)))


def l2_norm(values, quad: QuadratureSet) -> float:
    """Discrete L2 norm. Extra trailing axes are components; their norms are summed."""
    values = np.asarray(values, dtype=float)
    n = len(quad.weights)
    if n == 0:
        raise LengthMismatch("empty quadrature")
    if values.shape[:1] != (n,):
        raise LengthMismatch(f"{values.shape[:1]} values for {n} points")
    sq = np.tensordot(quad.weights, values * values, axes=(0, 0))
    return float(np.sum(np.sqrt(np.maximum(sq, 0.0))))


@dataclass(eq=False)
class AnalyticDomain:
    rho: Poly
    center: tuple[float, float] = (0.0, 0.0)
    collar_width: float | None = None
    enlargement_scale: float = DEFAULT_SCALE
    name: str = "custom"
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.center = (float(self.center[0]), float(self.center[1]))
        if self.collar_width is None:
            self.collar_width = 0.1 * self.inradius_estimate()

    # ray geometry -------------------------------------------------------
    def _ray_coefficients(self, theta: np.ndarray) -> np.ndarray:
        """Coefficients (ascending in r) of rho(center + r*(cos t, sin t))."""
        deg = self.rho.degree
        T = self.rho.taylor(np.array(self.center), deg)
        c, s = np.cos(theta), np.sin(theta)
        out = np.zeros((len(theta), deg + 1))
        for a in range(deg + 1):
            for b in range(deg + 1 - a):
                if T[a, b] != 0.0:
                    out[:, a + b] += T[a, b] * c**a * s**b
        return out

    def _trace_radii(self, theta: np.ndarray) -> np.ndarray:
        coeffs = self._ray_coefficients(theta)
        radii = np.empty(len(theta))
        for k, p in enumerate(coeffs):
            radii[k] = _ray_root(p, theta[k])
        return radii

    def radii(self, n: int) -> np.ndarray:
        key = ("radii", int(n))
        if key not in self._cache:
            theta = 2 * np.pi * np.arange(n) / n
            self._cache[key] = self._trace_radii(theta)
        return self._cache[key]

    def circumscribed_radius(self) -> float:
        return float(self.radii(256).max())

    def inradius_estimate(self) -> float:
        return float(self.radii(256).min())

    def contains(self, points) -> np.ndarray:
        """Points strictly inside; valid for star-shaped domains."""
        p = np.asarray(points, dtype=float) - np.array(self.center)
        r = np.hypot(p[..., 0], p[..., 1])
        th = np.arctan2(p[..., 1], p[..., 0])
        R = self._trace_radii(np.ravel(th)).reshape(np.shape(th))
        return r < R

    # quadrature ---------------------------------------------------------
    def boundary_trace(self, n: int) -> QuadratureSet:
        return boundary_trace(self, n)

    def volume_quadrature(self, n_radial: int = 16, n_angular: int = 64) -> QuadratureSet:
        return volume_quadrature(self, n_radial, n_angular)

    def dilate(self, scale: float) -> "AnalyticDomain":
        """The domain ``center + scale * (Omega - center)``."""
        return AnalyticDomain(
            rho=self.rho.affine(scale, self.center),
            center=self.center,
            collar_width=self.collar_width * scale,
            enlargement_scale=self.enlargement_scale,
            name=f"{self.name}*{scale:g}",
        )

    def enlarged(self, scale: float | None = None) -> "AnalyticDomain":
        return self.dilate(self.enlargement_scale if scale is None else scale)

    def validate(self, n_rays: int = 256) -> None:
        cx, cy = self.center
        if not self.rho(cx, cy) > 0:
            raise NotStarShaped("defining function is not positive at the center")
        theta = 2 * np.pi * np.arange(n_rays) / n_rays
        coeffs = self._ray_coefficients(theta)
        radii = self._trace_radii(theta)
        for k, p in enumerate(coeffs):
            # only the component containing the center matters: inspect each
            # ray a little past its first crossing
            r = np.linspace(0.0, 1.5 * radii[k], 2049)
            vals = np.polynomial.polynomial.polyval(r, p)
            changes = np.count_nonzero(np.diff(np.signbit(vals)))
            slope = np.polynomial.polynomial.polyval(radii[k], np.polynomial.polynomial.polyder(p))
            if changes != 1 or not slope < 0:
                raise NotStarShaped(
                    f"ray at angle {theta[k]:.4f} crosses the zero set {changes} times"
                )
        q = boundary_trace(self, n_rays)
        gx, gy = self.rho.gradient()
        g = np.hypot(gx.eval_points(q.points), gy.eval_points(q.points))
        if g.min() < GRAD_THRESHOLD:
            raise DegenerateBoundary(f"|grad rho| = {g.min():.3g} on the boundary")


def _root_bound(p: np.ndarray) -> float:
    # coefficients at roundoff level (e.g. cos(pi/2) products) count as zero
    p = np.where(np.abs(p) > 1e-13 * np.abs(p).max(), p, 0.0)
    p = np.trim_zeros(p, "b")
    if len(p) < 2:
        raise NotStarShaped("defining function is constant along a ray; the domain is unbounded")
    return 1.0 + float(np.max(np.abs(p[:-1] / p[-1])))


def _ray_root(p: np.ndarray, theta: float) -> float:
    R = _root_bound(p)
    p = np.where(np.abs(p) > 1e-13 * np.abs(p).max(), p, 0.0)
    grid = np.linspace(0.0, R, 513)
    vals = np.polynomial.polynomial.polyval(grid, p)
    if vals[0] <= 0:
        raise RootFindFailure("defining function is not positive at the center")
    neg = np.nonzero(vals <= 0)[0]
    if len(neg) == 0:
        raise RootFindFailure(f"no boundary crossing bracketed on ray {theta:.4f}")
    k = neg[0]
    f = lambda r: np.polynomial.polynomial.polyval(r, p)  # noqa: E731
    r = brentq(f, grid[k - 1], grid[k], xtol=1e-15, rtol=4 * np.finfo(float).eps)
    dp = np.polynomial.polynomial.polyder(p)
    for _ in range(3):
        d = np.polynomial.polynomial.polyval(r, dp)
        if d == 0:
            break
        r -= f(r) / d
    return float(r)


def boundary_trace(domain: AnalyticDomain, n: int) -> QuadratureSet:
    """Boundary nodes on equi-angular rays with spectrally accurate arclength weights."""
    if n < 16:
        raise ValueError("boundary trace needs n >= 16")
    theta = 2 * np.pi * np.arange(n) / n
    r = domain.radii(n)
    k = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        k[n // 2] = 0.0
    dr = np.real(np.fft.ifft(1j * k * np.fft.fft(r)))
    c, s = np.cos(theta), np.sin(theta)
    pts = np.array(domain.center) + np.stack([r * c, r * s], axis=-1)
    speed = np.hypot(r, dr)
    w = speed * 2 * np.pi / n
    # tangent (dx/dt, dy/dt); outward normal is the tangent rotated clockwise
    tx = dr * c - r * s
    ty = dr * s + r * c
    normals = np.stack([ty, -tx], axis=-1) / speed[:, None]
    return QuadratureSet(pts, w, "boundary", normals)


def volume_quadrature(domain: AnalyticDomain, n_radial: int = 16, n_angular: int = 64) -> QuadratureSet:
    if n_radial < 8 or n_angular < 8:
        raise ValueError("volume quadrature needs at least 8 nodes per direction")
    t, wt = np.polynomial.legendre.leggauss(n_radial)
    t = 0.5 * (t + 1.0)
    wt = 0.5 * wt
    theta = 2 * np.pi * np.arange(n_angular) / n_angular
    R = domain.radii(n_angular)
    r = R[:, None] * t[None, :]
    w = (R[:, None] ** 2) * (t * wt)[None, :] * (2 * np.pi / n_angular)
    pts = np.array(domain.center) + np.stack(
        [r * np.cos(theta)[:, None], r * np.sin(theta)[:, None]], axis=-1
    )
    return QuadratureSet(pts.reshape(-1, 2), w.reshape(-1), "volume")


# named domains -------------------------------------------------------------

def disk(radius: float = 1.0, **kw) -> AnalyticDomain:
    rho = Poly.from_terms([(0, 0, 0.5), (2, 0, -0.5 / radius**2), (0, 2, -0.5 / radius**2)])
    return _finish(AnalyticDomain(rho, (0.0, 0.0), name="disk", **kw))


def ellipse(a: float, b: float, **kw) -> AnalyticDomain:
    rho = Poly.from_terms([(0, 0, 0.5), (2, 0, -0.5 / a**2), (0, 2, -0.5 / b**2)])
    return _finish(AnalyticDomain(rho, (0.0, 0.0), name=f"ellipse({a:g},{b:g})", **kw))


def perturbed_disk(amplitude: float, k: int, **kw) -> AnalyticDomain:
    """``rho = 1 - x^2 - y^2 + amplitude * Re((x + i y)^k)``."""
    k = int(k)
    terms = [(0, 0, 1.0), (2, 0, -1.0), (0, 2, -1.0)]
    from math import comb

    for j in range(0, k + 1, 2):
        # Re (x+iy)^k = sum_j C(k,j) x^(k-j) (i y)^j over even j
        terms.append((k - j, j, amplitude * comb(k, j) * (-1) ** (j // 2)))
    rho = Poly.from_terms(terms)
    return _finish(AnalyticDomain(rho, (0.0, 0.0), name=f"perturbed-disk({amplitude:g},{k})", **kw))


def _finish(domain: AnalyticDomain) -> AnalyticDomain:
    domain.validate()
    return domain


_NAMED = re.compile(r"^\s*([a-z\-]+)\s*(?:\(([^)]*)\))?\s*$")


def _parse_named(text: str) -> dict:
    m = _NAMED.match(text)
    if not m:
        raise ValueError(f"cannot parse domain spec {text!r}")
    args = [float(a) for a in m.group(2).split(",")] if m.group(2) else []
    return {"kind": m.group(1), "args": args}


def make_domain(spec, **kw) -> AnalyticDomain:
    """Build a validated domain.

    ``spec`` is a name (``"disk"``, ``"ellipse(2,1)"``,
    ``"perturbed-disk(0.1,3)"``), a mapping with ``kind`` and parameters, or
    a mapping with ``coefficients`` (list of ``[a, b, c]`` monomial terms)
    and ``center``.
    """
    if isinstance(spec, AnalyticDomain):
        return spec
    if isinstance(spec, str):
        spec = _parse_named(spec)
    spec = dict(spec)
    if "spec" in spec:
        named = _parse_named(spec.pop("spec"))
        spec = {**named, **spec}
    for key in ("collar_width", "enlargement_scale"):
        if key in spec and key not in kw:
            kw[key] = spec[key]
    if "coefficients" in spec:
        rho = Poly.from_terms(spec["coefficients"])
        center = tuple(spec.get("center", (0.0, 0.0)))
        return _finish(AnalyticDomain(rho, center, name=spec.get("name", "custom"), **kw))
    kind = spec.get("kind")
    args = list(spec.get("args", []))
    if kind == "disk":
        return disk(*(args or [spec.get("radius", 1.0)]), **kw)
    if kind == "ellipse":
        if not args:
            args = [spec["a"], spec["b"]]
        return ellipse(*args, **kw)
    if kind == "perturbed-disk":
        if not args:
            args = [spec["amplitude"], spec["k"]]
        return perturbed_disk(args[0], int(args[1]), **kw)
    raise ValueError(f"unknown domain kind {kind!r}")
