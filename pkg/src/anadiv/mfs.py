"""Shared method-of-fundamental-solutions machinery: source placement,
truncated-SVD least squares and chunked kernel-jet summation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import AnalyticDomain
from .jet import Jet, KernelJets

RCOND = 1e-13
CHUNK_PAIRS = 8192


def source_circle(domain: AnalyticDomain, n: int, factor: float = 1.5) -> np.ndarray:
    R = factor * domain.circumscribed_radius()
    t = 2 * np.pi * (np.arange(n) + 0.5) / n
    return np.array(domain.center) + R * np.stack([np.cos(t), np.sin(t)], axis=-1)


@dataclass(frozen=True)
class LstsqResult:
    x: np.ndarray
    rank: int
    singular_values: np.ndarray


def tsvd_lstsq(A: np.ndarray, b: np.ndarray, rcond: float = RCOND) -> LstsqResult:
    """Least squares with singular values below ``rcond * s_max`` discarded."""
    u, s, vt = np.linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return LstsqResult(np.zeros(A.shape[1:2] + b.shape[1:]), 0, s)
    keep = s > rcond * s[0]
    r = u[:, keep].T @ b
    r = r / (s[keep][:, None] if r.ndim > 1 else s[keep])
    return LstsqResult(vt[keep].T @ r, int(keep.sum()), s)


def chunks(n_points: int, n_sources: int):
    step = max(1, CHUNK_PAIRS // max(1, n_sources))
    for start in range(0, n_points, step):
        yield slice(start, min(n_points, start + step))


def log_potential_jets(points, sources, weights, order: int) -> Jet:
    """Jet of ``sum_s w_s log|x - s|`` at each point."""
    points = np.asarray(points, dtype=float)
    out = np.zeros((len(points), order + 1, order + 1))
    for sl in chunks(len(points), len(sources)):
        kj = KernelJets(points[sl, None, :], sources[None, :, :], order)
        out[sl] = np.einsum("s,psab->pab", weights, kj.log_charge().coeffs)
    return Jet(points, out)


def log_potential_values(points, sources, weights) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    d = points[:, None, :] - sources[None, :, :]
    return 0.5 * np.log(np.sum(d * d, axis=-1)) @ weights
