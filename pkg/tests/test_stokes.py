import numpy as np
import pytest

from anadiv import make_domain, solve_stokes_bvp
from anadiv.errors import IncompatibleFlux
from anadiv.jet import jet_laplacian
from anadiv.stokes import boundary_flux


def _interior(domain, n=50, seed=0):
    rng = np.random.default_rng(seed)
    q = domain.volume_quadrature(16, 64)
    return q.points[rng.choice(len(q), n, replace=False)]


def rotation(p):
    return np.stack([p[:, 1], -p[:, 0]], axis=-1)


@pytest.fixture(scope="module")
def rigid(disk):
    return solve_stokes_bvp(disk, rotation)


def test_rigid_rotation_reproduced(disk, rigid):
    pts = _interior(disk)
    assert np.abs(rigid.velocity(pts) - rotation(pts)).max() <= 1e-6


def test_kernel_identities_at_random_points(disk, rigid):
    pts = _interior(disk, 50, seed=3)
    v1, v2, q = rigid.jets(pts, 3)
    div = v1.diff("x").value + v2.diff("y").value
    assert np.abs(div).max() <= 1e-12
    mom = [-jet_laplacian(v1).value + q.derivative(1, 0), -jet_laplacian(v2).value + q.derivative(0, 1)]
    assert max(np.abs(m).max() for m in mom) <= 1e-10


def test_pressure_gauge_zero_mean(ellipse):
    sol = solve_stokes_bvp(ellipse, lambda p: np.stack([p[:, 1] ** 2, p[:, 0] ** 2], axis=-1))
    q = ellipse.volume_quadrature(16, 96)
    assert abs(q.integrate(sol.pressure(q.points))) < 1e-10


def test_net_flux_rejected(disk):
    with pytest.raises(IncompatibleFlux) as exc:
        solve_stokes_bvp(disk, lambda p: p.copy())  # radial field, flux 2 pi
    assert exc.value.flux == pytest.approx(2 * np.pi, rel=1e-8)


def test_boundary_flux_of_radial_field(disk):
    b = disk.boundary_trace(64)
    assert boundary_flux(b, b.points) == pytest.approx(2 * np.pi, rel=1e-12)
