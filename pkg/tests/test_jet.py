import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anadiv import Poly
from anadiv.errors import OrderMismatch, SourceTargetCoincide
from anadiv.jet import (
    Jet,
    compose_series,
    jet_diff,
    jet_laplacian,
    jet_log,
    jet_mul,
    jet_reciprocal,
    jet_sqrt,
    kernel_jet,
)
from oracles import (
    fd_derivative,
    log_charge,
    log_charge_derivative_exact,
    richardson,
    stokeslet_pressure,
    stokeslet_velocity,
)

BASE = np.array([[0.1, -0.2]])
SOURCE = np.array([2.0, 0.0])


def test_product_of_variables():
    x = Jet.variable(BASE, 3, "x")
    y = Jet.variable(BASE, 3, "y")
    xy = jet_mul(x, y)
    assert xy.derivative(1, 1)[0] == pytest.approx(1.0)
    assert xy.value[0] == pytest.approx(-0.02)
    assert xy.derivative(2, 0)[0] == 0.0


def test_reciprocal_and_log_series():
    # 1/(1+x) at 0: k-th x-derivative is (-1)^k k!
    j = Jet.constant(np.zeros((1, 2)), 5, 1.0) + Jet.variable(np.zeros((1, 2)), 5, "x")
    r = jet_reciprocal(j)
    assert [r.derivative(k, 0)[0] for k in range(6)] == pytest.approx([1, -1, 2, -6, 24, -120])
    lg = jet_log(j)
    assert [lg.derivative(k, 0)[0] for k in range(1, 6)] == pytest.approx([1, -1, 2, -6, 24])
    s = jet_sqrt(jet_mul(j, j))
    assert s.derivative(1, 0)[0] == pytest.approx(1.0)
    assert s.derivative(3, 0)[0] == pytest.approx(0.0, abs=1e-14)


def test_from_poly_matches_poly_derivatives():
    p = Poly.from_terms([(3, 1, 2.0), (0, 2, -1.0), (1, 0, 0.5)])
    j = Jet.from_poly(p, BASE, 4)
    for a in range(5):
        for b in range(5 - a):
            q = p
            for _ in range(a):
                q = q.diff("x")
            for _ in range(b):
                q = q.diff("y")
            want = q(*BASE[0])
            assert j.derivative(a, b)[0] == pytest.approx(want, abs=1e-13)


def test_order_mismatch_raises():
    with pytest.raises(OrderMismatch):
        Jet.zeros(BASE, 2) + Jet.zeros(BASE, 3)


def test_source_target_coincide():
    with pytest.raises(SourceTargetCoincide):
        kernel_jet("log-charge", SOURCE, SOURCE[None], 3)


def test_compose_log_matches_richardson():
    # log((x-2)^2 + y^2) at the origin, order 4
    inner = Jet.from_poly(Poly.from_terms([(0, 0, 4.0), (1, 0, -4.0), (2, 0, 1.0), (0, 2, 1.0)]), np.zeros((1, 2)), 4)
    j = jet_log(inner)
    f = lambda x, y: mpmath.log((x - 2) ** 2 + y**2)
    for a in range(5):
        for b in range(5 - a):
            if a + b == 0:
                continue
            want = richardson(f, (0.0, 0.0), a, b)
            got = j.derivative(a, b)[0]
            assert got == pytest.approx(want, rel=1e-6, abs=1e-9)


def test_compose_series_polynomial_outer():
    inner = Jet.variable(BASE, 4, "x")
    out = compose_series(np.array([1.0, 2.0, 3.0, 0.0, 0.0]), inner - BASE[0, 0])  # 1 + 2t + 3t^2
    assert out.derivative(2, 0)[0] == pytest.approx(6.0)


@pytest.mark.parametrize("kernel,fn", [
    ("log-charge", lambda: log_charge(SOURCE)),
    ("stokeslet-pressure", lambda: stokeslet_pressure(SOURCE, 1)),
])
def test_kernel_jets_against_richardson(kernel, fn):
    f = fn()
    j = kernel_jet(kernel, SOURCE, BASE, 6, 1, 1)
    for a in range(7):
        for b in range(7 - a):
            want = richardson(f, BASE[0], a, b)
            got = j.derivative(a, b)[0]
            assert abs(got - want) <= 1e-6 * max(abs(want), 1e-3), (a, b, got, want)


@pytest.mark.parametrize("i,j", [(1, 1), (1, 2), (2, 2)])
def test_stokeslet_velocity_against_richardson(i, j):
    f = stokeslet_velocity(SOURCE, i, j)
    jet = kernel_jet("stokeslet-velocity", SOURCE, BASE, 6, i, j)
    for a in range(7):
        for b in range(7 - a):
            want = richardson(f, BASE[0], a, b)
            assert abs(jet.derivative(a, b)[0] - want) <= 1e-6 * max(abs(want), 1e-3)


def test_log_charge_complex_oracle():
    j = kernel_jet("log-charge", SOURCE, BASE, 8)
    for a in range(9):
        for b in range(9 - a):
            want = log_charge_derivative_exact(BASE[0], SOURCE, a, b)
            assert j.derivative(a, b)[0] == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_harmonic_kernel_mixed_stencil_superconverges():
    # the h^2 error term of the (1,1) stencil is d_x d_y Lap f / 6 = 0
    j = kernel_jet("log-charge", SOURCE, BASE, 4)
    f = log_charge(SOURCE)
    hs = np.array([0.2, 0.1, 0.05])
    err = [abs(float(fd_derivative(f, BASE[0], 1, 1, h)) - j.derivative(1, 1)[0]) for h in hs]
    assert np.polyfit(np.log(hs), np.log(err), 1)[0] == pytest.approx(4.0, abs=0.5)


def test_finite_difference_slope_is_two():
    j = kernel_jet("log-charge", SOURCE, BASE, 4)
    f = log_charge(SOURCE)
    hs = np.array([0.2, 0.1, 0.05, 0.025])
    err = [abs(float(fd_derivative(f, BASE[0], 2, 1, h)) - j.derivative(2, 1)[0]) for h in hs]
    slope = np.polyfit(np.log(hs), np.log(err), 1)[0]
    assert abs(slope - 2.0) <= 0.5


def test_kernel_identities():
    pts = np.array([[0.1, 0.3], [-0.4, 0.2], [0.0, -0.5]])
    kj_log = kernel_jet("log-charge", SOURCE, pts, 4)
    assert np.abs(jet_laplacian(kj_log).value).max() < 1e-13
    g11 = kernel_jet("stokeslet-velocity", SOURCE, pts, 4, 1, 1)
    g21 = kernel_jet("stokeslet-velocity", SOURCE, pts, 4, 2, 1)
    p1 = kernel_jet("stokeslet-pressure", SOURCE, pts, 4, 1, 1)
    # column 1 of the Stokeslet is divergence free and balances its pressure
    div = jet_diff(g11, "x").value + jet_diff(g21, "y").value
    assert np.abs(div).max() < 1e-13
    mom = -jet_laplacian(g11).value + p1.derivative(1, 0)
    assert np.abs(mom).max() < 1e-12


def test_evaluate_reproduces_polynomial():
    p = Poly.from_terms([(2, 1, 1.0), (0, 3, -2.0)])
    j = Jet.from_poly(p, BASE, 3)
    h = np.array([[0.3, -0.1]])
    assert j.evaluate(h)[0] == pytest.approx(p(*(BASE[0] + h[0])))


_coef = st.floats(-2, 2, allow_nan=False, allow_infinity=False)


def _jet(cs):
    c = np.zeros((1, 4, 4))
    k = 0
    for a in range(4):
        for b in range(4 - a):
            c[0, a, b] = cs[k]
            k += 1
    return Jet(np.zeros((1, 2)), c)


@settings(max_examples=40, deadline=None)
@given(st.lists(_coef, min_size=10, max_size=10), st.lists(_coef, min_size=10, max_size=10),
       st.lists(_coef, min_size=10, max_size=10))
def test_multiplication_ring_laws(a, b, c):
    A, B, C = _jet(a), _jet(b), _jet(c)
    assert np.allclose(jet_mul(A, B).coeffs, jet_mul(B, A).coeffs, atol=1e-12)
    assert np.allclose(jet_mul(jet_mul(A, B), C).coeffs, jet_mul(A, jet_mul(B, C)).coeffs, atol=1e-10)
    assert np.allclose(jet_mul(A, B + C).coeffs, (jet_mul(A, B) + jet_mul(A, C)).coeffs, atol=1e-11)


@settings(max_examples=30, deadline=None)
@given(st.lists(_coef, min_size=10, max_size=10), st.lists(_coef, min_size=10, max_size=10))
def test_leibniz_rule_for_truncated_jets(a, b):
    A, B = _jet(a), _jet(b)
    lhs = jet_diff(jet_mul(A, B), "x")
    rhs = jet_mul(jet_diff(A, "x"), B.truncate(2)) + jet_mul(A.truncate(2), jet_diff(B, "x"))
    assert np.allclose(lhs.coeffs, rhs.coeffs, atol=1e-11)
