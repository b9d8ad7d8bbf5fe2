import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anadiv import Poly, apply_word, build_family, commutator_with_gradient, commutator_with_laplacian, make_domain
from anadiv.fields import all_words
from anadiv.jet import Jet

DOMAINS = ["disk", "ellipse(2,1)", "perturbed-disk(0.1,3)"]
PTS = np.array([[0.1, 0.2], [-0.3, 0.4], [0.5, -0.1]])


@pytest.fixture(scope="module", params=DOMAINS)
def family(request):
    return build_family(make_domain(request.param))


def test_tangency_on_boundary(family):
    b = family.domain.boundary_trace(256)
    assert np.abs(family.tangency_residual(b)).max() <= 1e-10


def test_representation_identity(family):
    q = family.domain.volume_quadrature(16, 96)
    assert np.abs(family.representation_residual(q.points)).max() <= 1e-12


def test_D_positive_on_ellipse():
    fam = build_family(make_domain("ellipse(2,1)"))
    q = fam.domain.volume_quadrature(16, 96)
    assert fam.D.eval_points(q.points).min() > 1e-3


def _jet(poly, order=6, pts=PTS):
    return Jet.from_poly(poly, pts, order)


def test_word_examples_on_disk(disk):
    fam = build_family(disk)
    x = Poly.from_terms([(1, 0, 1.0)])
    xx = Poly.from_terms([(2, 0, 1.0)])
    px, py = PTS[:, 0], PTS[:, 1]
    assert np.allclose(apply_word(fam, (3,), _jet(x)).value, py)
    assert np.allclose(apply_word(fam, (3, 3), _jet(x)).value, -px)
    assert np.allclose(apply_word(fam, (1,), _jet(xx)).value, px - px**3 - px * py**2)


def test_word_matches_polynomial_application(ellipse):
    fam = build_family(ellipse)
    u = Poly.from_terms([(3, 1, 1.0), (0, 2, -0.5), (1, 0, 2.0)])
    for word in [(1, 2), (3, 1, 2), (2, 3, 3)]:
        p = u
        for letter in reversed(word):
            p = fam.field(letter).apply_poly(p)
        jet = apply_word(fam, word, _jet(u))
        assert np.allclose(jet.value, p.eval_points(PTS), atol=1e-12)


def test_commutator_examples_on_disk(disk):
    fam = build_family(disk)
    c = commutator_with_laplacian(fam, (1,), _jet(Poly.from_terms([(2, 0, 1.0)])))
    assert np.allclose(c.value, 8 * PTS[:, 0], atol=1e-12)
    c = commutator_with_laplacian(fam, (3,), _jet(Poly.from_terms([(4, 1, 1.0)])))
    assert np.abs(c.value).max() < 1e-12
    gx, gy = commutator_with_gradient(fam, (3,), _jet(Poly.from_terms([(1, 0, 1.0)])))
    assert np.allclose(gx.value, 0.0) and np.allclose(gy.value, -1.0)


def test_all_words_order():
    assert list(all_words(0)) == [()]
    words = list(all_words(2))
    assert len(words) == 9 and words[0] == (1, 1) and words[-1] == (3, 3)


_coef = st.floats(-1, 1, allow_nan=False, allow_infinity=False)


@settings(max_examples=25, deadline=None)
@given(st.lists(_coef, min_size=6, max_size=6), st.lists(_coef, min_size=6, max_size=6), _coef)
def test_word_action_is_linear(a, b, s):
    fam = build_family(make_domain("ellipse(2,1)"))
    mons = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    u = Poly.from_terms([(i, j, c) for (i, j), c in zip(mons, a)])
    v = Poly.from_terms([(i, j, c) for (i, j), c in zip(mons, b)])
    w = (2, 3)
    lhs = apply_word(fam, w, _jet(u + v * s, 4))
    rhs = apply_word(fam, w, _jet(u, 4)) + apply_word(fam, w, _jet(v, 4)).scale(s)
    assert np.allclose(lhs.coeffs, rhs.coeffs, atol=1e-12)
