import numpy as np
import pytest
from numpy.polynomial import Chebyshev, Hermite, Legendre
from network.basis_registry import BasisKind, basis_registry
from network.polybasis import eval_basis, eval_basis_array
from utils.errors import BasisDomainError, ConfigError


def lucas_binet(r, x):
    root = np.sqrt(x * x + 4.0)
    return ((x + root) / 2.0) ** r + ((x - root) / 2.0) ** r


@pytest.mark.parametrize(
    "kind, degree, x, expected",
    [
        (BasisKind.LUCAS, 1, 0.7, [2.0, 0.7]),
        (BasisKind.LUCAS, 4, 2.0, [2.0, 2.0, 6.0, 14.0, 34.0]),
        (BasisKind.LUCAS, 4, 1.0, [2.0, 1.0, 3.0, 4.0, 7.0]),
        (BasisKind.CHEBYSHEV, 3, 0.5, [1.0, 0.5, -0.5, -1.0]),
    ],
)
def test_known_values(kind, degree, x, expected):
    result = eval_basis(kind, degree, x)
    assert result.values.shape == (degree + 1,)
    np.testing.assert_allclose(result.values, expected, rtol=0, atol=1e-12)


def test_lucas_numbers_exact():
    values = eval_basis('lucas', 6, 1.0).values
    assert values.tolist() == [2.0, 1.0, 3.0, 4.0, 7.0, 11.0, 18.0]


def test_lucas_matches_binet_closed_form():
    grid = np.linspace(-2.0, 2.0, 401)
    values, _ = eval_basis_array(BasisKind.LUCAS, 10, grid)
    for r in range(11):
        assert np.max(np.abs(values[:, r] - lucas_binet(r, grid))) <= 1e-9


def test_chebyshev_cosine_identity():
    theta = np.linspace(0.0, np.pi, 57)
    values, _ = eval_basis_array(BasisKind.CHEBYSHEV, 8, np.cos(theta))
    for r in range(9):
        np.testing.assert_allclose(values[:, r], np.cos(r * theta), atol=1e-12)


@pytest.mark.parametrize(
    "kind, family",
    [(BasisKind.CHEBYSHEV, Chebyshev), (BasisKind.LEGENDRE, Legendre), (BasisKind.HERMITE, Hermite)],
)
def test_classical_families_against_numpy(kind, family):
    x = np.linspace(-1.0, 1.0, 41)
    values, derivs = eval_basis_array(kind, 6, x)
    for r in range(7):
        reference = family.basis(r)
        np.testing.assert_allclose(values[:, r], reference(x), rtol=1e-12, atol=1e-10)
        np.testing.assert_allclose(derivs[:, r], reference.deriv()(x), rtol=1e-11, atol=1e-9)


@pytest.mark.parametrize("kind", list(BasisKind))
def test_derivatives_match_central_differences(kind):
    x = np.linspace(-1.0, 1.0, 21)
    h = 1e-6
    _, derivs = eval_basis_array(kind, 8, x)
    plus, _ = eval_basis_array(kind, 8, x + h)
    minus, _ = eval_basis_array(kind, 8, x - h)
    numeric = (plus - minus) / (2 * h)
    scale = np.maximum(np.abs(numeric), 1.0)
    assert np.max(np.abs(derivs - numeric) / scale) <= 1e-6


def test_lucas_derivative_recurrence():
    x = 0.3
    result = eval_basis('lucas', 6, x)
    v, d = result.values, result.derivs
    assert d[0] == 0.0
    assert d[1] == 1.0
    for r in range(2, 7):
        assert d[r] == pytest.approx(v[r - 1] + x * d[r - 1] + d[r - 2], abs=1e-12)


@pytest.mark.parametrize("kind", [BasisKind.LUCAS, BasisKind.CHEBYSHEV])
def test_parity(kind):
    x = np.linspace(0.0, 2.0, 31)
    pos, _ = eval_basis_array(kind, 10, x)
    neg, _ = eval_basis_array(kind, 10, -x)
    signs = (-1.0) ** np.arange(11)
    np.testing.assert_allclose(neg, pos * signs, atol=1e-12)


def test_degree_zero():
    result = eval_basis('lucas', 0, 0.25)
    assert result.values.tolist() == [2.0]
    assert result.derivs.tolist() == [0.0]


def test_array_shapes():
    x = np.zeros((3, 5, 2))
    values, derivs = eval_basis_array('hermite', 4, x)
    assert values.shape == (3, 5, 2, 5)
    assert derivs.shape == (3, 5, 2, 5)


@pytest.mark.parametrize("bad", [float('nan'), float('inf'), -float('inf')])
def test_rejects_non_finite_input(bad):
    with pytest.raises(BasisDomainError):
        eval_basis('lucas', 3, bad)
    with pytest.raises(BasisDomainError):
        eval_basis_array('lucas', 3, np.array([0.0, bad]))


def test_rejects_negative_degree():
    with pytest.raises(BasisDomainError):
        eval_basis('chebyshev', -1, 0.5)


def test_basis_kind_parsing():
    assert BasisKind.parse('Lucas') is BasisKind.LUCAS
    assert BasisKind.HERMITE.value == 'hermite'
    with pytest.raises(ConfigError):
        BasisKind.parse('bspline')


def test_registry_holds_all_families():
    assert set(basis_registry.kinds()) == set(BasisKind)
    assert basis_registry.get('lucas').p0 == 2.0
