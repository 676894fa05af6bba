import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import assume, given, settings, strategies as st
from numpy.polynomial import hermite_e
from scipy import special

from dirac.core import (
    GAMMA,
    IDENTITY,
    X,
    SymbolicField,
    fd_derivative,
    find_nodes,
    jet_inverse,
    jet_log_derivative,
    jet_product,
    kn_poly,
    laguerre,
    mat2_inverse,
    quad,
    sylvester_residual,
    working_interval,
)
from dirac.exceptions import OrderUnavailable, OutOfDomain, SingularMatrix

entries = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)


def test_inverse_of_known_matrix():
    result = mat2_inverse(np.array([[1.0, 2.0], [3.0, 4.0]]))
    assert np.allclose(result, [[-2.0, 1.0], [1.5, -0.5]], atol=1e-14)


def test_inverse_rejects_singular_matrix():
    with pytest.raises(SingularMatrix):
        mat2_inverse(np.array([[1.0, 2.0], [2.0, 4.0]]))


@given(entries, entries, entries, entries)
@settings(max_examples=300)
def test_inverse_multiplies_back_to_identity(a, b, c, d):
    m = np.array([[a, b], [c, d]])
    assume(abs(a * d - b * c) > 1e-2)
    assert np.allclose(m @ mat2_inverse(m), IDENTITY, atol=1e-9)


def test_gamma_convention():
    assert np.array_equal(GAMMA @ GAMMA, -IDENTITY)
    assert np.array_equal(GAMMA.T, -GAMMA)


def test_jet_inverse_keeps_leibniz_identity():
    x = np.linspace(-2.0, 2.0, 9)
    fields = [[SymbolicField(2 + X ** 2), SymbolicField(sp.sin(X))],
              [SymbolicField(sp.cos(X)), SymbolicField(3 + sp.exp(X / 3))]]
    m = np.stack([np.stack([f.jet(x, 3) for f in row], axis=-1) for row in fields], axis=-2)
    product = jet_product(m, jet_inverse(m), np.matmul)
    assert np.allclose(product[0], IDENTITY, atol=1e-12)
    assert np.max(np.abs(product[1:])) < 1e-11


def test_log_derivative_jet_of_cosh():
    x = np.linspace(-3.0, 3.0, 13)
    f = SymbolicField(sp.cosh(2 * X)).jet(x, 3)
    log = jet_log_derivative(f)
    assert np.allclose(log[0], 2 * np.tanh(2 * x), atol=1e-13)
    assert np.allclose(log[1], 4 / np.cosh(2 * x) ** 2, atol=1e-12)


def test_kn_poly_recurrence_values():
    assert kn_poly(0, 0.3) == 1
    assert kn_poly(2, 0.0) == 1.0
    assert kn_poly(3, 1.0) == pytest.approx(4.0)


@given(st.integers(min_value=0, max_value=9),
       st.floats(min_value=-4, max_value=4, allow_nan=False, allow_infinity=False))
@settings(max_examples=200)
def test_kn_poly_matches_rotated_hermite(n, x):
    coefficients = [0] * n + [1]
    expected = ((-1j) ** n * hermite_e.hermeval(1j * x, coefficients)).real
    assert kn_poly(n, x) == pytest.approx(expected, rel=1e-10, abs=1e-10)
    assert kn_poly(n, -x) == pytest.approx((-1) ** n * kn_poly(n, x), rel=1e-12, abs=1e-12)


def test_kn_poly_rejects_negative_order():
    with pytest.raises(ValueError):
        kn_poly(-1, 0.0)


def test_laguerre_explicit_polynomial():
    assert laguerre(2, 1, 2.0) == pytest.approx(-1.0)


@given(st.integers(min_value=0, max_value=8),
       st.floats(min_value=0.5, max_value=4, allow_nan=False, allow_infinity=False),
       st.floats(min_value=0, max_value=10, allow_nan=False, allow_infinity=False))
@settings(max_examples=200)
def test_laguerre_matches_scipy(n, a, x):
    assert laguerre(n, a, x) == pytest.approx(special.eval_genlaguerre(n, a, x), rel=1e-9, abs=1e-9)


def test_fd_derivative_reference_values():
    assert fd_derivative(lambda t: t * t, 1.0, 1) == pytest.approx(2.0, abs=1e-7)
    assert fd_derivative(lambda t: 3.0, 0.4, 1) == pytest.approx(0.0, abs=1e-9)
    assert fd_derivative(math.sin, 0.0, 2) == pytest.approx(0.0, abs=1e-5)


def test_fd_derivative_errors():
    with pytest.raises(OrderUnavailable):
        fd_derivative(math.sin, 0.0, 3)
    field = SymbolicField(1 / X, domain=(0.1, np.inf))
    with pytest.raises(OutOfDomain):
        fd_derivative(field, 0.1, 1)


@given(st.floats(min_value=-3, max_value=3, allow_nan=False, allow_infinity=False))
@settings(max_examples=50, deadline=None)
def test_symbolic_derivatives_agree_with_finite_differences(x):
    field = SymbolicField(sp.tanh(X) * sp.exp(-X ** 2 / 5))
    exact = field.derivative(x, 1)
    estimate = fd_derivative(field, x, 1)
    assert abs(exact - estimate) <= 1e-6 * (1.0 + abs(exact))


def test_quad_gaussian_and_reversed_interval():
    value = quad(lambda t: math.exp(-t * t), -10.0, 10.0)
    assert value == pytest.approx(math.sqrt(math.pi), rel=1e-10)
    assert quad(lambda t: math.exp(-t * t), 10.0, -10.0) == pytest.approx(-value)
    assert quad(math.cos, 1.0, 1.0) == 0.0


@pytest.mark.parametrize("size", [3, 4, 5, 6])
def test_sylvester_identity_on_random_matrices(size):
    rng = np.random.default_rng(size)
    y = rng.normal(size=(size, size))
    for l in range(1, size - 1):
        for j in range(l + 1, size + 1):
            for k in range(l + 1, size + 1):
                gap, scale = sylvester_residual(y, l, j, k)
                assert abs(gap) <= 1e-9 * scale


def test_find_nodes_of_sine():
    nodes = find_nodes(np.sin, (0.5, 7.0))
    assert nodes == pytest.approx([math.pi, 2 * math.pi], abs=1e-9)
    assert find_nodes(np.cosh, (-5.0, 5.0)) == []


def test_find_nodes_sees_zeros_without_a_sign_change():
    def touching(x):
        return (x - 0.3) ** 2 * (2.0 + np.cos(x))

    assert find_nodes(touching, (-1.0, 1.0)) == []
    assert find_nodes(touching, (-1.0, 1.0), touches=True) == pytest.approx([0.3], abs=1e-6)
    assert find_nodes(lambda x: (x - 0.3) ** 2 + 1e-3, (-1.0, 1.0), touches=True) == []
    assert find_nodes(np.cosh, (-5.0, 5.0), touches=True) == []


def test_working_interval_on_half_line():
    assert working_interval((0.1, np.inf), 5.0) == pytest.approx((0.1, 10.1))
    assert working_interval((-np.inf, np.inf), 5.0) == (-5.0, 5.0)
