import numpy as np
import pytest
import sympy as sp

from dirac.catalog import (
    coulomb_spinor,
    example,
    free_spinor,
    hat_free_spinor,
    oscillator_bound,
    oscillator_growing,
    radial_kappa1_spinor,
    radial_seed_spinor,
)
from dirac.core import X, fd_derivative
from dirac.exceptions import OrderUnavailable
from dirac.potential import (
    dirac_oscillator,
    free_mass,
    radial_free,
    radial_mass,
    scalar_coulomb,
    scalar_free,
)
from dirac.spinor import (
    closed_form_spinor,
    dirac_residual,
    hat_spinor,
    linear_combination,
    second_solution,
    sigma3_mirror,
    spinor_derivative,
    wronskian,
    zero_on,
)


def test_free_spinors_solve_the_seed(free_seed, line_grid):
    for kind, energy in (("cosh", 0.5), ("sinh", -0.4), ("decay", 0.2), ("grow", 0.9)):
        psi = free_spinor(free_seed, kind, energy)
        assert np.max(dirac_residual(psi, line_grid) / (1.0 + np.linalg.norm(psi(line_grid), axis=-1))) <= 1e-8
    for energy in (1.0, -1.0):
        assert np.max(dirac_residual(free_spinor(free_seed, "kernel", energy), line_grid)) <= 1e-14


def test_oscillator_bound_states_solve_the_seed(oscillator_seed):
    xs = np.linspace(-6.0, 6.0, 121)
    for n, sign in ((1, 1), (2, -1), (3, 1)):
        psi = oscillator_bound(oscillator_seed, n, sign)
        assert np.max(dirac_residual(psi, xs)) <= 1e-10


def test_recurrence_derivative_matches_finite_differences(free_seed):
    psi = free_spinor(free_seed, "cosh", 0.3)
    for x in (-2.0, 0.4, 3.5):
        exact = spinor_derivative(psi, 1, x)
        for i in range(2):
            estimate = fd_derivative(lambda t: psi(t)[i], x, 1)
            assert abs(exact[i] - estimate) <= 1e-6 * (1.0 + abs(exact[i]))


def test_recurrence_agrees_with_closed_form_jet():
    V = radial_free(1.0, 1.0)
    psi = radial_kappa1_spinor(V, "phi", 0.4)
    rs = np.linspace(0.2, 6.0, 40)
    assert np.allclose(psi.jet(rs, 3), psi.own_jet(rs, 3), rtol=1e-9, atol=1e-9)


def _free_pair(kinds, energy):
    V = free_mass(1.0)
    return free_spinor(V, kinds[0], energy), free_spinor(V, kinds[1], energy), np.linspace(-5.0, 5.0, 100)


def _radial_pair(builder, V, kinds, energy=0.0):
    return builder(V, kinds[0], energy), builder(V, kinds[1], energy), np.linspace(0.1, 8.0, 80)


def _oscillator_erf_pair():
    bundle = example("ex8")
    return (oscillator_growing(bundle.seed, 1, 1), bundle.transforms[0].u2,
            np.linspace(-4.0, 4.0, 81))


def _oscillator_bound_pair():
    psi = oscillator_bound(dirac_oscillator(2.0), 1, 1)
    return psi, second_solution(psi, interval=(-4.0, 4.0)), np.linspace(-3.5, 3.5, 29)


def _coulomb_pair():
    psi = coulomb_spinor(scalar_coulomb(1.0, 1.0), 1)
    # second component changes sign at r = 2
    return psi, second_solution(psi, interval=(0.2, 1.5)), np.linspace(0.25, 1.4, 24)


def _hat_pair():
    V = scalar_free(1.0)
    k = sp.sqrt(sp.Rational(3, 4))
    a = hat_free_spinor(V, sp.cosh(k * X), 0.5, "cosh^")
    b = hat_free_spinor(V, sp.sinh(k * X), 0.5, "sinh^")
    return a, b, np.linspace(-5.0, 5.0, 60)


@pytest.mark.parametrize("make_pair", [
    lambda: _free_pair(("cosh", "sinh"), 0.6),
    lambda: _free_pair(("decay", "grow"), -0.3),
    lambda: _radial_pair(radial_seed_spinor, radial_mass(1.0), ("psi_m", "psi_tilde_m")),
    lambda: _radial_pair(radial_seed_spinor, radial_mass(1.0), ("psi_minus_m", "psi_tilde_minus_m")),
    lambda: _radial_pair(radial_seed_spinor, radial_mass(1.0), ("psi", "psi_tilde"), 0.4),
    lambda: _radial_pair(radial_kappa1_spinor, radial_free(1.0, 1.0), ("phi", "phi_tilde"), 0.4),
    lambda: _radial_pair(radial_kappa1_spinor, radial_free(1.0, 1.0), ("phi_m", "phi_tilde_m")),
    lambda: _radial_pair(radial_kappa1_spinor, radial_free(1.0, 1.0),
                         ("phi_minus_m", "phi_tilde_minus_m")),
    _oscillator_erf_pair,
    _oscillator_bound_pair,
    _coulomb_pair,
    _hat_pair,
], ids=["free_cosh_sinh", "free_decay_grow", "radial_at_m", "radial_at_minus_m", "radial_inside_gap",
        "kappa1_inside_gap", "kappa1_at_m", "kappa1_at_minus_m", "oscillator_erf",
        "oscillator_second_solution", "scalar_coulomb", "hat_free"])
def test_wronskian_is_constant_for_same_energy(make_pair):
    a, b, xs = make_pair()
    assert a.energy == pytest.approx(b.energy, abs=1e-12)
    w = wronskian(a, b, xs)
    assert abs(w[0]) > 1e-6
    assert np.max(np.abs(w - w[0])) <= 1e-8 * (1.0 + abs(w[0]))


def test_second_solution_has_unit_wronskian(free_seed):
    psi = free_spinor(free_seed, "decay", 0.5)
    partner = second_solution(psi, interval=(-5.0, 5.0))
    xs = np.linspace(-4.5, 4.5, 25)
    assert np.allclose(wronskian(partner, psi, xs), 1.0, atol=1e-6)
    assert np.max(dirac_residual(partner, xs) / (1.0 + np.linalg.norm(partner(xs), axis=-1))) <= 1e-6


def test_second_solution_falls_back_to_second_component(free_seed):
    # first component c*sinh(kx) vanishes at the origin
    psi = free_spinor(free_seed, "cosh", 0.5)
    partner = second_solution(psi, interval=(-4.0, 4.0))
    xs = np.linspace(-3.5, 3.5, 15)
    assert np.allclose(wronskian(partner, psi, xs), 1.0, atol=1e-6)


def test_order_cap_is_enforced(free_seed):
    psi = free_spinor(free_seed, "cosh", 0.5)
    with pytest.raises(OrderUnavailable):
        psi.jet(np.array([0.0]), psi.max_order + 1)


def test_hat_spinor_and_mirror(free_seed):
    psi = free_spinor(free_seed, "cosh", 0.5)
    hat = hat_spinor(psi)
    xs = np.linspace(-3.0, 3.0, 31)
    assert hat.parent.is_hat
    assert np.max(dirac_residual(hat, xs)) <= 1e-10
    mirror = sigma3_mirror(hat_spinor(free_spinor(free_seed, "decay", 0.5)))
    assert mirror.energy == -0.5
    assert np.max(dirac_residual(mirror, xs)) <= 1e-10


def test_linear_combination_and_zero_component(free_seed):
    xs = np.linspace(-2.0, 2.0, 11)
    a, b = free_spinor(free_seed, "cosh", 0.5), free_spinor(free_seed, "sinh", 0.5)
    combo = linear_combination([(2.0, a), (-1.0, b)])
    assert np.allclose(combo(xs), 2.0 * a(xs) - b(xs))
    with pytest.raises(ValueError):
        linear_combination([(1.0, a), (1.0, free_spinor(free_seed, "cosh", 0.4))])
    kernel = closed_form_spinor(sp.Integer(1), sp.Integer(0) * X, 1.0, free_seed)
    assert zero_on(kernel, 1, xs)
    assert not zero_on(kernel, 0, xs)
