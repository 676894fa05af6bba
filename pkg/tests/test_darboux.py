import numpy as np
import pytest
import sympy as sp

from dirac.catalog import free_spinor, oscillator_bound, oscillator_growing
from dirac.core import X
from dirac.darboux import (
    LOWER,
    UPPER,
    TransformFunction,
    apply_adjoint,
    apply_forward,
    build_transform,
    complementary_spinors,
    forward_by_derivative,
    kernel_spinor,
    antisymmetry_residual,
    level_lookup,
    matrix_dirac_residual,
    potential_by_log_derivative,
    pseudoscalar_step,
    scalar_step,
)
from dirac.exceptions import (
    DarbouxError,
    DegenerateOnGrid,
    EqualEigenvalues,
    InvalidTransformFunction,
    NodeInLog,
    ParameterOutOfRegularRange,
    RouteMismatch,
    WrongBranch,
)
from dirac.potential import dirac_oscillator, free_mass, scalar_free
from dirac.spinor import closed_form_spinor, dirac_residual, zero_on


def _relative(a, b):
    return np.max(np.abs(a - b) / (1.0 + np.abs(b)))


@pytest.fixture
def soliton_transform(free_seed):
    return build_transform(free_spinor(free_seed, "kernel", 1.0, "u1"),
                           free_spinor(free_seed, "cosh", 0.5, "u2"), (-10.0, 10.0))


def test_one_soliton_potential(soliton_transform, line_grid):
    V1 = soliton_transform.transformed
    k = np.sqrt(0.75)
    assert np.max(np.abs(V1.p(line_grid) + 0.5)) <= 1e-12
    assert np.max(np.abs(V1.q(line_grid) - k * np.tanh(k * line_grid))) <= 1e-10
    assert V1.is_pseudoscalar
    assert V1.mass == pytest.approx(-0.5)


def test_both_routes_to_the_partner_potential(soliton_transform, line_grid):
    p_log, q_log = potential_by_log_derivative(soliton_transform, line_grid)
    assert _relative(p_log, soliton_transform.transformed.p(line_grid)) <= 1e-9
    assert _relative(q_log, soliton_transform.transformed.q(line_grid)) <= 1e-9


def test_transformation_matrix_relations(soliton_transform, line_grid):
    assert np.max(matrix_dirac_residual(soliton_transform, line_grid)) <= 1e-8
    assert np.max(antisymmetry_residual(soliton_transform, line_grid)) <= 1e-8


def test_both_forms_of_the_forward_map(soliton_transform, plane_spinors, line_grid):
    for psi in plane_spinors:
        algebraic = apply_forward(soliton_transform, psi)(line_grid)
        differential = forward_by_derivative(soliton_transform, psi, line_grid)
        scale = 1.0 + np.linalg.norm(algebraic, axis=-1)
        assert np.max(np.linalg.norm(algebraic - differential, axis=-1) / scale) <= 1e-9


def test_mapped_spinors_solve_the_partner(soliton_transform, plane_spinors, line_grid):
    for psi in plane_spinors:
        phi = apply_forward(soliton_transform, psi)
        scale = 1.0 + np.linalg.norm(phi(line_grid), axis=-1)
        assert np.max(dirac_residual(phi, line_grid) / scale) <= 1e-8


def test_adjoint_after_forward_scales_by_level_product(soliton_transform, plane_spinors, line_grid):
    l1, l2 = soliton_transform.lambdas
    for psi in plane_spinors:
        back = apply_adjoint(soliton_transform, apply_forward(soliton_transform, psi))(line_grid)
        expected = (psi.energy - l1) * (psi.energy - l2) * psi(line_grid)
        scale = 1.0 + np.linalg.norm(expected, axis=-1)
        assert np.max(np.linalg.norm(back - expected, axis=-1) / scale) <= 1e-8


def test_partner_matrix_regenerates_the_seed(soliton_transform, line_grid):
    partner = soliton_transform.partner
    assert partner.lambdas == soliton_transform.lambdas
    assert np.max(matrix_dirac_residual(partner, line_grid)) <= 1e-8
    assert np.max(np.abs(partner.transformed.p(line_grid) - 1.0)) <= 1e-8
    assert np.max(np.abs(partner.transformed.q(line_grid))) <= 1e-8


def test_complementary_spinors_map_onto_partner_columns(soliton_transform):
    xs = np.linspace(-4.0, 4.0, 17)
    l1, l2 = soliton_transform.lambdas
    partner = soliton_transform.partner
    for u_tilde, v in zip(complementary_spinors(soliton_transform), (partner.u1, partner.u2)):
        image = apply_forward(soliton_transform, u_tilde)(xs)
        expected = (l2 - l1) * v(xs)
        assert np.max(np.linalg.norm(image - expected, axis=-1)) <= 1e-6


def test_level_lookup_gives_a_partner_solution(soliton_transform, free_seed):
    xs = np.linspace(-3.0, 3.0, 13)
    image = level_lookup(soliton_transform, free_spinor(free_seed, "sinh", 0.5))
    assert image.energy == 0.5
    scale = 1.0 + np.linalg.norm(image(xs), axis=-1)
    assert np.max(dirac_residual(image, xs) / scale) <= 1e-5


def test_equal_eigenvalues_are_rejected(free_seed):
    with pytest.raises(EqualEigenvalues):
        build_transform(free_spinor(free_seed, "cosh", 0.5), free_spinor(free_seed, "sinh", 0.5))


def test_vanishing_determinant_is_rejected_unless_allowed(free_seed):
    u1, u2 = free_spinor(free_seed, "kernel", 1.0), free_spinor(free_seed, "sinh", 0.5)
    with pytest.raises(DegenerateOnGrid) as info:
        build_transform(u1, u2, (-5.0, 5.0))
    assert info.value.nodes == pytest.approx([0.0], abs=1e-9)
    T = build_transform(u1, u2, (-5.0, 5.0), allow_singular=True)
    assert T.nodes == pytest.approx([0.0], abs=1e-9)


def test_spinors_of_different_potentials_are_rejected(free_seed):
    other = free_mass(2.0)
    with pytest.raises(DarbouxError):
        build_transform(free_spinor(free_seed, "kernel", 1.0), free_spinor(other, "cosh", 0.5))


def test_pseudoscalar_step_matches_general_transform(free_seed, plane_spinors, line_grid):
    step = pseudoscalar_step(free_seed, free_spinor(free_seed, "cosh", 0.5), UPPER, interval=(-10.0, 10.0))
    k = np.sqrt(0.75)
    assert step.mass == pytest.approx(-0.5)
    assert np.max(np.abs(step.potential.q(line_grid) - k * np.tanh(k * line_grid))) <= 1e-10
    general = step.transform.transformed
    assert np.max(np.abs(general.q(line_grid) - step.potential.q(line_grid))) <= 1e-9
    for psi in plane_spinors:
        direct = step.map(psi)(line_grid)
        via_l = apply_forward(step.transform, psi)(line_grid)
        scale = 1.0 + np.linalg.norm(via_l, axis=-1)
        assert np.max(np.linalg.norm(direct - via_l, axis=-1) / scale) <= 1e-9


def test_oscillator_lower_branch_solution_map(oscillator_seed):
    xs = np.linspace(-6.0, 6.0, 121)
    step = pseudoscalar_step(oscillator_seed, oscillator_growing(oscillator_seed, 2, 1), LOWER,
                             interval=(-6.0, 6.0))
    assert step.mass == pytest.approx(np.sqrt(2.0))
    psi = oscillator_bound(oscillator_seed, 1, 1)
    phi = step.map(psi)
    scale = 1.0 + np.linalg.norm(phi(xs), axis=-1)
    assert np.max(dirac_residual(phi, xs) / scale) <= 1e-8


def test_kernel_spinor_of_the_oscillator(oscillator_seed):
    xs = np.linspace(-4.0, 4.0, 41)
    kernel = kernel_spinor(oscillator_seed, UPPER)
    assert kernel.energy == 2.0
    assert np.allclose(kernel(xs)[:, 0], np.exp(xs ** 2 / 4), rtol=1e-12)
    assert np.allclose(kernel(xs)[:, 1], 0.0)
    lower = kernel_spinor(oscillator_seed, LOWER)
    assert np.allclose(lower(xs)[:, 1], np.exp(-xs ** 2 / 4), rtol=1e-12)
    with pytest.raises(WrongBranch):
        kernel_spinor(oscillator_seed, "sideways")


def test_pseudoscalar_step_errors(free_seed):
    with pytest.raises(NodeInLog):
        pseudoscalar_step(free_seed, free_spinor(free_seed, "sinh", 0.5), UPPER)
    with pytest.raises(WrongBranch):
        pseudoscalar_step(scalar_free(1.0), free_spinor(free_seed, "cosh", 0.5))
    with pytest.raises(WrongBranch):
        pseudoscalar_step(free_seed, free_spinor(free_seed, "cosh", 0.5), "sideways")
    with pytest.raises(EqualEigenvalues):
        pseudoscalar_step(free_seed, free_spinor(free_seed, "kernel", 1.0), UPPER)


def test_scalar_step_requires_scalar_seed():
    V = dirac_oscillator(1.0)
    with pytest.raises(WrongBranch):
        scalar_step(V, kernel_spinor(V, UPPER))


# ----- validation of U and of the forward map -----

def test_columns_that_do_not_solve_the_seed_are_rejected(oscillator_seed):
    constant = closed_form_spinor(sp.Integer(1), sp.Integer(0) * X, 2.0, oscillator_seed, "(1, 0)")
    plane = closed_form_spinor(sp.sinh(X), sp.cosh(X), 0.5, oscillator_seed, "plane")
    with pytest.raises(InvalidTransformFunction) as info:
        build_transform(constant, plane, (-5.0, 5.0))
    assert info.value.residual > 1e-3
    assert -5.0 <= info.value.location <= 5.0


def test_free_builders_need_a_free_seed(oscillator_seed):
    with pytest.raises(ParameterOutOfRegularRange):
        free_spinor(oscillator_seed, "kernel", 2.0)
    with pytest.raises(ParameterOutOfRegularRange):
        free_spinor(oscillator_seed, "cosh", 0.5)


def test_oscillator_columns_pass_validation(oscillator_seed):
    T = build_transform(kernel_spinor(oscillator_seed, UPPER), oscillator_growing(oscillator_seed, 3, 1),
                        (-6.0, 6.0))
    xs = np.linspace(-6.0, 6.0, 61)
    scale = 1.0 + np.max(np.abs(T.matrix(xs)), axis=(-2, -1))
    assert np.max(matrix_dirac_residual(T, xs) / scale) <= 1e-8


def test_forward_map_of_a_non_solution_is_rejected(soliton_transform, free_seed):
    fake = closed_form_spinor(sp.cosh(X), sp.sinh(X), 0.5, free_seed, "not a solution")
    with pytest.raises(RouteMismatch) as info:
        apply_forward(soliton_transform, fake)
    assert info.value.gap > 1e-9


def test_determinant_touching_zero_is_a_node(free_seed, monkeypatch):
    u1, u2 = free_spinor(free_seed, "kernel", 1.0), free_spinor(free_seed, "cosh", 0.5)
    monkeypatch.setattr(TransformFunction, "determinant",
                        lambda self, x: (np.asarray(x) - 0.3) ** 2 * (2.0 + np.cos(x)))
    with pytest.raises(DegenerateOnGrid) as info:
        build_transform(u1, u2, (-5.0, 5.0))
    assert info.value.nodes == pytest.approx([0.3], abs=1e-6)


# ----- kernels of L and L+ -----

def test_forward_map_annihilates_the_columns(soliton_transform, line_grid):
    for u in (soliton_transform.u1, soliton_transform.u2):
        image = apply_forward(soliton_transform, u)(line_grid)
        scale = 1.0 + np.linalg.norm(u(line_grid), axis=-1)
        assert np.max(np.linalg.norm(image, axis=-1) / scale) <= 1e-10


def test_adjoint_map_annihilates_the_partner_columns(soliton_transform, line_grid):
    partner = soliton_transform.partner
    for v in (partner.u1, partner.u2):
        image = apply_adjoint(soliton_transform, v)(line_grid)
        scale = 1.0 + np.linalg.norm(v(line_grid), axis=-1)
        assert np.max(np.linalg.norm(image, axis=-1) / scale) <= 1e-10


def test_kernels_are_two_dimensional(soliton_transform, line_grid):
    # both columns are annihilated and stay independent everywhere
    assert np.min(np.abs(soliton_transform.determinant(line_grid))) > 0.5
    assert np.min(np.abs(soliton_transform.partner.determinant(line_grid))) > 1e-6
    # a second solution at l1 is not in the kernel
    u_tilde = complementary_spinors(soliton_transform)[0]
    xs = np.linspace(-4.0, 4.0, 17)
    assert np.min(np.linalg.norm(apply_forward(soliton_transform, u_tilde)(xs), axis=-1)) > 1e-3


# ----- pseudoscalar kernel structure -----

@pytest.mark.parametrize("branch, kind, off_slot", [(UPPER, "cosh", 1), (LOWER, "sinh", 0)])
def test_pseudoscalar_step_keeps_one_component_of_each_kernel(free_seed, line_grid, branch, kind,
                                                              off_slot):
    step = pseudoscalar_step(free_seed, free_spinor(free_seed, kind, 0.5), branch, interval=(-10.0, 10.0))
    assert zero_on(step.kernel, off_slot, line_grid)
    assert not zero_on(step.kernel, 1 - off_slot, line_grid)
    assert zero_on(step.transform.u1, off_slot, line_grid)
    # the partner column at the second level vanishes in the other slot
    assert zero_on(step.transform.partner.u2, 1 - off_slot, line_grid)
    assert not zero_on(step.transform.partner.u2, off_slot, line_grid)


@pytest.mark.parametrize("branch, off_slot", [(UPPER, 1), (LOWER, 0)])
def test_oscillator_kernel_components(oscillator_seed, branch, off_slot):
    xs = np.linspace(-6.0, 6.0, 61)
    kernel = kernel_spinor(oscillator_seed, branch)
    assert zero_on(kernel, off_slot, xs)
    assert np.min(np.abs(kernel(xs)[:, 1 - off_slot])) > 0.0
