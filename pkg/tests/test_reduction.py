import numpy as np
import pytest
import sympy as sp

from dirac.catalog import OSCILLATOR_INTERVAL, example, free_spinor, oscillator_bound
from dirac.core import X, SymbolicField, constant_field
from dirac.darboux import UPPER, pseudoscalar_step
from dirac.exceptions import MissingStepData
from dirac.reduction import (
    component_residual,
    diagram_potentials,
    pseudoscalar_to_schrodinger,
    scalar_component_residual,
    scalar_to_schrodinger,
    schrodinger_susy_step,
    susy_diagram_check,
)


@pytest.fixture
def oscillator_grid():
    return np.linspace(OSCILLATOR_INTERVAL[0], OSCILLATOR_INTERVAL[1], 201)


def test_pair_of_the_oscillator():
    pair = pseudoscalar_to_schrodinger(SymbolicField(X / 2), 2.0)
    xs = np.linspace(-5.0, 5.0, 21)
    assert np.allclose(pair.U_plus(xs), xs ** 2 / 4 + 0.5, atol=1e-12)
    assert np.allclose(pair.U_minus(xs), xs ** 2 / 4 - 0.5, atol=1e-12)
    assert pair.energy(3.0) == pytest.approx(5.0)


def test_schrodinger_step_of_a_gaussian():
    U = SymbolicField(X ** 2)
    stepped = schrodinger_susy_step(U, SymbolicField(sp.exp(-X ** 2 / 2)))
    xs = np.linspace(-3.0, 3.0, 13)
    assert np.allclose(stepped(xs), xs ** 2 + 2.0, atol=1e-12)


@pytest.mark.parametrize("name", ["ex6", "ex7", "ex8"])
def test_diagram_commutes_for_oscillator_steps(name, oscillator_grid):
    bundle = example(name)
    reports = susy_diagram_check(bundle.step, oscillator_grid, 1e-8, name)
    assert len(reports) == 4
    assert all(r.passed for r in reports), [r.line() for r in reports]


def test_diagram_commutes_for_the_one_soliton_step(free_seed, line_grid):
    step = pseudoscalar_step(free_seed, free_spinor(free_seed, "cosh", 0.5), UPPER)
    reports = susy_diagram_check(step, line_grid, 1e-8, "ex1")
    assert all(r.passed for r in reports), [r.line() for r in reports]
    base, moved = diagram_potentials(step)
    k = np.sqrt(0.75)
    # U1 minus, shifted by l2^2 - m^2, is the Poschl-Teller well
    expected = k ** 2 - 2 * k ** 2 / np.cosh(k * line_grid) ** 2 + (0.25 - 1.0)
    assert np.allclose(moved.U_minus(line_grid), expected, atol=1e-10)
    assert np.allclose(base.U_plus(line_grid), 0.0)


def test_transformed_components_solve_the_shifted_problem(oscillator_grid):
    bundle = example("ex6")
    step = bundle.step
    for psi in (oscillator_bound(bundle.seed, 1, 1), oscillator_bound(bundle.seed, 2, -1)):
        phi = step.map(psi)
        scale = 1.0 + np.max(np.abs(phi(oscillator_grid)))
        assert np.max(component_residual(step, phi, oscillator_grid)) <= 1e-7 * scale


def test_scalar_components_solve_the_pair():
    bundle = example("ex9")
    step = bundle.step
    xs = np.linspace(-8.0, 8.0, 81)
    seed_pair = scalar_to_schrodinger(constant_field(0.0), 1.0)
    moved_pair = scalar_to_schrodinger(step.S, 1.0)
    for psi in bundle.test_spinors:
        assert np.max(scalar_component_residual(seed_pair, psi, xs)) <= 1e-9 * (1.0 + np.max(np.abs(psi(xs))))
        phi = step.map(psi)
        scale = 1.0 + np.max(np.abs(phi(xs)))
        assert np.max(scalar_component_residual(moved_pair, phi, xs)) <= 1e-7 * scale


def test_diagram_needs_a_step(line_grid):
    with pytest.raises(MissingStepData):
        susy_diagram_check(None, line_grid)
