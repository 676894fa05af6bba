import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from dirac.catalog import example, free_spinor
from dirac.darboux import apply_adjoint, apply_forward, build_transform
from dirac.core import X
from dirac.exceptions import NonPositiveNormalization
from dirac.spinor import SpinorField
from dirac.verify import (
    INDETERMINATE,
    INTEGRABLE,
    NON_INTEGRABLE,
    decay_classify,
    default_grid,
    discrete_levels,
    factorization_residual,
    intertwining_residual,
    norm_preservation,
    summarize,
    superalgebra_residuals,
    trace_identity_residual,
)

matrices = arrays(np.float64, (2, 2), elements=st.floats(min_value=-10, max_value=10,
                                                         allow_nan=False, allow_infinity=False))


@given(matrices)
@settings(max_examples=1000)
def test_trace_identity_for_real_matrices(a):
    assert trace_identity_residual(a) <= 1e-12


def test_default_grid_keeps_a_guard_band():
    xs = default_grid((0.0, 1.0))
    assert len(xs) == 201
    assert xs[0] == pytest.approx(1e-6)
    assert xs[-1] == pytest.approx(1.0 - 1e-6)


def test_intertwining_on_the_one_soliton(one_soliton, plane_spinors):
    T = one_soliton.transforms[0]
    for psi in plane_spinors:
        report = intertwining_residual(T, psi, tolerance=1e-8, example="ex1")
        assert report.passed, report.line()


def test_perturbed_partner_fails_intertwining(one_soliton, free_seed):
    T = one_soliton.transforms[0]
    report = intertwining_residual(T, free_spinor(free_seed, "cosh", 0.7), q_shift=1e-2)
    assert not report.passed
    assert report.max_residual >= 1e-3
    assert report.location is not None


@pytest.mark.parametrize("name", ["ex1", "ex6", "ex9"])
def test_factorization_on_catalog_steps(name):
    bundle = example(name)
    T = bundle.transforms[0]
    for psi in bundle.test_spinors:
        reports = factorization_residual(T, psi, tolerance=1e-7, example=name)
        assert len(reports) == 2
        assert all(r.passed for r in reports), [r.line() for r in reports]


def test_factorization_on_fields_that_are_not_eigenspinors(one_soliton):
    T = one_soliton.transforms[0]
    field = SpinorField(sp.exp(-X ** 2 / 8) * sp.cos(X), sp.sin(X / 2) / sp.cosh(X / 3))
    partner = SpinorField(sp.tanh(X) / sp.cosh(X / 4), sp.exp(-X ** 2 / 16))
    reports = factorization_residual(T, field, tolerance=1e-8, phi=partner)
    assert all(r.passed for r in reports), [r.line() for r in reports]


def test_factorization_with_opposite_levels(free_seed, plane_spinors):
    # l1 = -l2, so L+ L reduces to h0^2 - l1^2
    T = build_transform(free_spinor(free_seed, "sinh", 0.5), free_spinor(free_seed, "cosh", -0.5),
                        (-8.0, 8.0))
    xs = np.linspace(-8.0, 8.0, 81)
    assert sum(T.lambdas) == 0.0
    assert np.ptp(T.transformed.p(xs)) > 0.1
    for psi in plane_spinors:
        reports = factorization_residual(T, psi, tolerance=1e-7, example="opposite_levels")
        assert all(r.passed for r in reports), [r.line() for r in reports]
        back = apply_adjoint(T, apply_forward(T, psi))(xs)
        expected = (psi.energy ** 2 - 0.25) * psi(xs)
        scale = 1.0 + np.linalg.norm(expected, axis=-1)
        assert np.max(np.linalg.norm(back - expected, axis=-1) / scale) <= 1e-8
    field = SpinorField(sp.exp(-X ** 2 / 8) * sp.cos(X), sp.sin(X / 2) / sp.cosh(X / 3))
    partner = SpinorField(sp.tanh(X) / sp.cosh(X / 4), sp.exp(-X ** 2 / 16))
    reports = factorization_residual(T, field, tolerance=1e-8, phi=partner)
    assert all(r.passed for r in reports), [r.line() for r in reports]


def test_superalgebra_on_stacked_fields(one_soliton):
    T = one_soliton.transforms[0]
    field = SpinorField(sp.exp(-X ** 2 / 8) * sp.cos(X), sp.sin(X / 2) / sp.cosh(X / 3))
    partner = SpinorField(sp.tanh(X) / sp.cosh(X / 4), sp.exp(-X ** 2 / 16))
    reports = superalgebra_residuals(T, field, partner, tolerance=1e-8, example="ex1")
    assert [r.check for r in reports] == ["superalgebra_Q_squared", "superalgebra_anticommutator",
                                          "superalgebra_commutator_Q", "superalgebra_commutator_Qplus"]
    assert all(r.passed for r in reports), [r.line() for r in reports]
    assert reports[0].max_residual == 0.0


def test_norm_of_a_mapped_bound_state():
    bundle = example("ex2")
    bound = bundle.transforms[0].partner.u2
    ratio = norm_preservation(bundle.transforms[1], bound, (-20.0, 20.0))
    assert ratio == pytest.approx(1.0, abs=1e-6)


def test_norm_needs_positive_level_product(one_soliton, free_seed):
    with pytest.raises(NonPositiveNormalization):
        norm_preservation(one_soliton.transforms[0], free_spinor(free_seed, "cosh", 0.7), (-5.0, 5.0))


def test_decay_classification(one_soliton, free_seed):
    T = one_soliton.transforms[0]
    assert decay_classify(T.partner.u2) == INTEGRABLE
    assert decay_classify(T.partner.u1) == NON_INTEGRABLE
    assert decay_classify(free_spinor(free_seed, "cosh", 0.5)) == NON_INTEGRABLE
    slow = SpinorField(X / (1 + X ** 2), 0 * X, domain=(1e-6, np.inf), label="r/(1+r^2)")
    assert decay_classify(slow) == INDETERMINATE


def test_discrete_levels_of_the_one_soliton(one_soliton):
    T = one_soliton.transforms[0]
    assert discrete_levels([T.partner.u1, T.partner.u2]) == [0.5]


def test_summary_counts(one_soliton, free_seed):
    T = one_soliton.transforms[0]
    psi = free_spinor(free_seed, "cosh", 0.7)
    reports = [intertwining_residual(T, psi), intertwining_residual(T, psi, q_shift=1e-2)]
    assert summarize(reports) == {'total': 2, 'passed': 1, 'failed': 1}
