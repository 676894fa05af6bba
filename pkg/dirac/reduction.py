#!/usr/bin/env python3
# dirac/reduction.py
"""
Schrodinger SUSY pairs behind pseudoscalar and scalar Dirac problems, and the
commutative diagram linking a pseudoscalar Dirac step to two Schrodinger steps.
"""

from dataclasses import dataclass
from typing import List

import numpy as np
import structlog

from dirac.core import ScalarField, as_grid, jet_log_derivative, jet_product
from dirac.darboux import UPPER, PseudoscalarStep
from dirac.exceptions import MissingStepData
from dirac.spinor import EigenSpinor
from models.base import ResidualReport

logger = structlog.get_logger(__name__)


@dataclass
class SchrodingerPair:
    """U_plus = w^2 + w', U_minus = w^2 - w' at energy E^2 - shift"""
    U_plus: ScalarField
    U_minus: ScalarField
    shift: float
    generator: ScalarField

    def energy(self, E: float) -> float:
        return E * E - self.shift

    def shifted(self, offset: float) -> "SchrodingerPair":
        """Add a constant to both potentials (and to the energy offset)"""
        return SchrodingerPair(_add_constant(self.U_plus, offset), _add_constant(self.U_minus, offset),
                               self.shift - offset, self.generator)


def _add_constant(f: ScalarField, c: float) -> ScalarField:
    def jet(x: np.ndarray, order: int) -> np.ndarray:
        out = f.jet(x, order).copy()
        out[0] += c
        return out

    return ScalarField(jet, f.max_order, f.domain, f"{f.name}{c:+g}")


def _pair_from(w: ScalarField, shift: float, offset: float = 0.0) -> SchrodingerPair:
    def make(sign: float) -> ScalarField:
        def jet(x: np.ndarray, order: int) -> np.ndarray:
            wj = w.jet(x, order + 1)
            out = jet_product(wj, wj)[:order + 1] + sign * wj[1:]
            out[0] += offset
            return out

        return ScalarField(jet, max(w.max_order - 1, 0), w.domain, f"w^2 {'+' if sign > 0 else '-'} w'")

    return SchrodingerPair(make(1.0), make(-1.0), shift, w)


def pseudoscalar_to_schrodinger(q: ScalarField, m: float) -> SchrodingerPair:
    """U_+- = q^2 +- q' with epsilon = E^2 - m^2"""
    return _pair_from(q, m * m)


def scalar_to_schrodinger(S: ScalarField, m: float) -> SchrodingerPair:
    """U_+- = (m + S)^2 +- S' with epsilon = E^2"""
    Q = _add_constant(S, m)
    return _pair_from(Q, 0.0)


def schrodinger_susy_step(U: ScalarField, u: ScalarField) -> ScalarField:
    """U - 2 (ln u)''"""
    def jet(x: np.ndarray, order: int) -> np.ndarray:
        log = jet_log_derivative(u.jet(x, order + 2))
        return U.jet(x, order) - 2.0 * log[1:]

    return ScalarField(jet, min(U.max_order, max(u.max_order - 2, 0)), U.domain, "susy step")


def log_second_derivative(u: ScalarField, x) -> np.ndarray:
    arr, _ = as_grid(x)
    return jet_log_derivative(u.jet(arr, 2))[1]


def diagram_potentials(step: PseudoscalarStep):
    """(U0 pair, shifted U1 pair) with the l2^2 - m^2 offset made explicit"""
    if step is None or step.kernel is None or step.log_component is None:
        raise MissingStepData("the diagram check needs a completed pseudoscalar step")
    m = step.parent.mass
    base = pseudoscalar_to_schrodinger(step.parent.q, m)
    l2 = step.partner.energy
    transformed = pseudoscalar_to_schrodinger(step.potential.q, l2).shifted(l2 * l2 - m * m)
    return base, transformed


def susy_diagram_check(step: PseudoscalarStep, x, tolerance: float = 1e-8,
                       example: str = "") -> List[ResidualReport]:
    """
    Upper branch: U1~(+) = U0(-), dU(-) = -2 (ln u22)'', dU(+) = U0(-) - U0(+) = -2 (ln u11)''.
    Lower branch: U1~(-) = U0(+), dU(+) = -2 (ln u12)'', dU(-) = U0(+) - U0(-) = -2 (ln u21)''.
    """
    if step is None:
        raise MissingStepData("no pseudoscalar step supplied")
    arr, _ = as_grid(x)
    base, moved = diagram_potentials(step)
    kernel_component = step.kernel.component(0 if step.branch == UPPER else 1)
    log_kernel = log_second_derivative(kernel_component, arr)
    log_partner = log_second_derivative(step.log_component, arr)
    u0p, u0m = base.U_plus(arr), base.U_minus(arr)
    u1p, u1m = moved.U_plus(arr), moved.U_minus(arr)
    grid = f"{arr[0]:g}:{arr[-1]:g}:{len(arr)}"
    if step.branch == UPPER:
        checks = [
            ("tilde_U1_plus_eq_U0_minus", u1p - u0m),
            ("delta_U_minus", (u1m - u0m) + 2.0 * log_partner),
            ("delta_U_plus", (u0m - u0p) + 2.0 * log_kernel),
            ("two_step_route", u1m - schrodinger_susy_step(
                schrodinger_susy_step(base.U_plus, kernel_component), step.log_component)(arr)),
        ]
    else:
        checks = [
            ("tilde_U1_minus_eq_U0_plus", u1m - u0p),
            ("delta_U_plus", (u1p - u0p) + 2.0 * log_partner),
            ("delta_U_minus", (u0p - u0m) + 2.0 * log_kernel),
            ("two_step_route", u1p - schrodinger_susy_step(
                schrodinger_susy_step(base.U_minus, kernel_component), step.log_component)(arr)),
        ]
    reports = [ResidualReport.from_residuals(name, arr, np.abs(r), tolerance, example, grid,
                                             shift=moved.shift - base.shift)
               for name, r in checks]
    for r in reports:
        log = logger.info if r.passed else logger.warning
        log("diagram identity", check=r.check, max_residual=r.max_residual, passed=r.passed)
    return reports


def component_residual(step: PseudoscalarStep, phi: EigenSpinor, x) -> np.ndarray:
    """|-phi'' + U1~ phi - (E^2 - m^2) phi| on the component paired with the shifted potential"""
    arr, _ = as_grid(x)
    _, moved = diagram_potentials(step)
    index, U = (1, moved.U_minus) if step.branch == UPPER else (0, moved.U_plus)
    jet = phi.jet(arr, 2)[..., index]
    eps = phi.energy ** 2 - step.parent.mass ** 2
    return np.abs(-jet[2] + U(arr) * jet[0] - eps * jet[0])


def scalar_component_residual(pair: SchrodingerPair, psi_hat: EigenSpinor, x) -> np.ndarray:
    """Hat components: psi1 with U_plus and psi2 with U_minus at energy E^2"""
    arr, _ = as_grid(x)
    jet = psi_hat.jet(arr, 2)
    eps = pair.energy(psi_hat.energy)
    r1 = -jet[2][:, 0] + pair.U_plus(arr) * jet[0][:, 0] - eps * jet[0][:, 0]
    r2 = -jet[2][:, 1] + pair.U_minus(arr) * jet[0][:, 1] - eps * jet[0][:, 1]
    return np.maximum(np.abs(r1), np.abs(r2))
