#!/usr/bin/env python3
# dirac/darboux.py
"""
One Darboux step for h0 = gamma d/dx + V0.

A transformation function U = (u1, u2) with h0 U = U diag(l1, l2) gives
  V1 = V0 + [gamma, U' U^-1]
  L psi = psi' - U' U^-1 psi = gamma (U Lambda U^-1 - E) psi
  L+ phi = -phi' + V' V^-1 phi,  V = (U^t)^-1
and the pseudoscalar and scalar specializations of that step.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple

import numpy as np
import structlog
import sympy as sp

import config
from dirac.core import (
    GAMMA,
    X,
    CumulativeIntegral,
    Interval,
    ScalarField,
    SymbolicField,
    as_grid,
    commutator,
    constant_field,
    default_base_point,
    find_nodes,
    jet_inverse,
    jet_log_derivative,
    jet_product,
    jet_quotient,
    jet_transpose,
    mat2_det,
    mat2_inverse,
    matvec,
    probe_grid,
    working_interval,
)
from dirac.exceptions import (
    DarbouxError,
    DegenerateOnGrid,
    EqualEigenvalues,
    InvalidTransformFunction,
    NodeInLog,
    RouteMismatch,
    WrongBranch,
)
from dirac.potential import Potential, make_canonical, same_potential
from dirac.spinor import (
    EigenSpinor,
    closed_form_spinor,
    hat_spinor,
    linear_combination,
    second_solution,
    sigma3_mirror,
    wronskian,
    zero_on,
)

logger = structlog.get_logger(__name__)

UPPER = "upper"
LOWER = "lower"
EIGENVALUE_MATCH = 1e-12


class TransformFunction:
    """Matrix solution U = (u1, u2) of h0 U = U Lambda with distinct real eigenvalues"""

    def __init__(self, u1: EigenSpinor, u2: EigenSpinor, parent: Optional[Potential] = None,
                 interval: Optional[Interval] = None, allow_singular: bool = False,
                 nodes=()):
        self.u1 = u1
        self.u2 = u2
        self.parent = parent or u1.parent
        self.interval = interval or working_interval(self.parent.domain)
        self.allow_singular = allow_singular
        self.nodes = list(nodes)
        self._eps = -1.0 if allow_singular else None

    def __repr__(self) -> str:
        return f"TransformFunction({self.u1.label!r}, {self.u2.label!r}, lambdas={self.lambdas})"

    @property
    def lambdas(self) -> Tuple[float, float]:
        return self.u1.energy, self.u2.energy

    @property
    def max_order(self) -> int:
        return self.parent.max_deriv_order

    # ----- matrix values and jets -----

    def matrix(self, x) -> np.ndarray:
        arr, _ = as_grid(x)
        return np.stack([self.u1(arr), self.u2(arr)], axis=-1)

    def matrix_jet(self, x, order: int) -> np.ndarray:
        """(order+1, N, 2, 2) with columns u1, u2; derivatives by the Dirac recurrence"""
        return np.stack([self.u1.jet(x, order), self.u2.jet(x, order)], axis=-1)

    def own_matrix_jet(self, x, order: int) -> np.ndarray:
        return np.stack([self.u1.own_jet(x, order), self.u2.own_jet(x, order)], axis=-1)

    def determinant(self, x) -> np.ndarray:
        arr, scalar = as_grid(x)
        value = mat2_det(self.matrix(arr))
        return float(value[0]) if scalar else value

    def inverse(self, x) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return mat2_inverse(self.matrix(x), self._eps)

    def eigen_matrix_jet(self, x, order: int) -> np.ndarray:
        """Jet of X = U Lambda U^-1"""
        u = self.matrix_jet(x, order)
        with np.errstate(divide="ignore", invalid="ignore"):
            u_inv = jet_inverse(u, self._eps)
        return jet_product(u * np.asarray(self.lambdas), u_inv, np.matmul)

    def eigen_matrix(self, x) -> np.ndarray:
        return self.eigen_matrix_jet(x, 0)[0]

    def log_derivative_jet(self, x, order: int) -> np.ndarray:
        """Jet of A = U' U^-1 through the algebraic form gamma (V0 - X)"""
        return GAMMA @ (self.parent.matrix_jet(x, order) - self.eigen_matrix_jet(x, order))

    def log_derivative(self, x) -> np.ndarray:
        """A = U' U^-1 with U' taken from the closed forms of u1, u2 when they carry them"""
        u = self.own_matrix_jet(x, 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            return u[1] @ mat2_inverse(u[0], self._eps)

    def adjoint_matrix_jet(self, x, order: int) -> np.ndarray:
        """Jet of B = V' V^-1 = gamma (V1 - X^t)"""
        v1 = self.transformed.matrix_jet(x, order)
        return GAMMA @ (v1 - jet_transpose(self.eigen_matrix_jet(x, order)))

    # ----- derived objects -----

    @cached_property
    def transformed(self) -> Potential:
        return transformed_potential(self)

    @cached_property
    def partner(self) -> "TransformFunction":
        return partner_matrix(self)


def build_transform(u1: EigenSpinor, u2: EigenSpinor, interval: Optional[Interval] = None,
                    allow_singular: bool = False) -> TransformFunction:
    """Validate and assemble U = (u1, u2)"""
    if not same_potential(u1.parent, u2.parent):
        raise DarbouxError(f"{u1.label!r} and {u2.label!r} solve different potentials")
    T = TransformFunction(u1, u2, parent=u1.parent, interval=interval,
                          allow_singular=allow_singular)
    _check_columns(T)
    nodes = find_nodes(T.determinant, T.interval, touches=True)
    if nodes:
        if not allow_singular:
            raise DegenerateOnGrid("det U vanishes on the working interval", nodes)
        logger.warning("⚠️ singular transformation accepted", nodes=nodes[:8], count=len(nodes))
        T.nodes = nodes
    if abs(u1.energy - u2.energy) <= EIGENVALUE_MATCH:
        raise EqualEigenvalues(f"transformation needs l1 != l2, got {u1.energy:g} twice")
    logger.debug("transformation function built", u1=u1.label, u2=u2.label, lambdas=T.lambdas)
    return T


def _interval_probe(T: TransformFunction) -> np.ndarray:
    return np.linspace(T.interval[0], T.interval[1], config.NUMERICS_CONFIG['probe_points'])


def _check_columns(T: TransformFunction) -> None:
    """
    gamma U' + V0 U - U Lambda must vanish relative to the size of its terms.
    Columns without closed-form derivatives satisfy it through the recurrence.
    """
    xs = _interval_probe(T)
    tolerance = config.VERIFY_CONFIG['default_tolerance']
    with np.errstate(all="ignore"):
        residual = matrix_dirac_residual(T, xs)
        u = T.own_matrix_jet(xs, 1)
        terms = (np.abs(GAMMA) @ np.abs(u[1]) + np.abs(T.parent.matrix(xs)) @ np.abs(u[0])
                 + np.abs(u[0] * np.asarray(T.lambdas)))
        relative = residual / (1.0 + np.max(terms, axis=(-2, -1)))
    finite = np.isfinite(relative)
    if not finite.any():
        return
    worst = int(np.argmax(np.where(finite, relative, -1.0)))
    if relative[worst] > tolerance:
        raise InvalidTransformFunction(
            f"columns of U do not solve the Dirac equation of {T.parent.name!r}: "
            f"residual {relative[worst]:.3e} at x = {xs[worst]:.6g}",
            float(relative[worst]), float(xs[worst]))


def transformed_potential(T: TransformFunction) -> Potential:
    """
    V1 from the entries of U:
      p1 = -p0 + (l1 - l2) (u11 u22 + u12 u21) / det U
      q1 = -q0 + (l1 - l2) (u21 u22 - u11 u12) / det U
    """
    V0 = T.parent
    l1, l2 = T.lambdas
    order_cap = V0.max_deriv_order

    def d_jets(x: np.ndarray, order: int):
        u = T.matrix_jet(x, order)
        u11, u12, u21, u22 = u[..., 0, 0], u[..., 0, 1], u[..., 1, 0], u[..., 1, 1]
        det = jet_product(u11, u22) - jet_product(u12, u21)
        d1 = jet_product(u11, u22) + jet_product(u12, u21)
        d2 = jet_product(u21, u22) - jet_product(u11, u12)
        return det, d1, d2

    def p_jet(x: np.ndarray, order: int) -> np.ndarray:
        det, d1, _ = d_jets(x, order)
        with np.errstate(divide="ignore", invalid="ignore"):
            return -V0.p.jet(x, order) + (l1 - l2) * jet_quotient(d1, det)

    def q_jet(x: np.ndarray, order: int) -> np.ndarray:
        det, _, d2 = d_jets(x, order)
        with np.errstate(divide="ignore", invalid="ignore"):
            return -V0.q.jet(x, order) + (l1 - l2) * jet_quotient(d2, det)

    name = f"D[{V0.name}; {l1:g}, {l2:g}]"
    p = ScalarField(p_jet, order_cap, V0.domain, f"p of {name}")
    q = ScalarField(q_jet, order_cap, V0.domain, f"q of {name}")
    return make_canonical(p, q, name=name, representation=V0.representation, domain=V0.domain,
                          mass=V0.mass if V0.is_scalar else None)


def potential_by_log_derivative(T: TransformFunction, x) -> Tuple[np.ndarray, np.ndarray]:
    """(p1, q1) from V0 + [gamma, U' U^-1], the second route to V1"""
    arr, _ = as_grid(x)
    v1 = T.parent.matrix(arr) + commutator(GAMMA, T.log_derivative(arr))
    return v1[..., 0, 0], v1[..., 0, 1]


def apply_forward(T: TransformFunction, psi: EigenSpinor) -> EigenSpinor:
    """L psi = gamma (X - E) psi, an eigenspinor of the transformed potential"""
    if not same_potential(psi.parent, T.parent):
        raise DarbouxError(f"{psi.label!r} does not solve the parent of {T!r}")
    E = psi.energy

    def own(x: np.ndarray, order: int) -> np.ndarray:
        pj = psi.jet(x, order)
        return matvec(GAMMA, jet_product(T.eigen_matrix_jet(x, order), pj, matvec) - E * pj)

    def values(x: np.ndarray) -> np.ndarray:
        return own(x, 0)[0]

    image = EigenSpinor(E, T.transformed, values, f"L[{psi.label}]", own, T.max_order)
    _check_routes(T, psi, image)
    return image


def forward_by_derivative(T: TransformFunction, psi: EigenSpinor, x) -> np.ndarray:
    """L psi = psi' - U' U^-1 psi, the second route to the forward map"""
    arr, _ = as_grid(x)
    pj = psi.own_jet(arr, 1)
    return pj[1] - matvec(T.log_derivative(arr), pj[0])


def _check_routes(T: TransformFunction, psi: EigenSpinor, image: EigenSpinor) -> None:
    """
    gamma (X - E) psi and psi' - U' U^-1 psi agree only when psi solves h0 psi = E psi.
    The gap is measured against the size of the terms and may grow with cond U.
    """
    xs = _interval_probe(T)
    tolerance = config.NUMERICS_CONFIG['route_tolerance']
    with np.errstate(all="ignore"):
        algebraic = image(xs)
        pj = psi.own_jet(xs, 1)
        a_psi = matvec(T.log_derivative(xs), pj[0])
        derivative = pj[1] - a_psi
        u = T.matrix(xs)
    finite = (np.all(np.isfinite(algebraic), axis=-1) & np.all(np.isfinite(derivative), axis=-1)
              & np.all(np.isfinite(u), axis=(-2, -1)))
    if not finite.any():
        return

    def norm(v: np.ndarray) -> np.ndarray:
        return np.linalg.norm(v[finite], axis=-1)

    scale = 1.0 + norm(algebraic) + norm(pj[1]) + norm(a_psi)
    gap = norm(algebraic - derivative) / scale
    with np.errstate(all="ignore"):
        allowed = tolerance + 100.0 * np.finfo(float).eps * np.linalg.cond(u[finite])
    worst = int(np.argmax(gap - allowed))
    if gap[worst] > allowed[worst]:
        x = float(xs[finite][worst])
        raise RouteMismatch(
            f"forward map of {psi.label!r} differs between its algebraic and derivative forms: "
            f"gap {gap[worst]:.3e} at x = {x:.6g}", float(gap[worst]), x)


def apply_adjoint(T: TransformFunction, phi: EigenSpinor) -> EigenSpinor:
    """L+ phi = -gamma (X^t - E) phi, an eigenspinor of the parent potential"""
    if not same_potential(phi.parent, T.transformed):
        raise DarbouxError(f"{phi.label!r} does not solve the transformed potential of {T!r}")
    E = phi.energy

    def own(x: np.ndarray, order: int) -> np.ndarray:
        fj = phi.jet(x, order)
        y = jet_transpose(T.eigen_matrix_jet(x, order))
        return -matvec(GAMMA, jet_product(y, fj, matvec) - E * fj)

    def values(x: np.ndarray) -> np.ndarray:
        return own(x, 0)[0]

    return EigenSpinor(E, T.parent, values, f"L+[{phi.label}]", own, T.max_order)


def partner_matrix(T: TransformFunction) -> TransformFunction:
    """V = (U^t)^-1 over the transformed potential, same Lambda"""
    V1 = T.transformed

    def column(j: int, x: np.ndarray, order: int) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            v = jet_transpose(jet_inverse(T.matrix_jet(x, order), T._eps))
        return v[..., :, j]

    def make(j: int, energy: float) -> EigenSpinor:
        return EigenSpinor(energy, V1, lambda x: column(j, x, 0)[0], f"v{j + 1}",
                           lambda x, order: column(j, x, order), T.max_order + 1)

    l1, l2 = T.lambdas
    return TransformFunction(make(0, l1), make(1, l2), parent=V1, interval=T.interval,
                             allow_singular=T.allow_singular, nodes=T.nodes)


def complementary_spinors(T: TransformFunction, x0: Optional[float] = None
                          ) -> Tuple[EigenSpinor, EigenSpinor]:
    """(u1~, u2~) with W(u1~, u1) = -1 and W(u2~, u2) = +1, so L U~ = (l2 - l1) V"""
    first = second_solution(T.u1, x0, T.interval).scaled(-1.0, label=f"{T.u1.label}~")
    second = second_solution(T.u2, x0, T.interval)
    return first, second


def level_lookup(T: TransformFunction, psi: EigenSpinor, x0: Optional[float] = None) -> EigenSpinor:
    """
    Image of a solution at E = l1 or l2, where L has a kernel:
    psi = a u_i + b u_i~ goes to a v_i~ + b L u_i~.
    """
    l1, l2 = T.lambdas
    if abs(psi.energy - l1) <= EIGENVALUE_MATCH:
        index = 0
    elif abs(psi.energy - l2) <= EIGENVALUE_MATCH:
        index = 1
    else:
        raise DarbouxError(f"level lookup needs E in {T.lambdas}, got {psi.energy:g}")
    u = (T.u1, T.u2)[index]
    u_tilde = complementary_spinors(T, x0)[index]
    v_tilde = complementary_spinors(T.partner, x0)[index]
    probe = np.array([default_base_point(T.parent.domain)])
    a = float(wronskian(psi, u_tilde, probe)[0] / wronskian(u, u_tilde, probe)[0])
    b = float(wronskian(psi, u, probe)[0] / wronskian(u_tilde, u, probe)[0])
    image = linear_combination([(a, v_tilde), (b, apply_forward(T, u_tilde))],
                               label=f"lookup[{psi.label}]", parent=T.transformed)
    return image


# ===== PSEUDOSCALAR STEP =====

@dataclass
class PseudoscalarStep:
    parent: Potential
    branch: str
    kernel: EigenSpinor
    partner: EigenSpinor
    potential: Potential
    log_component: ScalarField
    transform: TransformFunction

    @property
    def mass(self) -> float:
        return self.potential.mass

    @property
    def shift(self) -> float:
        """l2^2 - m^2, the energy offset between the reduced Schrodinger problems"""
        return self.partner.energy ** 2 - self.parent.mass ** 2

    def map(self, psi: EigenSpinor) -> EigenSpinor:
        """Solution map of the step; equals the general L on eigenspinors"""
        if not same_potential(psi.parent, self.parent):
            raise DarbouxError(f"{psi.label!r} does not solve {self.parent.name!r}")
        E, l2 = psi.energy, self.partner.energy
        q1 = self.potential.q
        upper = self.branch == UPPER

        def own(x: np.ndarray, order: int) -> np.ndarray:
            pj = psi.jet(x, order + 1)
            wj = q1.jet(x, order)
            if upper:
                c = pj[..., 1]
                first = (l2 - E) * c[:order + 1]
                second = c[1:] - jet_product(wj, c[:order + 1])
            else:
                c = pj[..., 0]
                first = c[1:] + jet_product(wj, c[:order + 1])
                second = (E - l2) * c[:order + 1]
            return np.stack([first, second], axis=-1)

        return EigenSpinor(E, self.potential, lambda x: own(x, 0)[0], f"Lps[{psi.label}]", own,
                           self.parent.max_deriv_order)


def kernel_spinor(V: Potential, branch: str = UPPER, x0: Optional[float] = None,
                  interval: Optional[Interval] = None) -> EigenSpinor:
    """(exp int q, 0) at E = m for the upper branch, (0, exp -int q) at E = -m for the lower"""
    if branch not in (UPPER, LOWER):
        raise WrongBranch(f"branch must be {UPPER!r} or {LOWER!r}, got {branch!r}")
    x0 = default_base_point(V.domain) if x0 is None else x0
    sign = 1 if branch == UPPER else -1
    energy = sign * V.mass
    label = f"kernel_{branch}"
    if isinstance(V.q, SymbolicField):
        antiderivative = sp.integrate(V.q.expr, (X, x0, X))
        if not antiderivative.has(sp.Integral):
            f = sp.exp(sign * antiderivative)
            parts = (f, sp.Integer(0)) if branch == UPPER else (sp.Integer(0), f)
            return closed_form_spinor(*parts, energy, V, label)
    integral = CumulativeIntegral(lambda t: V.q(t), x0, interval or working_interval(V.domain))
    slot = 0 if branch == UPPER else 1

    def values(x: np.ndarray) -> np.ndarray:
        out = np.zeros((len(x), 2))
        out[:, slot] = np.exp(sign * integral(x))
        return out

    return EigenSpinor(energy, V, values, label)


def pseudoscalar_step(V: Potential, u: EigenSpinor, branch: str = UPPER,
                      kernel: Optional[EigenSpinor] = None,
                      interval: Optional[Interval] = None) -> PseudoscalarStep:
    """
    Step that keeps V pseudoscalar. Upper: kernel (u11, 0) at m, q1 = (ln u22)',
    mass -l2. Lower: kernel (0, u21) at -m, q1 = -(ln u12)', mass +l2.
    """
    if not V.is_pseudoscalar or V.is_hat:
        raise WrongBranch(f"{V.name!r} is not a pseudoscalar potential in sigma3 form")
    if branch not in (UPPER, LOWER):
        raise WrongBranch(f"branch must be {UPPER!r} or {LOWER!r}, got {branch!r}")
    m = V.mass
    interval = interval or working_interval(V.domain)
    kernel = kernel or kernel_spinor(V, branch, interval=interval)
    xs = probe_grid(V.domain)
    expected = m if branch == UPPER else -m
    zero_slot = 1 if branch == UPPER else 0
    if abs(kernel.energy - expected) > EIGENVALUE_MATCH or not zero_on(kernel, zero_slot, xs):
        raise WrongBranch(
            f"{branch} branch needs a kernel at E={expected:g} with component {zero_slot + 1} zero")
    l2 = u.energy
    if abs(l2 - kernel.energy) <= EIGENVALUE_MATCH:
        raise EqualEigenvalues(f"partner spinor sits at the kernel energy {l2:g}")

    log_slot = 1 if branch == UPPER else 0
    log_component = u.component(log_slot)
    nodes = find_nodes(lambda t: u(t)[..., log_slot], interval)
    if nodes:
        raise NodeInLog(f"component u{'22' if branch == UPPER else '12'} of {u.label!r} vanishes", nodes)

    sign = 1.0 if branch == UPPER else -1.0

    def q_jet(x: np.ndarray, order: int) -> np.ndarray:
        c = u.jet(x, order + 1)[..., log_slot]
        return sign * jet_log_derivative(c)

    new_mass = -l2 if branch == UPPER else l2
    name = f"PS[{V.name}; {branch}, {l2:g}]"
    q1 = ScalarField(q_jet, V.max_deriv_order, V.domain, f"q of {name}")
    potential = make_canonical(constant_field(new_mass, V.domain), q1, name=name, domain=V.domain)
    transform = build_transform(kernel, u, interval)
    logger.info("pseudoscalar step", branch=branch, mass=new_mass, partner=u.label)
    return PseudoscalarStep(parent=V, branch=branch, kernel=kernel, partner=u,
                            potential=potential, log_component=log_component, transform=transform)


# ===== SCALAR STEP (hat representation) =====

@dataclass
class ScalarStep:
    parent: Potential
    kernel: EigenSpinor
    mirror: EigenSpinor
    potential: Potential
    transform: TransformFunction

    @property
    def mass(self) -> float:
        return self.parent.mass

    @property
    def S(self) -> ScalarField:
        q = self.potential.q
        m = self.mass

        def s_jet(x: np.ndarray, order: int) -> np.ndarray:
            out = q.jet(x, order).copy()
            out[0] -= m
            return out

        return ScalarField(s_jet, q.max_order, q.domain, "S")

    @property
    def potential_sigma3(self) -> Potential:
        return self.potential.sigma3

    def log_jets(self, x: np.ndarray, order: int) -> Tuple[np.ndarray, np.ndarray]:
        """Jets of (ln u11_hat)' and (ln u21_hat)'"""
        kj = self.kernel.jet(x, order + 1)
        return jet_log_derivative(kj[..., 0]), jet_log_derivative(kj[..., 1])

    def map(self, psi: EigenSpinor) -> EigenSpinor:
        """phi_hat = psi_hat' - diag((ln u11)', (ln u21)') psi_hat"""
        psi = hat_spinor(psi, self.parent)
        if not same_potential(psi.parent, self.parent):
            raise DarbouxError(f"{psi.label!r} does not solve {self.parent.name!r}")

        def own(x: np.ndarray, order: int) -> np.ndarray:
            pj = psi.jet(x, order + 1)
            a, b = self.log_jets(x, order)
            first = pj[1:, :, 0] - jet_product(a, pj[:order + 1, :, 0])
            second = pj[1:, :, 1] - jet_product(b, pj[:order + 1, :, 1])
            return np.stack([first, second], axis=-1)

        return EigenSpinor(psi.energy, self.potential, lambda x: own(x, 0)[0],
                           f"Ls[{psi.label}]", own, self.parent.max_deriv_order)

    def partner_columns(self) -> Tuple[EigenSpinor, EigenSpinor]:
        """V_hat = 1/2 [[1/u11, -1/u11], [1/u21, 1/u21]] at (l, -l)"""
        k = self.kernel
        lam = k.energy

        def column(sign: float):
            def values(x: np.ndarray) -> np.ndarray:
                v = k(x)
                return 0.5 * np.stack([sign / v[:, 0], 1.0 / v[:, 1]], axis=-1)
            return values

        return (EigenSpinor(lam, self.potential, column(1.0), "v1_hat"),
                EigenSpinor(-lam, self.potential, column(-1.0), "v2_hat"))


def scalar_step(V: Potential, u1: EigenSpinor, interval: Optional[Interval] = None) -> ScalarStep:
    """
    Step that keeps V scalar: u2_hat = -sigma3 u1_hat at -l, and
    S1 = S0 + (ln u21_hat)' - (ln u11_hat)'.
    """
    if not V.is_scalar:
        raise WrongBranch(f"{V.name!r} is not a scalar potential")
    Vh = V.hat
    kernel = hat_spinor(u1, Vh)
    interval = interval or working_interval(Vh.domain)
    for slot in (0, 1):
        nodes = find_nodes(lambda t, s=slot: kernel(t)[..., s], interval)
        if nodes:
            raise NodeInLog(f"component u{slot + 1}1_hat of {u1.label!r} vanishes", nodes)
    mirror = sigma3_mirror(kernel, label=f"mirror[{kernel.label}]")

    def q_jet(x: np.ndarray, order: int) -> np.ndarray:
        kj = kernel.jet(x, order + 1)
        return (Vh.q.jet(x, order) + jet_log_derivative(kj[..., 1])
                - jet_log_derivative(kj[..., 0]))

    name = f"S[{Vh.name}; {kernel.energy:g}]"
    q1 = ScalarField(q_jet, Vh.max_deriv_order, Vh.domain, f"q_hat of {name}")
    potential = make_canonical(constant_field(0.0, Vh.domain), q1, name=name,
                               representation=Vh.representation, domain=Vh.domain, mass=V.mass)
    transform = build_transform(kernel, mirror, interval)
    logger.info("scalar step", level=kernel.energy, mass=V.mass)
    return ScalarStep(parent=Vh, kernel=kernel, mirror=mirror, potential=potential,
                      transform=transform)


# ===== RESIDUALS OF THE STEP ITSELF =====

def matrix_dirac_residual(T: TransformFunction, x) -> np.ndarray:
    """max entry of gamma U' + V0 U - U Lambda"""
    arr, _ = as_grid(x)
    u = T.own_matrix_jet(arr, 1)
    r = GAMMA @ u[1] + T.parent.matrix(arr) @ u[0] - u[0] * np.asarray(T.lambdas)
    return np.max(np.abs(r), axis=(-2, -1))


def antisymmetry_residual(T: TransformFunction, x) -> np.ndarray:
    """max entry of A - A^t + (l1 + l2) gamma with A = U' U^-1"""
    arr, _ = as_grid(x)
    a = T.log_derivative(arr)
    r = a - jet_transpose(a) + sum(T.lambdas) * GAMMA
    return np.max(np.abs(r), axis=(-2, -1))


# ===== OPERATORS ON GENERAL JETS =====

def apply_h_jet(V: Potential, x: np.ndarray, psi_jet: np.ndarray) -> np.ndarray:
    """Jet of h psi = gamma psi' + V psi; one order shorter than psi_jet"""
    order = len(psi_jet) - 2
    v = V.matrix_jet(x, order)
    return matvec(GAMMA, psi_jet[1:]) + jet_product(v, psi_jet[:order + 1], matvec)


def apply_L_jet(T: TransformFunction, x: np.ndarray, psi_jet: np.ndarray) -> np.ndarray:
    """Jet of L psi = psi' - A psi for any smooth psi"""
    order = len(psi_jet) - 2
    a = T.log_derivative_jet(x, order)
    return psi_jet[1:] - jet_product(a, psi_jet[:order + 1], matvec)


def apply_Lplus_jet(T: TransformFunction, x: np.ndarray, phi_jet: np.ndarray) -> np.ndarray:
    """Jet of L+ phi = -phi' + B phi for any smooth phi"""
    order = len(phi_jet) - 2
    b = T.adjoint_matrix_jet(x, order)
    return -phi_jet[1:] + jet_product(b, phi_jet[:order + 1], matvec)


def shifted_h_jet(V: Potential, x: np.ndarray, psi_jet: np.ndarray, shift: float) -> np.ndarray:
    """Jet of (h - shift) psi"""
    return apply_h_jet(V, x, psi_jet) - shift * psi_jet[:-1]
