#!/usr/bin/env python3
# dirac/spinor.py
"""
Eigenspinors of h = gamma d/dx + V: values, exact derivatives through the
Dirac equation, the Dirac Wronskian and the second solution by quadrature.
"""

import math
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
import structlog

import config
from dirac.core import (
    GAMMA,
    SIGMA3,
    U_HAT_INV,
    CumulativeIntegral,
    ScalarField,
    SymbolicField,
    as_grid,
    default_base_point,
    find_nodes,
    matvec,
    working_interval,
)
from dirac.exceptions import NodeOnInterval, OrderUnavailable
from dirac.potential import Potential

logger = structlog.get_logger(__name__)

SpinorFn = Callable[[np.ndarray], np.ndarray]
SpinorJetFn = Callable[[np.ndarray, int], np.ndarray]


class EigenSpinor:
    """
    Two-component solution of h psi = E psi bound to its parent potential.

    values(x) returns shape (N, 2). Derivatives come from the recurrence
    psi^(m+1) = gamma [sum_k C(m,k) V^(k) psi^(m-k) - E psi^(m)]; an optional
    own_jet (closed forms) is used by the cross-checks that need a route
    independent of the recurrence.
    """

    def __init__(self, energy: float, parent: Potential, values: SpinorFn, label: str = "",
                 own_jet: Optional[SpinorJetFn] = None, own_order: int = 0):
        self.energy = float(energy)
        self.parent = parent
        self._values = values
        self.label = label
        self._own_jet = own_jet
        self.own_order = own_order if own_jet is not None else 0

    def __repr__(self) -> str:
        return f"EigenSpinor({self.label!r}, E={self.energy:g})"

    @property
    def domain(self):
        return self.parent.domain

    @property
    def max_order(self) -> int:
        return self.parent.max_deriv_order + 1

    def __call__(self, x) -> np.ndarray:
        arr, scalar = as_grid(x)
        value = np.asarray(self._values(arr), dtype=float)
        return value[0] if scalar else value

    def jet(self, x, order: int) -> np.ndarray:
        """Derivatives 0..order with shape (order+1, N, 2)"""
        if order > self.max_order:
            raise OrderUnavailable(
                f"spinor {self.label!r} provides derivatives up to {self.max_order}")
        arr, _ = as_grid(x)
        out = [self(arr)]
        if order > 0:
            v = self.parent.matrix_jet(arr, order - 1)
            for m in range(order):
                acc = -self.energy * out[m]
                for k in range(m + 1):
                    acc = acc + math.comb(m, k) * matvec(v[k], out[m - k])
                out.append(matvec(GAMMA, acc))
        return np.stack(out)

    def own_jet(self, x, order: int) -> np.ndarray:
        """Closed-form derivatives when available, otherwise the recurrence"""
        arr, _ = as_grid(x)
        if self._own_jet is not None and order <= self.own_order:
            return np.asarray(self._own_jet(arr, order), dtype=float)
        return self.jet(arr, order)

    @property
    def has_own_jet(self) -> bool:
        return self._own_jet is not None

    def component(self, index: int) -> ScalarField:
        return ScalarField(lambda x, k: self.jet(x, k)[..., index], self.max_order, self.domain,
                           f"{self.label}[{index + 1}]")

    def scaled(self, factor: float, label: Optional[str] = None) -> "EigenSpinor":
        return linear_combination([(factor, self)], label=label or f"{factor:g}*{self.label}")


class SpinorField:
    """
    Smooth two-component field that need not solve any Dirac equation.
    Used as test input for operator identities.
    """

    def __init__(self, first, second, domain=(-np.inf, np.inf), label: str = ""):
        self.components = (SymbolicField(first, domain=domain), SymbolicField(second, domain=domain))
        self.domain = domain
        self.label = label or f"({first}, {second})"
        self.max_order = min(c.max_order for c in self.components)

    def __call__(self, x) -> np.ndarray:
        arr, scalar = as_grid(x)
        value = np.stack([c(arr) for c in self.components], axis=-1)
        return value[0] if scalar else value

    def jet(self, x, order: int) -> np.ndarray:
        arr, _ = as_grid(x)
        return np.stack([c.jet(arr, order) for c in self.components], axis=-1)

    own_jet = jet


def closed_form_spinor(first, second, energy: float, parent: Potential,
                       label: str = "") -> EigenSpinor:
    """EigenSpinor from two sympy expressions in X"""
    components = [SymbolicField(e, domain=parent.domain) for e in (first, second)]

    def values(x: np.ndarray) -> np.ndarray:
        return np.stack([c(x) for c in components], axis=-1)

    def own(x: np.ndarray, order: int) -> np.ndarray:
        return np.stack([c.jet(x, order) for c in components], axis=-1)

    return EigenSpinor(energy, parent, values, label or f"({first}, {second})", own,
                       min(c.max_order for c in components))


def linear_combination(terms: Sequence[Tuple[float, EigenSpinor]], label: str = "",
                       parent: Optional[Potential] = None) -> EigenSpinor:
    """sum c_i psi_i for spinors sharing one energy"""
    energies = {round(s.energy, 12) for _, s in terms}
    if len(energies) != 1:
        raise ValueError("linear combinations need a common energy")
    head = terms[0][1]
    own_order = min(s.own_order for _, s in terms) if all(s.has_own_jet for _, s in terms) else 0

    def values(x: np.ndarray) -> np.ndarray:
        return sum(c * s(x) for c, s in terms)

    def own(x: np.ndarray, order: int) -> np.ndarray:
        return sum(c * s.own_jet(x, order) for c, s in terms)

    return EigenSpinor(head.energy, parent or head.parent, values,
                       label or " + ".join(f"{c:g}*{s.label}" for c, s in terms),
                       own if own_order else None, own_order)


def spinor_derivative(psi: EigenSpinor, n: int, x) -> np.ndarray:
    arr, scalar = as_grid(x)
    value = psi.jet(arr, n)[n]
    return value[0] if scalar else value


def wronskian(a, b, x) -> np.ndarray:
    """W(a, b) = a1 b2 - a2 b1"""
    arr, scalar = as_grid(x)
    va, vb = a(arr), b(arr)
    value = va[..., 0] * vb[..., 1] - va[..., 1] * vb[..., 0]
    return float(value[0]) if scalar else value


def dirac_residual(psi: EigenSpinor, x) -> np.ndarray:
    """|gamma psi' + V psi - E psi| with psi' from the closed form or central differences"""
    arr, _ = as_grid(x)
    if psi.has_own_jet and psi.own_order >= 1:
        derivative = psi.own_jet(arr, 1)[1]
    else:
        h = config.NUMERICS_CONFIG['fd_step']
        derivative = (psi(arr + h) - psi(arr - h)) / (2.0 * h)
    value = psi(arr)
    residual = (matvec(GAMMA, derivative) + matvec(psi.parent.matrix(arr), value)
                - psi.energy * value)
    return np.linalg.norm(residual, axis=-1)


# ===== SECOND SOLUTION =====

def second_solution(psi: EigenSpinor, x0: Optional[float] = None,
                    interval: Optional[Tuple[float, float]] = None,
                    tol: Optional[float] = None) -> EigenSpinor:
    """
    Second solution at the same energy normalized by W(result, psi) = 1.
    Uses the first component when it is nodeless on the interval, the second
    otherwise.
    """
    V = psi.parent
    E = psi.energy
    x0 = default_base_point(V.domain) if x0 is None else float(x0)
    interval = interval or working_interval(V.domain)
    p = V.p

    first_nodes = find_nodes(lambda xs: psi(xs)[..., 0], interval)
    if not first_nodes:
        branch = "primary"
        lead, weight = 0, lambda t: p(t) + E
    else:
        second_nodes = find_nodes(lambda xs: psi(xs)[..., 1], interval)
        if second_nodes:
            raise NodeOnInterval(
                f"both components of {psi.label!r} vanish on [{interval[0]}, {interval[1]}]")
        branch = "fallback"
        lead, weight = 1, lambda t: E - p(t)

    def integrand(t: float) -> float:
        return weight(t) / float(psi(t)[lead]) ** 2

    integral = CumulativeIntegral(integrand, x0, interval, tol=tol)
    logger.debug("second solution", spinor=psi.label, branch=branch, x0=x0)

    def values(x: np.ndarray) -> np.ndarray:
        v = psi(x)
        i = integral(x)
        out = v * i[:, np.newaxis]
        if lead == 0:
            out[:, 1] -= 1.0 / v[:, 0]
        else:
            out[:, 0] += 1.0 / v[:, 1]
        return out

    def own(x: np.ndarray, order: int) -> np.ndarray:
        jet = psi.jet(x, 1)
        v, dv = jet[0], jet[1]
        i = integral(x)[:, np.newaxis]
        w = np.asarray(weight(x), dtype=float)
        rows = [values(x)]
        if order >= 1:
            d = dv * i
            if lead == 0:
                d[:, 0] += w / v[:, 0]
                d[:, 1] += w * v[:, 1] / v[:, 0] ** 2 + dv[:, 0] / v[:, 0] ** 2
            else:
                d[:, 1] += w / v[:, 1]
                d[:, 0] += w * v[:, 0] / v[:, 1] ** 2 - dv[:, 1] / v[:, 1] ** 2
            rows.append(d)
        return np.stack(rows)

    return EigenSpinor(E, V, values, f"{psi.label}~", own, 1)


# ===== HAT REPRESENTATION =====

def hat_spinor(psi: EigenSpinor, hat_parent: Optional[Potential] = None) -> EigenSpinor:
    """psi_hat = U_hat^{-1} psi, bound to the hat form of the parent"""
    if psi.parent.is_hat:
        return psi
    parent = hat_parent or psi.parent.hat

    def values(x: np.ndarray) -> np.ndarray:
        return matvec(U_HAT_INV, psi(x))

    def own(x: np.ndarray, order: int) -> np.ndarray:
        return matvec(U_HAT_INV, psi.own_jet(x, order))

    return EigenSpinor(psi.energy, parent, values, f"{psi.label}^",
                       own if psi.has_own_jet else None, psi.own_order)


def sigma3_mirror(psi: EigenSpinor, label: Optional[str] = None) -> EigenSpinor:
    """-sigma3 psi, a solution at -E of a scalar hat potential"""

    def values(x: np.ndarray) -> np.ndarray:
        return -matvec(SIGMA3, psi(x))

    def own(x: np.ndarray, order: int) -> np.ndarray:
        return -matvec(SIGMA3, psi.own_jet(x, order))

    return EigenSpinor(-psi.energy, psi.parent, values, label or f"-s3*{psi.label}",
                       own if psi.has_own_jet else None, psi.own_order)


def zero_on(psi: EigenSpinor, index: int, xs: np.ndarray, tol: float = 1e-12) -> bool:
    """Component index vanishes on xs relative to the spinor scale"""
    v = psi(xs)
    scale = max(1.0, float(np.max(np.abs(v))))
    return bool(np.max(np.abs(v[..., index])) <= tol * scale)
