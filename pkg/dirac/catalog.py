#!/usr/bin/env python3
# dirac/catalog.py
"""
Worked examples as executable bundles: seed, transformation spinors, the
computed partner potential, its closed form and the expected discrete levels.
Also the tabulated figure curves and the shape metrics read off them.
"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import sympy as sp
import structlog

from dirac.chain import (
    ChainSpec,
    ChainStep,
    chain_apply,
    chain_potential,
    compose_transforms,
    sequential_apply,
)
from dirac.core import X, Interval, ScalarField, SymbolicField, kn_poly, laguerre, probe_grid, sym
from dirac.darboux import (
    LOWER,
    UPPER,
    TransformFunction,
    apply_forward,
    build_transform,
    antisymmetry_residual,
    matrix_dirac_residual,
    potential_by_log_derivative,
    pseudoscalar_step,
    scalar_step,
)
from dirac.exceptions import ParameterOutOfRegularRange, UnknownExample
from dirac.potential import (
    Potential,
    PotentialClass,
    dirac_oscillator,
    free_mass,
    radial_free,
    radial_mass,
    scalar_coulomb,
    scalar_free,
)
from dirac.reduction import susy_diagram_check
from dirac.spinor import EigenSpinor, SpinorField, closed_form_spinor, sigma3_mirror
from dirac.verify import (
    default_grid,
    discrete_levels,
    factorization_residual,
    intertwining_residual,
    jacobi_residual,
    wronskian_bracket_residual,
    norm_preservation,
    superalgebra_residuals,
    trace_identity_residual,
)
from models.base import ExampleInfo, ResidualReport

logger = structlog.get_logger(__name__)

LINE_INTERVAL: Interval = (-10.0, 10.0)
OSCILLATOR_INTERVAL: Interval = (-6.0, 6.0)
RADIAL_INTERVAL: Interval = (0.1, 10.0)
COULOMB_INTERVAL: Interval = (0.1, 20.0)


@dataclass
class ExampleBundle:
    name: str
    title: str
    seed: Potential
    interval: Interval
    parameters: Dict[str, float]
    computed: Potential
    expected_p: Optional[ScalarField]
    expected_q: Optional[ScalarField]
    transforms: List[TransformFunction]
    test_spinors: List[EigenSpinor]
    levels: Optional[Tuple[float, ...]] = None
    candidates: Optional[Callable[[], List[EigenSpinor]]] = None
    tolerance: float = 1e-8
    step: object = None
    chain: Optional[ChainSpec] = None
    notes: str = ""

    @property
    def representation(self) -> str:
        return self.computed.representation

    def info(self) -> ExampleInfo:
        return ExampleInfo(name=self.name, title=self.title, representation=self.representation,
                           interval=list(self.interval), levels=list(self.levels or ()),
                           parameters=self.parameters)


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ParameterOutOfRegularRange(message)


def _field(expr, domain: Interval, name: str = "") -> SymbolicField:
    return SymbolicField(expr, domain=domain, name=name)


# ===== SPINOR BUILDERS =====

def free_spinor(V: Potential, kind: str, energy: float, label: str = "") -> EigenSpinor:
    """
    Solutions of the free equation with p = m, q = 0 (line or half-line):
    kernel at E = +-m, and cosh/sinh/decay/grow at |E| < m with k = sqrt(m^2 - E^2).
    """
    free = V.class_tag == PotentialClass.FREE and not V.is_hat
    if not free or not np.allclose(V.p(probe_grid(V.domain)), V.mass):
        raise ParameterOutOfRegularRange(f"free spinor builders need p = m > 0 and q = 0, got {V.name!r}")
    m = V.mass
    label = label or f"{kind}({energy:g})"
    if kind == "kernel":
        if abs(energy - m) <= 1e-12:
            return closed_form_spinor(sp.Integer(1), sp.Integer(0), energy, V, label)
        if abs(energy + m) <= 1e-12:
            return closed_form_spinor(sp.Integer(0), sp.Integer(1), energy, V, label)
        raise ParameterOutOfRegularRange(f"kernel spinors live at E = +-{m:g}, got {energy:g}")
    _require(abs(energy) < m, f"{kind} spinor needs |E| < m, got E={energy:g}, m={m:g}")
    E_, m_ = sym(energy), sym(m)
    k = sp.sqrt(m_ ** 2 - E_ ** 2)
    c = k / (E_ - m_)
    forms = {
        "cosh": (c * sp.sinh(k * X), sp.cosh(k * X)),
        "sinh": (c * sp.cosh(k * X), sp.sinh(k * X)),
        "decay": (-c * sp.exp(-k * X), sp.exp(-k * X)),
        "grow": (c * sp.exp(k * X), sp.exp(k * X)),
    }
    if kind not in forms:
        raise ParameterOutOfRegularRange(f"unknown spinor builder {kind!r}")
    return closed_form_spinor(*forms[kind], energy, V, label)


def hat_free_spinor(V: Potential, f, energy: float, label: str) -> EigenSpinor:
    """Hat form with q_hat = m: psi = (f, (m f - f')/E) for f'' = (m^2 - E^2) f"""
    m_ = sym(V.mass)
    return closed_form_spinor(f, (m_ * f - sp.diff(f, X)) / sym(energy), energy, V, label)


_HAT_TEST_LEVELS = (("decay", 0.3), ("grow", -0.4), ("cosh", 0.7), ("sinh", -0.75), ("cosh", 0.1))


def _hat_free_tests(V: Potential, levels=_HAT_TEST_LEVELS) -> List[EigenSpinor]:
    m = V.mass
    out = []
    for kind, E in levels:
        k = sp.sqrt(sym(m) ** 2 - sym(E) ** 2)
        f = {"decay": sp.exp(-k * X), "grow": sp.exp(k * X), "cosh": sp.cosh(k * X),
             "sinh": sp.sinh(k * X)}[kind]
        out.append(hat_free_spinor(V, f, E, f"{kind}^({E:g})"))
    return out


_FREE_TEST_LEVELS = (("decay", 0.3), ("grow", -0.2), ("cosh", 0.7), ("sinh", -0.6), ("cosh", 0.1))


def _free_tests(V: Potential, energies=_FREE_TEST_LEVELS) -> List[EigenSpinor]:
    return [free_spinor(V, kind, E) for kind, E in energies]


def _he(n: int, x):
    """Probabilists' Hermite polynomial He_n"""
    previous, current = x * 0 + 1, x
    if n == 0:
        return previous
    for j in range(1, n):
        previous, current = current, x * current - j * previous
    return current


def oscillator_growing(V: Potential, n: int, sign: int = 1) -> EigenSpinor:
    """(e^{x^2/4} K_n / (E - m), e^{x^2/4} K_{n-1}) at E = sign * sqrt(m^2 - n)"""
    m = V.mass
    _require(1 <= n <= m * m, f"growing oscillator spinor needs 1 <= n <= m^2, got n={n}")
    energy = sign * float(np.sqrt(m * m - n))
    g = sp.exp(X ** 2 / 4)
    first = g * kn_poly(n, X) / (sym(energy) - sym(m))
    return closed_form_spinor(first, g * kn_poly(n - 1, X), energy, V, f"grow_osc(n={n},{energy:+.4g})")


def oscillator_bound(V: Potential, n: int, sign: int = 1) -> EigenSpinor:
    """(n e^{-x^2/4} He_{n-1} / (E - m), e^{-x^2/4} He_n) at E = sign * sqrt(m^2 + n)"""
    m = V.mass
    _require(n >= 1, f"bound oscillator spinor needs n >= 1, got n={n}")
    energy = sign * float(np.sqrt(m * m + n))
    g = sp.exp(-X ** 2 / 4)
    first = n * g * _he(n - 1, X) / (sym(energy) - sym(m))
    return closed_form_spinor(first, g * _he(n, X), energy, V, f"bound_osc(n={n},{energy:+.4g})")


def _oscillator_tests(V: Potential) -> List[EigenSpinor]:
    return [oscillator_bound(V, 1, 1), oscillator_bound(V, 1, -1), oscillator_bound(V, 2, 1),
            oscillator_bound(V, 2, -1), oscillator_bound(V, 3, 1)]


def coulomb_spinor(V: Potential, n: int) -> EigenSpinor:
    """Bound state n >= 1 of q_hat = m - alpha/r at E_n = sqrt(m^2 - eps_n^2), eps_n = m alpha/(n + alpha)"""
    m, alpha = V.mass, _coulomb_alpha(V)
    eps = m * alpha / (n + alpha)
    energy = float(np.sqrt(m * m - eps * eps))
    y = sym(eps) * X
    a = sym(alpha)
    second = y ** a * sp.exp(-y) * laguerre(n, 2 * a - 1, 2 * y)
    first = (sp.diff(second, X) + V.q.expr * second) / sym(energy)
    return closed_form_spinor(first, second, energy, V, f"coulomb(n={n})")


def _coulomb_alpha(V: Potential) -> float:
    return float(sym(V.mass) - V.q.expr.subs(X, 1))


def radial_seed_spinor(V: Potential, kind: str, energy: float) -> EigenSpinor:
    """Solutions of m sigma3 on the half-line: psi(+-m), psi~(+-m), psi(lambda), psi~(lambda)"""
    m_, E_ = sym(V.mass), sym(energy)
    r = X
    if kind == "psi_m":
        parts, energy = (sp.Integer(1), sp.Integer(0)), V.mass
    elif kind == "psi_tilde_m":
        parts, energy = (-2 * m_ * r, sp.Integer(1)), V.mass
    elif kind == "psi_minus_m":
        parts, energy = (sp.Integer(0), sp.Integer(1)), -V.mass
    elif kind == "psi_tilde_minus_m":
        parts, energy = (sp.Integer(1), -2 * m_ * r), -V.mass
    else:
        _require(abs(energy) < V.mass, f"radial spinor needs |E| < m, got {energy:g}")
        k = sp.sqrt(m_ ** 2 - E_ ** 2)
        if kind == "psi":
            parts = (sp.cosh(k * r), -k / (E_ + m_) * sp.sinh(k * r))
        elif kind == "psi_tilde":
            parts = (sp.exp(-k * r), k / (E_ + m_) * sp.exp(-k * r))
        else:
            raise ParameterOutOfRegularRange(f"unknown radial spinor {kind!r}")
    return closed_form_spinor(*parts, energy, V, f"{kind}({energy:g})")


def radial_kappa1_spinor(V: Potential, kind: str, energy: float) -> EigenSpinor:
    """Solutions of m sigma3 + sigma1/r: phi(+-m), phi~(+-m), phi(lambda), phi~(lambda)"""
    m_, E_ = sym(V.mass), sym(energy)
    r = X
    if kind == "phi_m":
        parts, energy = (sp.Integer(1), 1 / (2 * m_ * r)), V.mass
    elif kind == "phi_tilde_m":
        parts, energy = (r, sp.Integer(0)), V.mass
    elif kind == "phi_minus_m":
        parts, energy = (sp.Integer(0), 1 / r), -V.mass
    elif kind == "phi_tilde_minus_m":
        parts, energy = (-3 * r, 2 * m_ * r ** 2), -V.mass
    else:
        _require(abs(energy) < V.mass, f"radial spinor needs |E| < m, got {energy:g}")
        k = sp.sqrt(m_ ** 2 - E_ ** 2)
        if kind == "phi":
            parts = (sp.sinh(k * r), -(k * sp.cosh(k * r) - sp.sinh(k * r) / r) / (E_ + m_))
        elif kind == "phi_tilde":
            parts = (sp.exp(-k * r), sp.exp(-k * r) * (k + 1 / r) / (E_ + m_))
        else:
            raise ParameterOutOfRegularRange(f"unknown radial spinor {kind!r}")
    return closed_form_spinor(*parts, energy, V, f"{kind}({energy:g})")


def _radial_tests(V: Potential, builder) -> List[EigenSpinor]:
    kinds = ("psi", "psi_tilde") if builder is radial_seed_spinor else ("phi", "phi_tilde")
    return [builder(V, kind, E) for kind in kinds for E in (0.3, -0.7)]


# ===== SHARED ASSEMBLY =====

def _single(name: str, title: str, seed: Potential, u1: EigenSpinor, u2: EigenSpinor,
            interval: Interval, params: Dict[str, float], p_expr, q_expr, tests: List[EigenSpinor],
            levels=None, with_candidates: bool = False, notes: str = "") -> ExampleBundle:
    T = build_transform(u1, u2, interval)
    candidates = (lambda: [T.partner.u1, T.partner.u2]) if with_candidates else None
    return ExampleBundle(name=name, title=title, seed=seed, interval=interval, parameters=params,
                         computed=T.transformed,
                         expected_p=_field(p_expr, seed.domain, "p expected"),
                         expected_q=_field(q_expr, seed.domain, "q expected"),
                         transforms=[T], test_spinors=tests, levels=levels,
                         candidates=candidates, notes=notes)


def _chain_bundle(name: str, title: str, seed: Potential, pairs, interval: Interval,
                  params: Dict[str, float], p_expr, q_expr, tests: List[EigenSpinor],
                  levels=None, tolerance: float = 1e-8, allow_singular_steps: bool = False,
                  notes: str = "") -> ExampleBundle:
    spec = ChainSpec([ChainStep(f, g) for f, g in pairs], interval)
    transforms = compose_transforms(spec, allow_singular=allow_singular_steps)

    def candidates() -> List[EigenSpinor]:
        out: List[EigenSpinor] = []
        for i, T in enumerate(transforms):
            out.extend(sequential_apply(transforms[i + 1:], v) for v in (T.partner.u1, T.partner.u2))
        return out

    expected_p = _field(p_expr, seed.domain, "p expected") if p_expr is not None else None
    expected_q = _field(q_expr, seed.domain, "q expected") if q_expr is not None else None
    return ExampleBundle(name=name, title=title, seed=seed, interval=interval, parameters=params,
                         computed=chain_potential(spec), expected_p=expected_p,
                         expected_q=expected_q, transforms=transforms, test_spinors=tests,
                         levels=levels, candidates=None if allow_singular_steps else candidates,
                         tolerance=tolerance, chain=spec, notes=notes)


# ===== FREE PARTICLE, SINGLE STEP =====

def _ex1(m: float = 1.0, eps: float = 0.5) -> ExampleBundle:
    _require(0 < m and abs(eps) < m, "ex1 needs |eps| < m")
    V = free_mass(m)
    k = sp.sqrt(sym(m) ** 2 - sym(eps) ** 2)
    return _single("ex1", "One-level transparent pseudoscalar potential", V,
                   free_spinor(V, "kernel", m, "u1"), free_spinor(V, "cosh", eps, "u2"),
                   LINE_INTERVAL, {"m": m, "eps": eps}, -sym(eps) + 0 * X, k * sp.tanh(k * X),
                   _free_tests(V), levels=(eps,), with_candidates=True)


def _ex5(m: float = 1.0, eps: float = 0.5) -> ExampleBundle:
    _require(0 < eps < m, "ex5 needs 0 < eps < m")
    V = free_mass(m)
    m_, e_ = sym(m), sym(eps)
    k = sp.sqrt(m_ ** 2 - e_ ** 2)
    u1 = closed_form_spinor(-k / (e_ + m_) * sp.sinh(k * X), sp.cosh(k * X), -eps, V, "u1")
    u2 = free_spinor(V, "grow", eps, "u2")
    denominator = e_ * sp.exp(2 * k * X) + m_
    return _single("ex5", "Transparent mixed scalar-pseudoscalar potential", V, u1, u2,
                   LINE_INTERVAL, {"m": m, "eps": eps}, m_ - 2 * k ** 2 / denominator,
                   -2 * k * e_ / denominator,
                   _free_tests(V, (("decay", 0.3), ("grow", -0.2), ("cosh", 0.7),
                                   ("sinh", -0.6), ("cosh", 0.1))),
                   levels=(-eps,), with_candidates=True)


# ===== FREE PARTICLE, TWO-STEP CHAINS =====

def _two_step_common(m: float, eps: float, eps1: float):
    _require(0 < eps < m, "needs 0 < eps < m")
    _require(abs(eps1) < eps, "needs |eps1| < eps so that k1 > k")
    V = free_mass(m)
    m_, e_, e1 = sym(m), sym(eps), sym(eps1)
    k, k1 = sp.sqrt(m_ ** 2 - e_ ** 2), sp.sqrt(m_ ** 2 - e1 ** 2)
    f1, g1 = free_spinor(V, "kernel", m, "f1"), free_spinor(V, "cosh", eps, "g1")
    f2 = free_spinor(V, "cosh", -eps, "f2")
    return V, k, k1, f1, g1, f2


def _ex2(m: float = 1.0, eps: float = 0.5, eps1: float = 0.3) -> ExampleBundle:
    V, k, k1, f1, g1, f2 = _two_step_common(m, eps, eps1)
    g2 = free_spinor(V, "decay", eps1, "g2")
    t = sp.tanh(k * X)
    q = (k ** 2 - k1 ** 2) / (k1 + k * t) - k * t
    return _chain_bundle("ex2", "Two-level transparent pseudoscalar potential", V,
                         [(f1, g1), (f2, g2)], LINE_INTERVAL, {"m": m, "eps": eps, "eps1": eps1},
                         -sym(eps1) + 0 * X, q, _free_tests(V, (("decay", 0.1), ("grow", -0.2),
                                                                ("cosh", 0.7), ("sinh", -0.6),
                                                                ("cosh", 0.2))),
                         levels=(-eps, eps))


def _ex3(m: float = 1.0, eps: float = 0.5, eps1: float = 0.3) -> ExampleBundle:
    V, k, k1, f1, g1, f2 = _two_step_common(m, eps, eps1)
    g2 = free_spinor(V, "sinh", eps1, "g2")
    t = sp.tanh(k * X)
    s1, c1 = sp.sinh(k1 * X), sp.cosh(k1 * X)
    q = (k1 ** 2 - k ** 2) * s1 / (k1 * c1 - k * t * s1) - k * t
    return _chain_bundle("ex3", "Three-level transparent pseudoscalar potential", V,
                         [(f1, g1), (f2, g2)], LINE_INTERVAL, {"m": m, "eps": eps, "eps1": eps1},
                         -sym(eps1) + 0 * X, q, _free_tests(V, (("decay", 0.1), ("grow", -0.2),
                                                                ("cosh", 0.7), ("sinh", -0.6),
                                                                ("cosh", 0.2))),
                         levels=(-eps, eps1, eps))


def _ex4(m: float = 1.0, eps: float = 0.5, eps1: float = 0.3, B: float = 1.5) -> ExampleBundle:
    _require(B > 1, "ex4 needs B > 1")
    V, k, k1, f1, g1, f2 = _two_step_common(m, eps, eps1)
    m_, e1, B_ = sym(m), sym(eps1), sym(B)
    s1, c1 = sp.sinh(k1 * X), sp.cosh(k1 * X)
    g2 = closed_form_spinor(k1 / (e1 - m_) * (s1 + B_ * c1), c1 + B_ * s1, eps1, V, "g2")
    t, t1 = sp.tanh(k * X), sp.tanh(k1 * X)
    q = (k1 ** 2 - k ** 2) * (1 + B_ * t1) / (k1 * (t1 + B_) - k * t * (1 + B_ * t1)) - k * t
    return _chain_bundle("ex4", "Three-level transparent pseudoscalar potential (B family)", V,
                         [(f1, g1), (f2, g2)], LINE_INTERVAL,
                         {"m": m, "eps": eps, "eps1": eps1, "B": B}, -e1 + 0 * X, q,
                         _free_tests(V, (("decay", 0.1), ("grow", -0.2), ("cosh", 0.7),
                                         ("sinh", -0.6), ("cosh", 0.2))),
                         levels=(-eps, eps1, eps))


# ===== DIRAC OSCILLATOR =====

def _pseudoscalar_bundle(name: str, title: str, V: Potential, u: EigenSpinor, branch: str,
                         params: Dict[str, float], mass, q_expr, levels=None,
                         tolerance: float = 1e-8, notes: str = "") -> ExampleBundle:
    step = pseudoscalar_step(V, u, branch, interval=OSCILLATOR_INTERVAL)
    return ExampleBundle(name=name, title=title, seed=V, interval=OSCILLATOR_INTERVAL,
                         parameters=params, computed=step.potential,
                         expected_p=_field(sym(mass) + 0 * X, V.domain, "p expected"),
                         expected_q=_field(q_expr, V.domain, "q expected"),
                         transforms=[step.transform], test_spinors=_oscillator_tests(V),
                         levels=levels, tolerance=tolerance, step=step, notes=notes)


def _ex6(m: float = 2.0, n: float = 3) -> ExampleBundle:
    n = int(n)
    _require(n % 2 == 1 and 1 <= n <= m * m, "ex6 needs odd n with 1 <= n <= m^2 (K_{n-1} nodeless)")
    V = dirac_oscillator(m)
    u = oscillator_growing(V, n, 1)
    q = X / 2 + (n - 1) * kn_poly(n - 2, X) / kn_poly(n - 1, X) if n > 1 else X / 2
    return _pseudoscalar_bundle("ex6", "Oscillator partner, upper branch", V, u, UPPER,
                                {"m": m, "n": n}, -u.energy, q, levels=None,
                                notes="adds levels at E = m and E = eps_n")


def _ex7(m: float = 2.0, n: float = 2) -> ExampleBundle:
    n = int(n)
    _require(n % 2 == 0 and 2 <= n <= m * m, "ex7 needs even n with 2 <= n <= m^2 (K_n nodeless)")
    V = dirac_oscillator(m)
    u = oscillator_growing(V, n, 1)
    q = -(X / 2 + n * kn_poly(n - 1, X) / kn_poly(n, X))
    return _pseudoscalar_bundle("ex7", "Oscillator partner, lower branch", V, u, LOWER,
                                {"m": m, "n": n}, u.energy, q, levels=None,
                                notes="removes the level E = -m and adds E = eps_n")


def _ex8(m: float = 1.0, B: float = 1.2) -> ExampleBundle:
    _require(abs(B) > 1, "ex8 needs |B| > 1")
    _require(m >= 1, "ex8 needs m >= 1")
    V = dirac_oscillator(m)
    l2 = float(np.sqrt(m * m - 1.0))
    Q = sp.sqrt(sp.pi / 2) * (sym(B) + sp.erf(X / sp.sqrt(2)))
    first = (X * Q * sp.exp(X ** 2 / 4) + sp.exp(-X ** 2 / 4)) / (sym(l2) - sym(m))
    u = closed_form_spinor(first, Q * sp.exp(X ** 2 / 4), l2, V, "u2_erf")
    return _pseudoscalar_bundle("ex8", "Oscillator partner from the erf solution", V, u, UPPER,
                                {"m": m, "B": B}, -l2, X / 2 + sp.exp(-X ** 2 / 2) / Q,
                                levels=None, tolerance=1e-6,
                                notes="adds levels at E = m and E = sqrt(m^2 - 1)")


# ===== SCALAR POTENTIALS (hat representation) =====

def _scalar_well(m: float, lam: float):
    m_, l_ = sym(m), sym(lam)
    k = sp.sqrt(m_ ** 2 - l_ ** 2)
    two_alpha = sp.log((m_ - k) / l_)
    return k, two_alpha


def _ex9(m: float = 1.0, lam: float = 0.5) -> ExampleBundle:
    _require(0 < lam < m, "ex9 needs 0 < lambda < m")
    V = scalar_free(m)
    k, two_alpha = _scalar_well(m, lam)
    u1 = hat_free_spinor(V, 2 * sp.cosh(k * X), lam, "u1_hat")
    step = scalar_step(V, u1, LINE_INTERVAL)
    S = -2 * k ** 2 / (sym(m) + sym(lam) * sp.cosh(2 * k * X + two_alpha))
    return ExampleBundle(name="ex9", title="Transparent scalar well", seed=V, interval=LINE_INTERVAL,
                         parameters={"m": m, "lam": lam}, computed=step.potential,
                         expected_p=_field(0 * X, V.domain), expected_q=_field(sym(m) + S, V.domain),
                         transforms=[step.transform], test_spinors=_hat_free_tests(V),
                         levels=(-lam, lam), candidates=lambda: list(step.partner_columns()),
                         step=step)


def _ex10(m: float = 1.0, lam: float = 0.6, lam1: float = 0.2) -> ExampleBundle:
    _require(0 < lam1 < lam < m, "ex10 needs 0 < lambda1 < lambda < m")
    V = scalar_free(m)
    k, two_alpha = _scalar_well(m, lam)
    k1, two_alpha1 = _scalar_well(m, lam1)
    first = scalar_step(V, hat_free_spinor(V, 2 * sp.cosh(k * X), lam, "u1_hat"), LINE_INTERVAL)
    v1 = hat_free_spinor(V, sp.sinh(k1 * X), lam1, "v1_hat")
    second = scalar_step(first.potential, first.map(v1), LINE_INTERVAL)

    def G(t, a):
        return (k1 ** 2 - k ** 2) * sp.sinh(a) / (k1 * sp.cosh(a) - k * t * sp.sinh(a))

    S = G(sp.tanh(k * X + two_alpha), k1 * X + two_alpha1) - G(sp.tanh(k * X), k1 * X)

    def candidates() -> List[EigenSpinor]:
        return list(second.partner_columns()) + [second.map(v) for v in first.partner_columns()]

    tests = _hat_free_tests(V, (("decay", 0.3), ("cosh", 0.7), ("sinh", -0.4), ("grow", -0.75),
                                ("cosh", 0.1)))
    return ExampleBundle(name="ex10", title="Four-level transparent scalar potential", seed=V,
                         interval=LINE_INTERVAL, parameters={"m": m, "lam": lam, "lam1": lam1},
                         computed=second.potential, expected_p=_field(0 * X, V.domain),
                         expected_q=_field(sym(m) + S, V.domain),
                         transforms=[first.transform, second.transform], test_spinors=tests,
                         levels=(-lam, -lam1, lam1, lam), candidates=candidates,
                         step=(first, second))


def _ex11(m: float = 1.0, alpha: float = 1.0, k: float = 1) -> ExampleBundle:
    k = int(k)
    _require(alpha > 0 and m > 0 and k >= 1, "ex11 needs alpha > 0, m > 0 and k >= 1")
    V = scalar_coulomb(m, alpha)
    a, b = coulomb_spinor(V, k), coulomb_spinor(V, k + 1)
    pairs = [(a, sigma3_mirror(a)), (b, sigma3_mirror(b))]
    q_expr = None
    if k == 1:
        m_, al = sym(m), sym(alpha)
        S = (-(al + 2) / X + 2 * m_ * (2 * m_ * X - 2 * al - 3)
             / (2 * m_ ** 2 * X ** 2 - 2 * m_ * (2 * al + 3) * X + (al + 2) * (2 * al + 3)))
        q_expr = m_ + S
    tests = [coulomb_spinor(V, n) for n in (k + 2, k + 3)]
    interval = COULOMB_INTERVAL if k <= 2 else (0.1, 40.0)
    return _chain_bundle("ex11", "Scalar Coulomb partner with two levels removed", V, pairs,
                         interval, {"m": m, "alpha": alpha, "k": k}, 0 * X,
                         q_expr, tests, levels=None, tolerance=1e-6, allow_singular_steps=True,
                         notes="the single steps are singular; the two-step result is regular")


# ===== RADIAL PROBLEMS =====

def _ex12(m: float = 1.0, kappa: float = 1) -> ExampleBundle:
    _require(m > 0, "ex12 needs m > 0")
    V = radial_mass(m)
    tests = _radial_tests(V, radial_seed_spinor)
    if int(kappa) == 1:
        u1, u2 = radial_seed_spinor(V, "psi_m", m), radial_seed_spinor(V, "psi_tilde_minus_m", -m)
    elif int(kappa) == -1:
        u1, u2 = radial_seed_spinor(V, "psi_minus_m", -m), radial_seed_spinor(V, "psi_tilde_m", m)
    else:
        raise ParameterOutOfRegularRange("ex12 builds kappa = 1 or kappa = -1")
    return _single("ex12", "Radial free particle from the constant mass", V, u1, u2,
                   RADIAL_INTERVAL, {"m": m, "kappa": kappa}, sym(m) + 0 * X,
                   sym(int(kappa)) / X, tests)


def _ex12c(m: float = 1.0) -> ExampleBundle:
    """Second step over kappa = 1 with phi~(m), phi~(-m): kappa = 2"""
    _require(m > 0, "ex12c needs m > 0")
    V = radial_mass(m)
    T1 = build_transform(radial_seed_spinor(V, "psi_m", m),
                         radial_seed_spinor(V, "psi_tilde_minus_m", -m), RADIAL_INTERVAL)
    V1 = T1.transformed
    u1 = closed_form_spinor(X, sp.Integer(0), m, V1, "phi_tilde_m")
    u2 = closed_form_spinor(-3 * X, 2 * sym(m) * X ** 2, -m, V1, "phi_tilde_minus_m")
    T2 = build_transform(u1, u2, RADIAL_INTERVAL)
    return ExampleBundle(name="ex12c", title="Radial free particle, kappa raised to 2", seed=V,
                         interval=RADIAL_INTERVAL, parameters={"m": m}, computed=T2.transformed,
                         expected_p=_field(sym(m) + 0 * X, V.domain),
                         expected_q=_field(2 / X, V.domain), transforms=[T1, T2],
                         test_spinors=_radial_tests(V, radial_seed_spinor))


def _ex13(m: float = 1.0, lam: float = 0.5, variant: float = 1) -> ExampleBundle:
    _require(0 < lam < m, "ex13 needs 0 < lambda < m")
    V = radial_free(m, 1.0)
    m_, l_ = sym(m), sym(lam)
    k = sp.sqrt(m_ ** 2 - l_ ** 2)
    r = X
    C, S = sp.cosh(k * r), sp.sinh(k * r)
    variant = int(variant)
    if variant == 1:
        u1, u2 = radial_kappa1_spinor(V, "phi_tilde_m", m), radial_kappa1_spinor(V, "phi_tilde", lam)
        p, q = -l_, -1 / r - k ** 2 * r / (1 + k * r)
    elif variant == 2:
        u1, u2 = radial_kappa1_spinor(V, "phi_tilde_m", m), radial_kappa1_spinor(V, "phi", lam)
        p, q = -l_, k ** 2 * r * S / (k * r * C - S) - 1 / r
    elif variant == 3:
        u1, u2 = radial_kappa1_spinor(V, "phi", lam), radial_kappa1_spinor(V, "phi", -lam)
        p, q = m_, (k * r * C * S - k ** 2 * r ** 2) / (r * S * (k * r * C - S))
    elif variant == 4:
        u1, u2 = radial_kappa1_spinor(V, "phi_tilde", lam), radial_kappa1_spinor(V, "phi_tilde", -lam)
        p, q = m_, k / (1 + k * r)
    else:
        raise ParameterOutOfRegularRange("ex13 variants are 1 to 4")
    return _single("ex13", "Radial partners of the kappa = 1 free particle", V, u1, u2,
                   RADIAL_INTERVAL, {"m": m, "lam": lam, "variant": variant}, p + 0 * r, q,
                   _radial_tests(V, radial_kappa1_spinor))


def _ex14(m: float = 1.0, c: float = 1.0, lam: float = 0.5, variant: float = 1) -> ExampleBundle:
    V = radial_free(m, 1.0)
    m_, r = sym(m), X
    variant = int(variant)
    if variant == 1:
        _require(c > 0, "ex14 needs c > 0")
        c_ = sym(c)
        u1 = closed_form_spinor(c_ + 2 * m_ * r, c_ / (2 * m_ * r), m, V, "c*phi_m + 2m*phi_tilde_m")
        u2 = radial_kappa1_spinor(V, "phi_tilde_minus_m", -m)
        denominator = 8 * m_ ** 3 * r ** 3 + c_ * (3 + 4 * m_ ** 2 * r ** 2)
        p = m_ - 12 * m_ * c_ / denominator
        q = -1 / r + 8 * m_ ** 2 * r * (2 * c_ + 3 * m_ * r) / denominator
        params = {"m": m, "c": c, "variant": variant}
    elif variant == 2:
        _require(0 < abs(lam) < m, "ex14 variant 2 needs 0 < |lambda| < m")
        l_ = sym(lam)
        k = sp.sqrt(m_ ** 2 - l_ ** 2)
        C, S = sp.cosh(k * r), sp.sinh(k * r)
        u1, u2 = radial_kappa1_spinor(V, "phi_m", m), radial_kappa1_spinor(V, "phi", lam)
        denominator = 2 * k * m_ * r * C + (l_ - m_) * S
        p = -(2 * k * m_ * r * l_ * C + (k ** 2 + m_ * (m_ - l_)) * S) / denominator
        q = k * (2 * k * m_ * r * S - (m_ + l_) * C) / denominator
        params = {"m": m, "lam": lam, "variant": variant}
    else:
        raise ParameterOutOfRegularRange("ex14 variants are 1 and 2")
    tests = _radial_tests(V, radial_kappa1_spinor)
    return _single("ex14", "Radial mixed scalar-pseudoscalar partners", V, u1, u2, RADIAL_INTERVAL,
                   params, p, q, tests)


EXAMPLES: Dict[str, Callable[..., ExampleBundle]] = {
    'ex1': _ex1,
    'ex2': _ex2,
    'ex3': _ex3,
    'ex4': _ex4,
    'ex5': _ex5,
    'ex6': _ex6,
    'ex7': _ex7,
    'ex8': _ex8,
    'ex9': _ex9,
    'ex10': _ex10,
    'ex11': _ex11,
    'ex12': _ex12,
    'ex12c': _ex12c,
    'ex13': _ex13,
    'ex14': _ex14,
}

_PARAM_ALIASES = {'epsilon': 'eps', 'epsilon1': 'eps1', 'lambda': 'lam', 'lambda1': 'lam1',
                  'a': 'alpha'}


def example(name: str, **params: float) -> ExampleBundle:
    if name not in EXAMPLES:
        raise UnknownExample(f"unknown example {name!r}; known: {', '.join(EXAMPLES)}")
    params = {_PARAM_ALIASES.get(key, key): float(value) for key, value in params.items()}
    try:
        bundle = EXAMPLES[name](**params)
    except TypeError as exc:
        raise UnknownExample(f"bad parameters for {name!r}: {exc}") from exc
    logger.info("example built", example=name, parameters=bundle.parameters)
    return bundle


def list_examples() -> List[ExampleInfo]:
    infos = []
    for name in EXAMPLES:
        try:
            infos.append(example(name).info())
        except Exception as exc:
            logger.error("❌ example failed to build", example=name, error=str(exc))
    return infos


# ===== CHECKS =====

def check_example(name: str, grid=None, tolerance: Optional[float] = None,
                  bundle: Optional[ExampleBundle] = None, **params: float) -> ResidualReport:
    """Computed V1 against the closed form, p and q separately, scaled by 1 + |closed form|"""
    bundle = bundle or example(name, **params)
    tolerance = bundle.tolerance if tolerance is None else tolerance
    xs = default_grid(bundle.interval) if grid is None else np.asarray(grid, dtype=float)
    label = f"{xs[0]:g}:{xs[-1]:g}:{len(xs)}"
    gaps = {}
    for part, expected in (("p", bundle.expected_p), ("q", bundle.expected_q)):
        if expected is None:
            continue
        computed = getattr(bundle.computed, part)(xs)
        reference = expected(xs)
        gaps[part] = np.abs(computed - reference) / (1.0 + np.abs(reference))
    if not gaps:
        return ResidualReport(check="closed_form", example=bundle.name, grid=label,
                              max_residual=0.0, tolerance=tolerance, passed=True,
                              details={"skipped": "no closed form for these parameters"})
    worst = np.max(np.stack(list(gaps.values())), axis=0)
    report = ResidualReport.from_residuals(
        "closed_form", xs, worst, tolerance, bundle.name, label,
        **{f"{part}_max": float(np.max(g)) for part, g in gaps.items()})
    log = logger.info if report.passed else logger.warning
    log("closed form check", example=bundle.name, max_residual=report.max_residual,
        passed=report.passed)
    return report


def _away_from_nodes(xs: np.ndarray, transforms: Sequence[TransformFunction],
                     gap: float = 0.05) -> np.ndarray:
    nodes = [n for T in transforms for n in (T.nodes or ())]
    if not nodes:
        return xs
    keep = np.min(np.abs(xs[:, np.newaxis] - np.asarray(nodes)[np.newaxis, :]), axis=1) > gap
    return xs[keep]


def run_example_suite(name: str, tolerance: Optional[float] = None, grid=None,
                      **params: float) -> List[ResidualReport]:
    """closed form, intertwining, factorization, diagram and level checks of one example"""
    bundle = example(name, **params)
    tolerance = bundle.tolerance if tolerance is None else tolerance
    reports = [check_example(name, grid, tolerance, bundle=bundle)]
    xs = default_grid(bundle.interval) if grid is None else np.asarray(grid, dtype=float)
    xs = _away_from_nodes(xs, bundle.transforms)
    suite_tol = max(tolerance, 1e-7)
    for psi in bundle.test_spinors:
        current = psi
        for T in bundle.transforms:
            reports.append(intertwining_residual(T, current, xs, suite_tol, bundle.name))
            reports.extend(factorization_residual(T, current, xs, suite_tol, bundle.name))
            current = apply_forward(T, current)
    if bundle.step is not None and hasattr(bundle.step, "branch"):
        reports.extend(susy_diagram_check(bundle.step, xs, suite_tol, bundle.name))
    if bundle.levels is not None and bundle.candidates is not None:
        found = discrete_levels(bundle.candidates(), bundle.interval)
        expected = sorted(bundle.levels)
        matched = len(found) == len(expected) and all(
            abs(a - b) <= 1e-9 for a, b in zip(found, expected))
        reports.append(ResidualReport(check="discrete_levels", example=bundle.name,
                                      max_residual=0.0 if matched else float("inf"),
                                      tolerance=0.0, passed=matched,
                                      details={"found": found, "expected": expected}))
    return reports


# ===== FIGURES =====

FIGURES = ("fig2", "fig3", "fig4", "fig5")
FIGURE_VARIANTS = {'fig2': ("default", "swapped")}


def figure_data(figure: str, variant: str = "default", points: Optional[int] = None) -> pd.DataFrame:
    """Tabulated curves of one figure; columns x and one per curve"""
    if figure not in FIGURES:
        raise UnknownExample(f"unknown figure {figure!r}; known: {', '.join(FIGURES)}")
    allowed = FIGURE_VARIANTS.get(figure, ("default",))
    if variant not in allowed:
        raise UnknownExample(f"{figure} variants: {', '.join(allowed)}")
    if figure == "fig2":
        # curve 1: B = 1.5, curve 2: B = 1.000005 at m = 1, eps = 0.5
        eps1 = (0.45, 0.3) if variant == "default" else (0.3, 0.45)
        xs = np.linspace(-10.0, 10.0, points or 401)
        curves = {f"q2_B{B:g}_eps1_{e:g}": example("ex4", m=1.0, eps=0.5, eps1=e, B=B).computed.q(xs)
                  for B, e in zip((1.5, 1.000005), eps1)}
    elif figure == "fig3":
        xs = np.linspace(-6.0, 6.0, points or 241)
        curves = {f"q1_B{B:g}": example("ex8", m=1.0, B=B).computed.q(xs) for B in (1.0002, 1.2)}
        curves["q0"] = xs / 2
    elif figure == "fig4":
        xs = np.linspace(-15.0, 15.0, points or 601)
        curves = {}
        for lam1 in (0.58, 0.2):
            V = example("ex10", m=1.0, lam=0.6, lam1=lam1).computed
            curves[f"S2_lam1_{lam1:g}"] = V.q(xs) - 1.0
    else:
        xs = np.linspace(0.2, 40.0, points or 400)
        V = example("ex11", m=1.0, alpha=1.0, k=4).computed
        curves = {"S0": -1.0 / xs, "S2_k4": V.q(xs) - 1.0}
    frame = pd.DataFrame({"x": xs, **curves})
    logger.info("figure data", figure=figure, variant=variant, rows=len(frame),
                columns=list(frame.columns))
    return frame


def barrier_width(xs: np.ndarray, f: np.ndarray) -> float:
    """Measure of {f >= max f / 2} on the grid"""
    step = float(xs[1] - xs[0])
    return float(np.count_nonzero(f >= 0.5 * np.max(f)) * step)


def sup_deviation(xs: np.ndarray, f: np.ndarray, reference: np.ndarray) -> float:
    return float(np.max(np.abs(f - reference)))


def well_separation(xs: np.ndarray, f: np.ndarray) -> float:
    """Distance between the two deepest local minima reaching half the global depth"""
    inner = np.arange(1, len(f) - 1)
    minima = inner[(f[inner] < f[inner - 1]) & (f[inner] <= f[inner + 1])
                   & (f[inner] <= 0.5 * np.min(f))]
    if len(minima) < 2:
        return 0.0
    deepest = minima[np.argsort(f[minima])[:2]]
    return float(abs(xs[deepest[0]] - xs[deepest[1]]))


# ===== IDENTITY SUITE =====

def run_identity_suite(tolerance: Optional[float] = None) -> List[ResidualReport]:
    """Operator and determinant identities on the one- and two-step free-particle transforms"""
    tolerance = 1e-8 if tolerance is None else tolerance
    reports: List[ResidualReport] = []
    one = example("ex1")
    T = one.transforms[0]
    xs = default_grid(one.interval)

    def record(check: str, values, tol: float = tolerance, label: str = "ex1", **details) -> None:
        report = ResidualReport.from_residuals(check, xs, values, tol, label,
                                               f"{xs[0]:g}:{xs[-1]:g}:{len(xs)}", **details)
        (logger.info if report.passed else logger.warning)(
            "identity check", check=check, max_residual=report.max_residual)
        reports.append(report)

    record("matrix_dirac", matrix_dirac_residual(T, xs))
    record("log_derivative_antisymmetry", antisymmetry_residual(T, xs))
    record("trace_identity", [trace_identity_residual(T.log_derivative(xs))])
    p_log, q_log = potential_by_log_derivative(T, xs)
    record("potential_two_routes",
           np.maximum(np.abs(p_log - T.transformed.p(xs)), np.abs(q_log - T.transformed.q(xs))))
    record("partner_regenerates_seed",
           np.maximum(np.abs(T.partner.transformed.p(xs) - T.parent.p(xs)),
                      np.abs(T.partner.transformed.q(xs) - T.parent.q(xs))))
    field = SpinorField(sp.exp(-X ** 2 / 8) * sp.cos(X), sp.sin(X / 2) / sp.cosh(X / 3), label="test field")
    partner_field = SpinorField(sp.tanh(X) / sp.cosh(X / 4), sp.exp(-X ** 2 / 16), label="partner field")
    reports.extend(superalgebra_residuals(T, field, partner_field, xs, tolerance, "ex1"))

    two = example("ex2")
    bound = two.transforms[0].partner.u2
    ratio = norm_preservation(two.transforms[1], bound, (-20.0, 20.0))
    record("norm_preservation", [abs(ratio - 1.0)], 1e-6, "ex2", ratio=ratio)

    three = example("ex3")
    spinors = three.chain.spinors
    probe = three.test_spinors[0]
    record("wronskian_bracket", wronskian_bracket_residual(spinors, probe, xs), 1e-7, "ex3")
    record("wronskian_jacobi", jacobi_residual(spinors, xs), 1e-7, "ex3")
    sequential = three.transforms[1].transformed
    record("chain_vs_sequential",
           np.maximum(np.abs(three.computed.p(xs) - sequential.p(xs)),
                      np.abs(three.computed.q(xs) - sequential.q(xs))), 1e-8, "ex3")
    mapped = sequential_apply(three.transforms, probe)(xs)
    chained = chain_apply(three.chain, probe, xs)
    record("chain_apply_vs_sequential",
           np.linalg.norm(mapped - chained, axis=-1) / (1.0 + np.linalg.norm(mapped, axis=-1)),
           1e-8, "ex3")
    return reports
