#!/usr/bin/env python3
# dirac/potential.py
"""
Canonical-form Dirac potentials V = p sigma3 + q sigma1 and the seed catalog
"""

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Callable, Dict, Optional

import numpy as np
import structlog

import config
from dirac.core import (
    FULL_LINE,
    SIGMA1,
    SIGMA3,
    X,
    Interval,
    ScalarField,
    SymbolicField,
    as_grid,
    constant_field,
    probe_grid,
    sym,
)
from dirac.exceptions import OrderUnavailable, UnknownSeed

logger = structlog.get_logger(__name__)

SIGMA3_REP = "sigma3"
HAT_REP = "hat"


class PotentialClass(str, Enum):
    GENERAL = "general"
    PSEUDOSCALAR = "pseudoscalar"
    SCALAR = "scalar"
    FREE = "free"  # constant mass term only: both pseudoscalar and scalar


@dataclass(frozen=True)
class Potential:
    """
    Dirac potential in canonical form. In the hat representation the stored
    pair is (p_hat, q_hat) = (-q, p) of the equivalent sigma3 potential.
    """
    p: ScalarField
    q: ScalarField
    class_tag: PotentialClass
    mass: Optional[float] = None
    representation: str = SIGMA3_REP
    name: str = ""
    domain: Interval = FULL_LINE
    source: Optional["Potential"] = field(default=None, compare=False, repr=False)

    @property
    def max_deriv_order(self) -> int:
        return min(self.p.max_order, self.q.max_order)

    @property
    def is_pseudoscalar(self) -> bool:
        return self.class_tag in (PotentialClass.PSEUDOSCALAR, PotentialClass.FREE)

    @property
    def is_scalar(self) -> bool:
        return self.class_tag in (PotentialClass.SCALAR, PotentialClass.FREE)

    @property
    def is_hat(self) -> bool:
        return self.representation == HAT_REP

    def matrix_jet(self, x, order: int) -> np.ndarray:
        """Jet of the matrix V with shape (order+1, N, 2, 2)"""
        if order > self.max_deriv_order:
            raise OrderUnavailable(
                f"potential {self.name!r} provides derivatives up to {self.max_deriv_order}")
        arr, _ = as_grid(x)
        pj = self.p.jet(arr, order)
        qj = self.q.jet(arr, order)
        return pj[..., np.newaxis, np.newaxis] * SIGMA3 + qj[..., np.newaxis, np.newaxis] * SIGMA1

    def matrix(self, x) -> np.ndarray:
        arr, scalar = as_grid(x)
        value = self.matrix_jet(arr, 0)[0]
        return value[0] if scalar else value

    def sigma3_fields(self):
        """(p, q) of the equivalent sigma3 potential"""
        if not self.is_hat:
            return self.p, self.q
        return self.q, _negated(self.p)

    @cached_property
    def hat(self) -> "Potential":
        if self.is_hat:
            return self
        return to_hat(self)

    @cached_property
    def sigma3(self) -> "Potential":
        if not self.is_hat:
            return self
        if self.source is not None and not self.source.is_hat:
            return self.source
        return from_hat(self)

    def agrees_with(self, other: "Potential", tol: float = 1e-12) -> bool:
        """Same representation and the same p, q on the probe grid"""
        if self is other:
            return True
        if self.representation != other.representation:
            return False
        xs = probe_grid(self.domain)
        with np.errstate(all="ignore"):
            dp = np.abs(self.p(xs) - other.p(xs))
            dq = np.abs(self.q(xs) - other.q(xs))
        return bool(np.all(dp <= tol * (1.0 + np.abs(self.p(xs))))
                    and np.all(dq <= tol * (1.0 + np.abs(self.q(xs)))))


def _negated(f: ScalarField) -> ScalarField:
    if isinstance(f, SymbolicField):
        return SymbolicField(-f.expr, domain=f.domain, name=f"-({f.name})", max_order=f.max_order)
    return ScalarField(lambda x, k: -f.jet(x, k), f.max_order, f.domain, f"-({f.name})")


def _is_constant(f: ScalarField, xs: np.ndarray) -> Optional[float]:
    if isinstance(f, SymbolicField) and f.is_constant:
        return float(f.expr)
    with np.errstate(all="ignore"):
        values = np.asarray(f(xs), dtype=float)
    if not np.all(np.isfinite(values)):
        return None
    tol = config.NUMERICS_CONFIG['constant_tolerance'] * max(1.0, float(np.max(np.abs(values))))
    if np.max(np.abs(values - values[0])) <= tol:
        return float(values[0])
    return None


def _vanishes(f: ScalarField, xs: np.ndarray) -> bool:
    value = _is_constant(f, xs)
    return value is not None and abs(value) <= config.NUMERICS_CONFIG['constant_tolerance']


def make_canonical(p: ScalarField, q: ScalarField, name: str = "",
                   representation: str = SIGMA3_REP, domain: Optional[Interval] = None,
                   mass: Optional[float] = None) -> Potential:
    """
    Build a Potential and detect its class on the probe grid: constant p of
    the sigma3 form is pseudoscalar, vanishing q of the sigma3 form is scalar.
    """
    if representation not in (SIGMA3_REP, HAT_REP):
        raise ValueError(f"unknown representation {representation!r}")
    if domain is None:
        domain = (max(p.domain[0], q.domain[0]), min(p.domain[1], q.domain[1]))
    xs = probe_grid(domain)
    p3, q3 = (p, q) if representation == SIGMA3_REP else (q, _negated(p))

    constant_p = _is_constant(p3, xs)
    zero_q = _vanishes(q3, xs)
    if constant_p is not None and zero_q:
        class_tag, detected = PotentialClass.FREE, abs(constant_p)
    elif constant_p is not None:
        class_tag, detected = PotentialClass.PSEUDOSCALAR, constant_p
    elif zero_q:
        class_tag, detected = PotentialClass.SCALAR, mass
    else:
        class_tag, detected = PotentialClass.GENERAL, None

    if class_tag == PotentialClass.PSEUDOSCALAR:
        mass = detected
    elif mass is None:
        mass = detected
    logger.debug("potential classified", name=name, class_tag=class_tag.value, mass=mass)
    return Potential(p=p, q=q, class_tag=class_tag, mass=mass, representation=representation,
                     name=name, domain=domain)


def to_hat(V: Potential) -> Potential:
    """Conjugate by the fixed unitary: p_hat = -q, q_hat = p"""
    if V.is_hat:
        return V
    W = make_canonical(_negated(V.q), V.p, name=f"{V.name}^", representation=HAT_REP,
                       domain=V.domain, mass=V.mass)
    return Potential(p=W.p, q=W.q, class_tag=W.class_tag, mass=W.mass, representation=HAT_REP,
                     name=W.name, domain=W.domain, source=V)


def from_hat(V: Potential) -> Potential:
    if not V.is_hat:
        return V
    name = V.name[:-1] if V.name.endswith("^") else V.name
    W = make_canonical(V.q, _negated(V.p), name=name, domain=V.domain, mass=V.mass)
    return Potential(p=W.p, q=W.q, class_tag=W.class_tag, mass=W.mass, representation=SIGMA3_REP,
                     name=W.name, domain=W.domain, source=V)


def potential_at(V: Potential, x: float, k: int) -> np.ndarray:
    """k-th derivative of the matrix V at a single point"""
    return V.matrix_jet(np.array([float(x)]), k)[k][0]


def same_potential(a: Potential, b: Potential) -> bool:
    return a is b or a.agrees_with(b)


# ===== SEED CATALOG =====

def radial_domain() -> Interval:
    return (config.R_MIN, np.inf)


def free_mass(m: float = 1.0) -> Potential:
    """V = m sigma3"""
    return make_canonical(constant_field(m), constant_field(0.0), name=f"free_mass(m={m:g})")


def dirac_oscillator(m: float = 1.0) -> Potential:
    """V = m sigma3 + (x/2) sigma1"""
    return make_canonical(constant_field(m), SymbolicField(X / 2, name="x/2"),
                          name=f"dirac_oscillator(m={m:g})")


def scalar_coulomb(m: float = 1.0, alpha: float = 1.0) -> Potential:
    """Hat form: q_hat = m - alpha/r on the half-line"""
    domain = radial_domain()
    return make_canonical(constant_field(0.0, domain),
                          SymbolicField(sym(m) - sym(alpha) / X, domain=domain, name="m-alpha/r"),
                          name=f"scalar_coulomb(m={m:g},alpha={alpha:g})",
                          representation=HAT_REP, domain=domain, mass=m)


def radial_free(m: float = 1.0, kappa: float = 1.0) -> Potential:
    """Radial free particle: p = m, q = kappa/r"""
    domain = radial_domain()
    return make_canonical(constant_field(m, domain),
                          SymbolicField(sym(kappa) / X, domain=domain, name="kappa/r"),
                          name=f"radial_free(m={m:g},kappa={kappa:g})", domain=domain)


def radial_mass(m: float = 1.0) -> Potential:
    """V = m sigma3 restricted to the half-line"""
    domain = radial_domain()
    return make_canonical(constant_field(m, domain), constant_field(0.0, domain),
                          name=f"radial_mass(m={m:g})", domain=domain)


def scalar_free(m: float = 1.0) -> Potential:
    """Free massive particle in the hat representation: q_hat = m"""
    return make_canonical(constant_field(0.0), constant_field(m), name=f"scalar_free(m={m:g})",
                          representation=HAT_REP, mass=m)


SEEDS: Dict[str, Callable[..., Potential]] = {
    'free_mass': free_mass,
    'dirac_oscillator': dirac_oscillator,
    'scalar_coulomb': scalar_coulomb,
    'radial_free': radial_free,
    'radial_mass': radial_mass,
    'scalar_free': scalar_free,
}

_ALIASES = {'k': 'kappa', 'a': 'alpha'}


def seed_catalog(name: str, **params: float) -> Potential:
    if name not in SEEDS:
        raise UnknownSeed(f"unknown seed {name!r}; known: {', '.join(sorted(SEEDS))}")
    params = {_ALIASES.get(key, key): float(value) for key, value in params.items()}
    try:
        return SEEDS[name](**params)
    except TypeError as exc:
        raise UnknownSeed(f"bad parameters for seed {name!r}: {exc}") from exc


def parse_seed(spec: str) -> Potential:
    """Parse 'name:key=value,key=value', e.g. 'free_mass:m=1'"""
    name, _, arguments = spec.strip().partition(":")
    params: Dict[str, float] = {}
    for item in filter(None, (a.strip() for a in arguments.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise UnknownSeed(f"seed parameter {item!r} is not key=value")
        try:
            params[key.strip()] = float(value)
        except ValueError as exc:
            raise UnknownSeed(f"seed parameter {item!r} is not numeric") from exc
    return seed_catalog(name.strip(), **params)
