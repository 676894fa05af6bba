#!/usr/bin/env python3
# dirac/chain.py
"""
n-step Darboux chains through block Wronskians.

Rows 2l-1 and 2l of the 2n x 2n block Wronskian hold the (l-1)-th
derivatives of the first and second components; columns run over
f1, g1, ..., fn, gn.
"""

import itertools
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import structlog

import config
from dirac.core import (
    GAMMA,
    Interval,
    ScalarField,
    as_grid,
    batched_determinant,
    commutator,
    find_nodes,
    jet_quotient,
    working_interval,
)
from dirac.darboux import (
    TransformFunction,
    apply_adjoint,
    apply_forward,
    build_transform,
)
from dirac.exceptions import ChainSpecError, DarbouxError, DegenerateOnGrid, EqualEigenvalues
from dirac.potential import Potential, make_canonical, same_potential
from dirac.spinor import EigenSpinor

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class ChainStep:
    f: EigenSpinor
    g: EigenSpinor

    @property
    def eigenvalues(self) -> Tuple[float, float]:
        return self.f.energy, self.g.energy


class ChainSpec:
    """Ordered steps (f_i at lambda_i, g_i at mu_i) over one seed potential"""

    def __init__(self, steps: Sequence[ChainStep], interval: Optional[Interval] = None,
                 max_depth: Optional[int] = None, allow_deep: bool = False,
                 allow_singular: bool = False):
        self.steps = list(steps)
        if not self.steps:
            raise ChainSpecError("a chain needs at least one step")
        self.parent = self.steps[0].f.parent
        self.interval = interval or working_interval(self.parent.domain)
        self.allow_singular = allow_singular
        cap = config.MAX_CHAIN_DEPTH if max_depth is None else max_depth
        if self.depth > cap and not allow_deep:
            raise ChainSpecError(f"chain depth {self.depth} exceeds the cap {cap}")
        if self.depth > cap:
            logger.warning("⚠️ deep chain: block determinants may be ill-conditioned",
                           depth=self.depth, cap=cap)
        for s in self.spinors:
            if not same_potential(s.parent, self.parent):
                raise DarbouxError(f"{s.label!r} does not solve the seed {self.parent.name!r}")
        energies = [e for step in self.steps for e in step.eigenvalues]
        for i, a in enumerate(energies):
            for b in energies[i + 1:]:
                if abs(a - b) <= 1e-12:
                    raise EqualEigenvalues(f"eigenvalue {a:g} repeats in the chain")
        self.nodes = find_nodes(lambda xs: block_wronskian(self.spinors, xs), self.interval)
        if self.nodes and not allow_singular:
            raise DegenerateOnGrid("block Wronskian vanishes on the working interval", self.nodes)

    @property
    def depth(self) -> int:
        return len(self.steps)

    @property
    def spinors(self) -> List[EigenSpinor]:
        return [s for step in self.steps for s in (step.f, step.g)]

    @property
    def eigenvalues(self) -> List[float]:
        return [e for step in self.steps for e in step.eigenvalues]


def _column_jets(spinors: Sequence[EigenSpinor], x: np.ndarray, order: int) -> np.ndarray:
    """(order+1, N, 2, columns)"""
    return np.stack([s.jet(x, order) for s in spinors], axis=-1)


def _rows(jets: np.ndarray, n: int) -> np.ndarray:
    """First 2n rows of the block arrangement, shape (N, 2n, columns)"""
    block = jets[:n]
    count, points, _, columns = block.shape
    return block.transpose(1, 0, 2, 3).reshape(points, 2 * count, columns)


def block_wronskian(spinors: Sequence[EigenSpinor], x) -> np.ndarray:
    """W(f1, g1, ..., fn, gn)"""
    arr, scalar = as_grid(x)
    if not spinors:
        return 1.0 if scalar else np.ones(len(arr))
    if len(spinors) % 2:
        raise DarbouxError("block Wronskian needs an even number of spinors")
    n = len(spinors) // 2
    jets = _column_jets(spinors, arr, n - 1)
    with np.errstate(all="ignore"):
        value = batched_determinant(_rows(jets, n), "block Wronskian")
    return float(value[0]) if scalar else value


def odd_wronskians(spinors: Sequence[EigenSpinor], psi: EigenSpinor, x):
    """(W1, W2): 2n+1 determinants closed by the n-th derivative of the upper or lower components"""
    arr, scalar = as_grid(x)
    if len(spinors) % 2:
        raise DarbouxError("odd Wronskians need an even number of spinors before psi")
    n = len(spinors) // 2
    jets = _column_jets(list(spinors) + [psi], arr, n)
    base = _rows(jets, n)
    w1 = batched_determinant(np.concatenate([base, jets[n][:, np.newaxis, 0, :]], axis=1), "W1")
    w2 = batched_determinant(np.concatenate([base, jets[n][:, np.newaxis, 1, :]], axis=1), "W2")
    if scalar:
        return float(w1[0]), float(w2[0])
    return w1, w2


def row_replaced_dets(spinors: Sequence[EigenSpinor], x):
    """
    (R1, R2, Q1, Q2). With n pairs and rows numbered from 1:
    R1 replaces row 2n-1 by the n-th derivatives of the first components,
    R2 replaces row 2n by those of the second components,
    Q1 replaces row 2n by the first components, Q2 row 2n-1 by the second.
    """
    arr, scalar = as_grid(x)
    n = len(spinors) // 2
    jets = _column_jets(spinors, arr, n)
    base = _rows(jets, n)
    upper, lower = jets[n][:, 0, :], jets[n][:, 1, :]

    def replaced(row: int, values: np.ndarray, label: str) -> np.ndarray:
        m = base.copy()
        m[:, row, :] = values
        return batched_determinant(m, label)

    dets = (replaced(2 * n - 2, upper, "R1"), replaced(2 * n - 1, lower, "R2"),
            replaced(2 * n - 1, upper, "Q1"), replaced(2 * n - 2, lower, "Q2"))
    if scalar:
        return tuple(float(d[0]) for d in dets)
    return dets


def wronskian_derivative(spinors: Sequence[EigenSpinor], x) -> np.ndarray:
    """d/dx of the block Wronskian as the sum over rows of row-differentiated determinants"""
    arr, _ = as_grid(x)
    n = len(spinors) // 2
    jets = _column_jets(spinors, arr, n)
    base = _rows(jets, n)
    moved = _rows(jets[1:], n)
    total = np.zeros(len(arr))
    for row in range(2 * n):
        m = base.copy()
        m[:, row, :] = moved[:, row, :]
        total += batched_determinant(m, "dW")
    return total


def chain_matrix(c: ChainSpec, x) -> np.ndarray:
    """D_n = [[R1, Q1], [Q2, R2]] / W"""
    arr, _ = as_grid(x)
    r1, r2, q1, q2 = row_replaced_dets(c.spinors, arr)
    w = block_wronskian(c.spinors, arr)
    d = np.empty((len(arr), 2, 2))
    with np.errstate(divide="ignore", invalid="ignore"):
        d[:, 0, 0], d[:, 0, 1], d[:, 1, 0], d[:, 1, 1] = r1 / w, q1 / w, q2 / w, r2 / w
    return d


def chain_apply(c: ChainSpec, psi: EigenSpinor, x) -> np.ndarray:
    """L_{n<-0} psi = (W1, W2) / W"""
    arr, scalar = as_grid(x)
    if not same_potential(psi.parent, c.parent):
        raise DarbouxError(f"{psi.label!r} does not solve the chain seed")
    w1, w2 = odd_wronskians(c.spinors, psi, arr)
    w = block_wronskian(c.spinors, arr)
    with np.errstate(divide="ignore", invalid="ignore"):
        value = np.stack([w1 / w, w2 / w], axis=-1)
    return value[0] if scalar else value


def _compositions(total: int, parts: int):
    """Tuples of parts non-negative integers summing to total"""
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        edges = (-1,) + bars + (total + parts - 1,)
        yield tuple(edges[i + 1] - edges[i] - 1 for i in range(parts))


def _determinant_jet(spinors: Sequence[EigenSpinor], x: np.ndarray, rows: Sequence[Tuple[int, int]],
                     order: int) -> np.ndarray:
    """
    Jet of det[s_j^(level)[component]] with one (level, component) per row.
    The k-th derivative spreads k derivatives over the rows with multinomial weights.
    """
    top = max(level for level, _ in rows) + order
    jets = _column_jets(spinors, x, top)
    out = np.zeros((order + 1, len(x)))
    for k in range(order + 1):
        for split in _compositions(k, len(rows)):
            moved = [(level + a, component) for (level, component), a in zip(rows, split)]
            if len(set(moved)) < len(moved):
                continue
            weight = math.factorial(k) / math.prod(math.factorial(a) for a in split)
            m = np.stack([jets[level][:, component, :] for level, component in moved], axis=1)
            out[k] += weight * batched_determinant(m, "chain potential")
    return out


def _block_rows(n: int, replace: Optional[Tuple[int, Tuple[int, int]]] = None) -> List[Tuple[int, int]]:
    rows = [(level, component) for level in range(n) for component in (0, 1)]
    if replace is not None:
        rows[replace[0]] = replace[1]
    return rows


def chain_potential(c: ChainSpec) -> Potential:
    """
    V_n = V0 + [gamma, D_n]: p_n = p0 + (Q1 + Q2)/W, q_n = q0 + (R2 - R1)/W.
    Derivatives go up to the order the spinor jets leave after the n-th Wronskian rows.
    """
    V0 = c.parent
    n = c.depth
    order_cap = max(0, V0.max_deriv_order + 1 - n)
    spinors = c.spinors

    def det(x: np.ndarray, order: int, replace=None) -> np.ndarray:
        return _determinant_jet(spinors, x, _block_rows(n, replace), order)

    def p_jet(x: np.ndarray, order: int) -> np.ndarray:
        q1 = det(x, order, (2 * n - 1, (n, 0)))
        q2 = det(x, order, (2 * n - 2, (n, 1)))
        with np.errstate(divide="ignore", invalid="ignore"):
            return V0.p.jet(x, order) + jet_quotient(q1 + q2, det(x, order))

    def q_jet(x: np.ndarray, order: int) -> np.ndarray:
        r1 = det(x, order, (2 * n - 2, (n, 0)))
        r2 = det(x, order, (2 * n - 1, (n, 1)))
        with np.errstate(divide="ignore", invalid="ignore"):
            return V0.q.jet(x, order) + jet_quotient(r2 - r1, det(x, order))

    name = f"chain[{V0.name}; {', '.join(f'{e:g}' for e in c.eigenvalues)}]"
    p = ScalarField(p_jet, order_cap, V0.domain, f"p of {name}")
    q = ScalarField(q_jet, order_cap, V0.domain, f"q of {name}")
    logger.info("chain potential", depth=c.depth, eigenvalues=c.eigenvalues, max_order=order_cap)
    return make_canonical(p, q, name=name, representation=V0.representation, domain=V0.domain,
                          mass=V0.mass if V0.is_scalar else None)


def chain_commutator_form(c: ChainSpec, x) -> np.ndarray:
    """V0 + [gamma, D_n] as matrices, for the canonical-form check"""
    arr, _ = as_grid(x)
    return c.parent.matrix(arr) + commutator(GAMMA, chain_matrix(c, arr))


# ===== SEQUENTIAL COMPOSITION =====

def compose_transforms(c: ChainSpec, allow_singular: Optional[bool] = None) -> List[TransformFunction]:
    """Step-by-step construction: step i uses L_{i-1<-0} f_i and L_{i-1<-0} g_i"""
    singular = c.allow_singular if allow_singular is None else allow_singular
    transforms: List[TransformFunction] = []
    for step in c.steps:
        f, g = step.f, step.g
        for T in transforms:
            f, g = apply_forward(T, f), apply_forward(T, g)
        transforms.append(build_transform(f, g, c.interval, allow_singular=singular))
    return transforms


def sequential_apply(transforms: Sequence[TransformFunction], psi: EigenSpinor) -> EigenSpinor:
    for T in transforms:
        psi = apply_forward(T, psi)
    return psi


def sequential_adjoint(transforms: Sequence[TransformFunction], phi: EigenSpinor) -> EigenSpinor:
    for T in reversed(transforms):
        phi = apply_adjoint(T, phi)
    return phi


def scalar_wronskian_jet(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(W_S, W_S') for W_S(a, b) = a b' - a' b from jets of order >= 2"""
    return np.stack([a[0] * b[1] - a[1] * b[0], a[0] * b[2] - a[2] * b[0]])


def scalar_two_step_S(S0: ScalarField, a: EigenSpinor, b: EigenSpinor) -> ScalarField:
    """
    Two scalar steps with kernels (a, -sigma3 a) and (b, -sigma3 b) in hat form:
    S2 = S0 + (ln W_S(a2, b2))' - (ln W_S(a1, b1))'
    """

    def s_jet(x: np.ndarray, order: int) -> np.ndarray:
        aj, bj = a.jet(x, 2), b.jet(x, 2)
        first = scalar_wronskian_jet(aj[..., 0], bj[..., 0])
        second = scalar_wronskian_jet(aj[..., 1], bj[..., 1])
        with np.errstate(divide="ignore", invalid="ignore"):
            value = S0(x) + second[1] / second[0] - first[1] / first[0]
        return value[np.newaxis]

    return ScalarField(s_jet, 0, S0.domain, "S2")
