#!/usr/bin/env python3
# dirac/verify.py
"""
Numeric verification suites for the operator identities, and the
spectrum bookkeeping built on tail-decay classification.
"""

from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import structlog

import config
from dirac.chain import block_wronskian, odd_wronskians, wronskian_derivative
from dirac.core import (
    GAMMA,
    SIGMA1,
    Interval,
    as_grid,
    jet_transpose,
    matvec,
    quad,
    working_interval,
)
from dirac.darboux import (
    TransformFunction,
    apply_forward,
    apply_h_jet,
    apply_L_jet,
    apply_Lplus_jet,
    shifted_h_jet,
)
from dirac.exceptions import NonPositiveNormalization
from dirac.spinor import EigenSpinor
from models.base import ResidualReport

logger = structlog.get_logger(__name__)

INTEGRABLE = "integrable"
NON_INTEGRABLE = "non_integrable"
INDETERMINATE = "indeterminate"


def default_grid(interval: Interval, points: Optional[int] = None,
                 guard: Optional[float] = None) -> np.ndarray:
    """Uniform grid on the interval minus a guard band at both ends"""
    points = points or config.VERIFY_CONFIG['grid_points']
    guard = config.VERIFY_CONFIG['guard_band'] if guard is None else guard
    return np.linspace(interval[0] + guard, interval[1] - guard, points)


def _grid_label(xs: np.ndarray) -> str:
    return f"{xs[0]:g}:{xs[-1]:g}:{len(xs)}"


def _relative(residual: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Pointwise residual norm scaled by 1 + |reference|"""
    return np.linalg.norm(residual, axis=-1) / (1.0 + np.linalg.norm(reference, axis=-1))


def _log_report(report: ResidualReport) -> ResidualReport:
    if report.passed:
        logger.info("✓ check passed", check=report.check, example=report.example,
                    max_residual=report.max_residual)
    else:
        logger.warning("⚠️ check failed", check=report.check, example=report.example,
                       max_residual=report.max_residual, tolerance=report.tolerance,
                       location=report.location)
    return report


# ===== OPERATOR IDENTITIES =====

def intertwining_residual(T: TransformFunction, psi: EigenSpinor, x=None,
                          tolerance: Optional[float] = None, example: str = "",
                          q_shift: float = 0.0) -> ResidualReport:
    """
    max |gamma phi' + V1 phi - E phi| for phi = L psi, with phi' from the
    derivatives of U and psi. q_shift perturbs V1 by q_shift*sigma1.
    """
    tolerance = config.VERIFY_CONFIG['default_tolerance'] if tolerance is None else tolerance
    xs = default_grid(T.interval) if x is None else as_grid(x)[0]
    phi = apply_forward(T, psi)
    jet = phi.own_jet(xs, 1)
    v1 = T.transformed.matrix(xs) + q_shift * SIGMA1
    residual = matvec(GAMMA, jet[1]) + matvec(v1, jet[0]) - psi.energy * jet[0]
    zero = bool(np.max(np.abs(jet[0])) <= 1e-12)
    return _log_report(ResidualReport.from_residuals(
        "intertwining", xs, _relative(residual, jet[0]), tolerance, example, _grid_label(xs),
        spinor=psi.label, zero_spinor=zero, q_shift=q_shift))


def factorization_residual(T: TransformFunction, psi, x=None, tolerance: Optional[float] = None,
                           example: str = "", phi=None) -> List[ResidualReport]:
    """
    L+ L psi - (h0 - l1)(h0 - l2) psi and L L+ phi - (h1 - l1)(h1 - l2) phi.
    psi and phi may be any smooth fields; phi defaults to L psi.
    """
    tolerance = config.VERIFY_CONFIG['default_tolerance'] if tolerance is None else tolerance
    xs = default_grid(T.interval) if x is None else as_grid(x)[0]
    l1, l2 = T.lambdas
    V0, V1 = T.parent, T.transformed

    pj = psi.own_jet(xs, 2)
    left = apply_Lplus_jet(T, xs, apply_L_jet(T, xs, pj))[0]
    right = shifted_h_jet(V0, xs, shifted_h_jet(V0, xs, pj, l2), l1)[0]
    first = ResidualReport.from_residuals("factorization_LplusL", xs, _relative(left - right, pj[0]),
                                          tolerance, example, _grid_label(xs),
                                          spinor=getattr(psi, "label", ""))

    if phi is None:
        phi = apply_forward(T, psi) if isinstance(psi, EigenSpinor) else None
    reports = [_log_report(first)]
    if phi is not None:
        fj = phi.own_jet(xs, 2)
        left = apply_L_jet(T, xs, apply_Lplus_jet(T, xs, fj))[0]
        right = shifted_h_jet(V1, xs, shifted_h_jet(V1, xs, fj, l2), l1)[0]
        reports.append(_log_report(ResidualReport.from_residuals(
            "factorization_LLplus", xs, _relative(left - right, fj[0]), tolerance, example,
            _grid_label(xs), spinor=getattr(phi, "label", ""))))
    return reports


def superalgebra_residuals(T: TransformFunction, psi, phi, x=None,
                           tolerance: Optional[float] = None,
                           example: str = "") -> List[ResidualReport]:
    """
    Block operators H = diag(h0, h1), Q = [[0, 0], [L, 0]], Q+ = [[0, L+], [0, 0]]
    on the stacked field (psi, phi).
    """
    tolerance = config.VERIFY_CONFIG['default_tolerance'] if tolerance is None else tolerance
    xs = default_grid(T.interval) if x is None else as_grid(x)[0]
    l1, l2 = T.lambdas
    V0, V1 = T.parent, T.transformed
    pj, fj = psi.own_jet(xs, 2), phi.own_jet(xs, 2)
    scale = np.linalg.norm(pj[0], axis=-1) + np.linalg.norm(fj[0], axis=-1)

    # Q (psi, phi) = (0, L psi); applying Q again acts with L on the zero upper slot
    q_once_lower = apply_L_jet(T, xs, pj)
    q_twice_lower = apply_L_jet(T, xs, np.zeros_like(q_once_lower))[0]

    anti_upper = (apply_Lplus_jet(T, xs, apply_L_jet(T, xs, pj))[0]
                  - shifted_h_jet(V0, xs, shifted_h_jet(V0, xs, pj, l2), l1)[0])
    anti_lower = (apply_L_jet(T, xs, apply_Lplus_jet(T, xs, fj))[0]
                  - shifted_h_jet(V1, xs, shifted_h_jet(V1, xs, fj, l2), l1)[0])
    comm_q = apply_L_jet(T, xs, apply_h_jet(V0, xs, pj))[0] - apply_h_jet(V1, xs, q_once_lower)[0]
    comm_qplus = (apply_Lplus_jet(T, xs, apply_h_jet(V1, xs, fj))[0]
                  - apply_h_jet(V0, xs, apply_Lplus_jet(T, xs, fj))[0])

    def norm(*parts: np.ndarray) -> np.ndarray:
        return np.sqrt(sum(np.sum(p ** 2, axis=-1) for p in parts)) / (1.0 + scale)

    grid = _grid_label(xs)
    return [_log_report(ResidualReport.from_residuals(name, xs, values, tolerance, example, grid))
            for name, values in (
                ("superalgebra_Q_squared", norm(q_twice_lower)),
                ("superalgebra_anticommutator", norm(anti_upper, anti_lower)),
                ("superalgebra_commutator_Q", norm(comm_q)),
                ("superalgebra_commutator_Qplus", norm(comm_qplus)),
            )]


def norm_preservation(T: TransformFunction, psi: EigenSpinor, interval: Interval,
                      tol: Optional[float] = None) -> float:
    """<L psi | L psi> / (N^2 <psi | psi>) with N^2 = (E - l1)(E - l2)"""
    l1, l2 = T.lambdas
    n2 = (psi.energy - l1) * (psi.energy - l2)
    if n2 <= 0:
        raise NonPositiveNormalization(f"(E - l1)(E - l2) = {n2:g} is not positive")
    tol = tol or config.QUAD_TOL
    phi = apply_forward(T, psi)
    a, b = interval
    norm_psi = quad(lambda t: float(np.sum(psi(t) ** 2)), a, b, tol)
    if norm_psi <= 0.0:
        raise NonPositiveNormalization(f"{psi.label!r} has zero norm on [{a}, {b}]")
    norm_phi = quad(lambda t: float(np.sum(phi(t) ** 2)), a, b, tol)
    ratio = norm_phi / (n2 * norm_psi)
    logger.info("norm preservation", spinor=psi.label, ratio=ratio)
    return ratio


# ===== MATRIX AND DETERMINANT IDENTITIES =====

def trace_identity_residual(a: np.ndarray) -> float:
    """max |gamma A + A^t gamma - tr(A) gamma|"""
    a = np.asarray(a, dtype=float)
    tr = np.trace(a, axis1=-2, axis2=-1)[..., np.newaxis, np.newaxis]
    return float(np.max(np.abs(GAMMA @ a + jet_transpose(a) @ GAMMA - tr * GAMMA)))


def _relative_gap(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Pointwise gap scaled by the largest magnitude on the grid"""
    scale = max(float(np.max(np.abs(lhs))), float(np.max(np.abs(rhs))), 1e-300)
    return np.abs(lhs - rhs) / scale


def wronskian_bracket_residual(spinors: Sequence[EigenSpinor], psi, x) -> np.ndarray:
    """
    W_S(W(f1..gn), W(f1..fn, psi)) against
    W1(f1..g_{n-1}, fn) W2(f1..gn, psi) - W2(f1..g_{n-1}, fn) W1(f1..gn, psi),
    W_S(a, b) = a b' - a' b; relative gap per point.
    """
    arr, _ = as_grid(x)
    spinors = list(spinors)
    mixed = spinors[:-1] + [psi]
    w, dw = block_wronskian(spinors, arr), wronskian_derivative(spinors, arr)
    wm, dwm = block_wronskian(mixed, arr), wronskian_derivative(mixed, arr)
    lhs = w * dwm - dw * wm
    w1f, w2f = odd_wronskians(spinors[:-2], spinors[-2], arr)
    w1p, w2p = odd_wronskians(spinors, psi, arr)
    rhs = w1f * w2p - w2f * w1p
    return _relative_gap(lhs, rhs)


def jacobi_residual(spinors: Sequence[EigenSpinor], x) -> np.ndarray:
    """W1(p, fn) W2(p, gn) - W1(p, gn) W2(p, fn) = W(p) W(p, fn, gn), p = f1..g_{n-1}"""
    arr, _ = as_grid(x)
    spinors = list(spinors)
    prefix, fn, gn = spinors[:-2], spinors[-2], spinors[-1]
    w1f, w2f = odd_wronskians(prefix, fn, arr)
    w1g, w2g = odd_wronskians(prefix, gn, arr)
    lhs = w1f * w2g - w1g * w2f
    rhs = block_wronskian(prefix, arr) * block_wronskian(spinors, arr)
    return _relative_gap(lhs, rhs)


# ===== SPECTRUM BOOKKEEPING =====

def _fit(u: np.ndarray, y: np.ndarray) -> Tuple[float, float]:
    """Least-squares slope and R^2 of y against u"""
    slope, intercept = np.polyfit(u, y, 1)
    residual = y - (slope * u + intercept)
    total = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(residual ** 2) / total if total > 0 else 1.0
    return float(slope), float(r2)


def _tail_verdict(distance: np.ndarray, magnitude: np.ndarray) -> str:
    """'decay', 'grow', 'flat' or 'unclear' for a tail sampled at increasing distance"""
    floor = config.VERIFY_CONFIG['decay_rate_floor']
    r2_min = config.VERIFY_CONFIG['r_squared_min']
    if np.all(magnitude == 0.0):
        return "decay"
    if np.any(magnitude == 0.0):
        return "unclear"
    y = np.log(magnitude)
    rate, r2_exp = _fit(distance, y)
    if abs(rate) * (distance[-1] - distance[0]) <= floor * max(1.0, abs(y).max()):
        return "flat"
    if rate > 0 and r2_exp >= r2_min:
        return "grow"
    if rate < 0 and r2_exp >= r2_min:
        power, r2_pow = _fit(np.log(distance), y) if distance[0] > 0 else (0.0, 0.0)
        # faster than any moderate power is treated as exponential-type decay
        if r2_exp >= r2_pow or power < -8.0:
            return "decay"
    return "unclear"


def _origin_verdict(phi, lo: float) -> str:
    """Half-line left end: |phi| ~ r^c is square-integrable iff c > -1/2"""
    base = max(lo, 1e-8)
    r = np.geomspace(base * 10.0, base * 1e4, 25)
    magnitude = np.linalg.norm(phi(r), axis=-1)
    if np.any(magnitude == 0.0) or not np.all(np.isfinite(magnitude)):
        return "unclear"
    c, _ = _fit(np.log(r), np.log(magnitude))
    return "decay" if c > -0.5 else "grow"


def decay_classify(phi, window: Optional[Interval] = None) -> str:
    """integrable, non_integrable or indeterminate from fits of log|phi| on both tails"""
    lo, hi = window or working_interval(phi.domain)
    xs = np.linspace(lo, hi, config.VERIFY_CONFIG['grid_points'])
    with np.errstate(all="ignore"):
        magnitude = np.linalg.norm(phi(xs), axis=-1)
    if not np.all(np.isfinite(magnitude)) or np.max(magnitude) == 0.0:
        return INDETERMINATE
    n_tail = max(int(config.VERIFY_CONFIG['tail_fraction'] * len(xs)), 5)
    right = _tail_verdict(xs[-n_tail:], magnitude[-n_tail:])
    if np.isfinite(phi.domain[0]):
        left = _origin_verdict(phi, phi.domain[0])
    else:
        left = _tail_verdict(-xs[:n_tail][::-1], magnitude[:n_tail][::-1])
    verdicts = {left, right}
    if verdicts & {"grow", "flat"}:
        verdict = NON_INTEGRABLE
    elif verdicts == {"decay"}:
        verdict = INTEGRABLE
    else:
        verdict = INDETERMINATE
    logger.debug("decay classified", spinor=getattr(phi, "label", ""), left=left, right=right,
                 verdict=verdict)
    return verdict


def discrete_levels(candidates: Iterable[EigenSpinor], window: Optional[Interval] = None) -> List[float]:
    """Energies of the integrable candidates, sorted and de-duplicated"""
    levels: List[float] = []
    for phi in candidates:
        if decay_classify(phi, window) == INTEGRABLE:
            if not any(abs(phi.energy - e) <= 1e-9 for e in levels):
                levels.append(phi.energy)
    return sorted(levels)


def summarize(reports: Sequence[ResidualReport]) -> Dict[str, int]:
    passed = sum(1 for r in reports if r.passed)
    return {'total': len(reports), 'passed': passed, 'failed': len(reports) - passed}
