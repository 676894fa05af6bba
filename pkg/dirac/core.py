#!/usr/bin/env python3
# dirac/core.py
"""
2x2 matrix algebra, derivative jets, quadrature, special functions and the
finite-difference oracle shared by every other module.

A *jet* is an array whose leading axis runs over derivative orders:
jet[k] holds the k-th derivative sampled on a grid. Products, quotients and
matrix inverses of jets follow the Leibniz rule, so quantities assembled from
closed-form inputs keep exact derivatives.
"""

import math
import warnings
from typing import Callable, List, Optional, Tuple

import numpy as np
import structlog
import sympy as sp
from scipy import integrate, linalg, optimize

import config
from dirac.exceptions import (
    NoConvergence,
    OrderUnavailable,
    OutOfDomain,
    QuadratureFailure,
    SingularMatrix,
)

logger = structlog.get_logger(__name__)

Interval = Tuple[float, float]

# ===== FIXED MATRICES =====
IDENTITY = np.eye(2)
GAMMA = np.array([[0.0, 1.0], [-1.0, 0.0]])
SIGMA1 = np.array([[0.0, 1.0], [1.0, 0.0]])
SIGMA3 = np.array([[1.0, 0.0], [0.0, -1.0]])

# Unitary linking the sigma3 and hat representations: psi_hat = U_HAT_INV @ psi
U_HAT = (IDENTITY + GAMMA) / np.sqrt(2.0)
U_HAT_INV = (IDENTITY - GAMMA) / np.sqrt(2.0)

FULL_LINE: Interval = (-np.inf, np.inf)

# Independent variable of every closed-form expression (x, or r on half-lines)
X = sp.Symbol("x", real=True)


def as_grid(x) -> Tuple[np.ndarray, bool]:
    """Return x as a 1-d float array and whether it was a scalar"""
    arr = np.asarray(x, dtype=float)
    return np.atleast_1d(arr), arr.ndim == 0


def sym(value: float) -> sp.Float:
    """Exact sympy image of a float (17 digits round-trip the binary value)"""
    return sp.Float(float(value), 17)


def matvec(matrix: np.ndarray, vector: np.ndarray) -> np.ndarray:
    """Batched matrix-vector product over leading axes"""
    return np.einsum("...ij,...j->...i", matrix, vector)


# ===== 2x2 ALGEBRA =====

def mat2_det(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    return np.asarray(m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0])


def mat2_inverse(m: np.ndarray, singular_eps: Optional[float] = None) -> np.ndarray:
    """
    Inverse of a 2x2 matrix, or of a stack of them on the leading axes.
    Raises SingularMatrix when any |det| <= singular_eps.
    """
    m = np.asarray(m, dtype=float)
    eps = config.SINGULAR_EPS if singular_eps is None else singular_eps
    det = mat2_det(m)
    flat = np.atleast_1d(det)
    bad = ~(np.abs(flat) > eps)
    if np.any(bad):
        raise SingularMatrix(float(flat[np.argmax(bad)]))
    adj = np.empty_like(m)
    adj[..., 0, 0] = m[..., 1, 1]
    adj[..., 0, 1] = -m[..., 0, 1]
    adj[..., 1, 0] = -m[..., 1, 0]
    adj[..., 1, 1] = m[..., 0, 0]
    return adj / det[..., np.newaxis, np.newaxis]


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


# ===== JET ARITHMETIC =====

def jet_product(a: np.ndarray, b: np.ndarray,
                mul: Callable[[np.ndarray, np.ndarray], np.ndarray] = np.multiply) -> np.ndarray:
    """Leibniz product of two jets; mul combines one order of each (np.matmul, matvec, ...)"""
    order = min(len(a), len(b)) - 1
    out = []
    for k in range(order + 1):
        acc = mul(a[0], b[k])
        for j in range(1, k + 1):
            acc = acc + math.comb(k, j) * mul(a[j], b[k - j])
        out.append(acc)
    return np.stack(out)


def jet_quotient(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Jet of f/g from h^(k) = (f^(k) - sum_{j>=1} C(k,j) g^(j) h^(k-j)) / g"""
    order = min(len(f), len(g)) - 1
    h: List[np.ndarray] = []
    for k in range(order + 1):
        acc = f[k]
        for j in range(1, k + 1):
            acc = acc - math.comb(k, j) * g[j] * h[k - j]
        h.append(acc / g[0])
    return np.stack(h)


def jet_log_derivative(f: np.ndarray) -> np.ndarray:
    """Jet of (ln f)' = f'/f; one order shorter than f"""
    return jet_quotient(f[1:], f[:-1])


def jet_inverse(m: np.ndarray, singular_eps: Optional[float] = None) -> np.ndarray:
    """Jet of the inverse of a 2x2 matrix jet with shape (K+1, ..., 2, 2)"""
    y0 = mat2_inverse(m[0], singular_eps)
    ys = [y0]
    for k in range(1, len(m)):
        acc = np.zeros_like(y0)
        for j in range(1, k + 1):
            acc = acc + math.comb(k, j) * (m[j] @ ys[k - j])
        ys.append(-(y0 @ acc))
    return np.stack(ys)


def jet_transpose(m: np.ndarray) -> np.ndarray:
    return np.swapaxes(m, -1, -2)


# ===== SCALAR FIELDS =====

class ScalarField:
    """
    Real function of x with exact derivatives up to max_order.
    jet_fn(x, order) must return an array of shape (order+1, len(x)).
    """

    def __init__(self, jet_fn: Callable[[np.ndarray, int], np.ndarray], max_order: int,
                 domain: Interval = FULL_LINE, name: str = ""):
        self._jet_fn = jet_fn
        self.max_order = max_order
        self.domain = domain
        self.name = name

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name!r})"

    def check_domain(self, x: np.ndarray) -> None:
        lo, hi = self.domain
        if np.any(x < lo) or np.any(x > hi):
            raise OutOfDomain(f"{self.name or 'field'} evaluated outside [{lo}, {hi}]")

    def jet(self, x, order: int) -> np.ndarray:
        if order > self.max_order:
            raise OrderUnavailable(
                f"{self.name or 'field'} provides derivatives up to {self.max_order}, asked for {order}")
        arr, _ = as_grid(x)
        self.check_domain(arr)
        return np.asarray(self._jet_fn(arr, order), dtype=float)

    def derivative(self, x, k: int):
        arr, scalar = as_grid(x)
        value = self.jet(arr, k)[k]
        return float(value[0]) if scalar else value

    def __call__(self, x):
        return self.derivative(x, 0)


class SymbolicField(ScalarField):
    """ScalarField backed by a sympy expression in X; derivatives by sp.diff"""

    def __init__(self, expr, domain: Interval = FULL_LINE, name: str = "",
                 max_order: Optional[int] = None):
        self.expr = sp.sympify(expr)
        self._derivatives = [self.expr]
        self._functions: List[Callable] = []
        super().__init__(self._symbolic_jet,
                         max_order if max_order is not None else config.NUMERICS_CONFIG['max_symbolic_order'],
                         domain, name or str(self.expr))

    @property
    def is_constant(self) -> bool:
        return X not in self.expr.free_symbols

    def _function(self, k: int) -> Callable:
        while len(self._functions) <= k:
            j = len(self._functions)
            while len(self._derivatives) <= j:
                self._derivatives.append(sp.diff(self._derivatives[-1], X))
            self._functions.append(sp.lambdify(X, self._derivatives[j], modules=["scipy", "numpy"]))
        return self._functions[k]

    def _symbolic_jet(self, x: np.ndarray, order: int) -> np.ndarray:
        rows = []
        for k in range(order + 1):
            value = np.asarray(self._function(k)(x), dtype=float)
            rows.append(np.broadcast_to(value, x.shape))
        return np.stack(rows)


def constant_field(value: float, domain: Interval = FULL_LINE, name: str = "") -> SymbolicField:
    return SymbolicField(sym(value), domain=domain, name=name or f"{value:g}")


# ===== QUADRATURE =====

def quad(f: Callable[[float], float], a: float, b: float, tol: Optional[float] = None,
         limit: Optional[int] = None) -> float:
    """
    Adaptive quadrature of f over [a, b] (scipy QUADPACK).
    A reversed interval integrates with the sign flipped.
    """
    tol = config.QUAD_TOL if tol is None else tol
    limit = config.QUAD_LIMIT if limit is None else limit
    if a == b:
        return 0.0
    if a > b:
        return -quad(f, b, a, tol, limit)
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, error = integrate.quad(lambda t: float(f(t)), a, b,
                                          epsabs=tol, epsrel=tol, limit=limit)
        except integrate.IntegrationWarning as exc:
            raise NoConvergence(f"quadrature on [{a}, {b}] did not converge: {exc}") from exc
    if not np.isfinite(value):
        raise QuadratureFailure(f"quadrature on [{a}, {b}] returned {value}")
    return float(value)


class CumulativeIntegral:
    """
    x -> integral of g from x0 to x, memoized on a fixed node grid built at
    construction; each evaluation adds one short quadrature from the nearest node.
    """

    def __init__(self, integrand: Callable[[float], float], x0: float, interval: Interval,
                 nodes: Optional[int] = None, tol: Optional[float] = None):
        self._g = integrand
        self._tol = tol
        count = nodes or config.NUMERICS_CONFIG['cumulative_nodes']
        lo, hi = min(interval[0], x0), max(interval[1], x0)
        grid = np.unique(np.concatenate([np.linspace(lo, hi, count), [x0]]))
        pieces = [quad(integrand, grid[i], grid[i + 1], tol) for i in range(len(grid) - 1)]
        cumulative = np.concatenate([[0.0], np.cumsum(pieces)])
        self._grid = grid
        self._values = cumulative - cumulative[int(np.searchsorted(grid, x0))]

    def __call__(self, x):
        arr, scalar = as_grid(x)
        nearest = np.abs(self._grid[np.newaxis, :] - arr[:, np.newaxis]).argmin(axis=1)
        out = np.array([self._values[i] + quad(self._g, self._grid[i], xi, self._tol)
                        for i, xi in zip(nearest, arr)])
        if not np.all(np.isfinite(out)):
            raise QuadratureFailure("cumulative integral produced non-finite values")
        return float(out[0]) if scalar else out


# ===== SPECIAL FUNCTIONS =====

def kn_poly(n: int, x):
    """
    K_n(x) = (-i)^n He_n(ix) through K_{n+1} = x K_n + n K_{n-1}.
    Works on floats, numpy arrays and sympy expressions.
    """
    if n < 0:
        raise ValueError(f"kn_poly needs n >= 0, got {n}")
    previous, current = x * 0 + 1, x
    if n == 0:
        return previous
    for j in range(1, n):
        previous, current = current, x * current + j * previous
    return current


def laguerre(n: int, a, x):
    """Generalized Laguerre polynomial L_n^a(x) by the three-term recurrence"""
    if n < 0:
        raise ValueError(f"laguerre needs n >= 0, got {n}")
    previous, current = x * 0 + 1, 1 + a - x
    if n == 0:
        return previous
    for k in range(1, n):
        previous, current = current, ((2 * k + 1 + a - x) * current - (k + a) * previous) / (k + 1)
    return current


# ===== FINITE-DIFFERENCE ORACLE (tests only) =====

def fd_derivative(f: Callable, x: float, order: int, h: Optional[float] = None) -> float:
    """Central difference of order 1 or 2 with step h (default 1e-4)"""
    h = config.NUMERICS_CONFIG['fd_step'] if h is None else h
    lo, hi = getattr(f, "domain", FULL_LINE)
    if x - h < lo or x + h > hi:
        raise OutOfDomain(f"finite difference at {x} leaves the domain [{lo}, {hi}]")
    if order == 1:
        return (f(x + h) - f(x - h)) / (2.0 * h)
    if order == 2:
        return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
    raise OrderUnavailable(f"fd_derivative supports orders 1 and 2, not {order}")


# ===== DETERMINANTS =====

def lu_determinant(matrix: np.ndarray) -> Tuple[float, float]:
    """Determinant by partial-pivot LU plus the ratio of extreme pivots"""
    a = np.asarray(matrix, dtype=float)
    if a.size == 0:
        return 1.0, 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", linalg.LinAlgWarning)
        lu, piv = linalg.lu_factor(a, check_finite=False)
    pivots = np.diag(lu)
    swaps = int(np.count_nonzero(piv != np.arange(len(piv))))
    det = float(np.prod(pivots)) * (-1.0) ** swaps
    magnitudes = np.abs(pivots)
    ratio = np.inf if magnitudes.min() == 0.0 else float(magnitudes.max() / magnitudes.min())
    return det, ratio


def batched_determinant(stack: np.ndarray, label: str = "determinant") -> np.ndarray:
    """Determinants of a (N, k, k) stack; one warning when conditioning is poor"""
    stack = np.asarray(stack, dtype=float)
    results = [lu_determinant(m) for m in stack]
    dets = np.array([d for d, _ in results])
    ratios = np.array([r for _, r in results])
    limit = config.NUMERICS_CONFIG['pivot_ratio_warning']
    poor = ratios > limit
    if np.any(poor & (dets != 0.0)):
        logger.warning("⚠️ ill-conditioned determinant", label=label,
                       points=int(np.count_nonzero(poor)), worst_pivot_ratio=float(ratios.max()))
    return dets


def determinant(matrix: np.ndarray) -> float:
    return float(batched_determinant(np.asarray(matrix, dtype=float)[np.newaxis])[0])


def bordered_minor(y: np.ndarray, size: int, row: int, col: int) -> float:
    """det of rows 1..size-1 plus row, columns 1..size-1 plus col (1-based)"""
    lead = list(range(size - 1))
    return determinant(np.asarray(y)[np.ix_(lead + [row - 1], lead + [col - 1])])


def leading_minor(y: np.ndarray, size: int) -> float:
    if size <= 0:
        return 1.0
    return determinant(np.asarray(y)[:size, :size])


def sylvester_residual(y: np.ndarray, l: int, j: int, k: int) -> Tuple[float, float]:
    """
    Both sides of W^l_ll W^l_jk - W^l_jl W^l_lk = W^{l+1}_jk W_{l-1} for j, k > l.
    Returns (lhs - rhs, scale) so callers can form a relative error.
    """
    lhs = (bordered_minor(y, l, l, l) * bordered_minor(y, l, j, k)
           - bordered_minor(y, l, j, l) * bordered_minor(y, l, l, k))
    rhs = bordered_minor(y, l + 1, j, k) * leading_minor(y, l - 1)
    return lhs - rhs, max(abs(lhs), abs(rhs), 1e-300)


# ===== NODES =====

def find_nodes(f: Callable[[np.ndarray], np.ndarray], interval: Interval,
               points: Optional[int] = None, xtol: Optional[float] = None,
               touches: bool = False) -> List[float]:
    """
    Zeros of a vectorized f: sign-change scan refined by brentq. With touches,
    also interior minima of |f| that reach zero without a sign change.
    """
    points = points or config.NUMERICS_CONFIG['node_scan_points']
    xtol = config.NUMERICS_CONFIG['node_xtol'] if xtol is None else xtol
    xs = np.linspace(interval[0], interval[1], points)
    values = np.asarray(f(xs), dtype=float)
    nodes = list(xs[(values == 0.0) | ~np.isfinite(values)])
    signs = np.sign(values)
    crossings = np.nonzero(signs[:-1] * signs[1:] < 0)[0]

    def scalar_f(t: float) -> float:
        return float(np.asarray(f(np.array([t])), dtype=float)[0])

    for i in crossings:
        nodes.append(optimize.brentq(scalar_f, xs[i], xs[i + 1], xtol=xtol))
    if touches:
        nodes.extend(_touch_points(scalar_f, xs, values, xtol))
    return sorted(float(n) for n in nodes)


def _touch_points(scalar_f: Callable[[float], float], xs: np.ndarray, values: np.ndarray,
                  xtol: float) -> List[float]:
    """Refined minima of |f| between same-sign neighbours that fall to node_touch_ratio of them"""
    ratio = config.NUMERICS_CONFIG['node_touch_ratio']
    size = np.abs(values)
    with np.errstate(invalid="ignore"):
        dips = ((size[1:-1] < size[:-2]) & (size[1:-1] <= size[2:])
                & (values[:-2] * values[1:-1] > 0) & (values[1:-1] * values[2:] > 0))
    out = []
    for i in np.nonzero(dips)[0] + 1:
        found = optimize.minimize_scalar(lambda t: abs(scalar_f(t)), bounds=(xs[i - 1], xs[i + 1]),
                                         method="bounded", options={"xatol": xtol})
        if abs(found.fun) <= ratio * max(size[i - 1], size[i + 1]):
            out.append(float(found.x))
    return out


def working_interval(domain: Interval, halfwidth: Optional[float] = None) -> Interval:
    """Finite window inside a domain: [-w, w] on the line, [r_min, r_min + 2w] on a half-line"""
    w = halfwidth or config.NUMERICS_CONFIG['probe_halfwidth']
    lo, hi = domain
    if np.isfinite(lo) and np.isfinite(hi):
        return float(lo), float(hi)
    if np.isfinite(lo):
        return float(lo), float(lo + 2.0 * w)
    if np.isfinite(hi):
        return float(hi - 2.0 * w), float(hi)
    return -w, w


def probe_grid(domain: Interval, points: Optional[int] = None) -> np.ndarray:
    lo, hi = working_interval(domain)
    return np.linspace(lo, hi, points or config.NUMERICS_CONFIG['probe_points'])


def default_base_point(domain: Interval) -> float:
    """Quadrature base point: 0 on the line, r_min + 1 on a half-line"""
    lo, hi = domain
    if np.isfinite(lo):
        return float(lo + 1.0)
    if np.isfinite(hi):
        return float(hi - 1.0)
    return 0.0
