#!/usr/bin/env python3
# dirac/exceptions.py
"""
Exception hierarchy for the Darboux transformation library
"""

from typing import Optional, Sequence


class DarbouxError(Exception):
    """Base exception for all library errors"""
    pass


class SingularMatrix(DarbouxError):
    """Custom exception for a 2x2 matrix whose determinant is below singular_eps"""

    def __init__(self, det: float, message: Optional[str] = None):
        self.det = det
        super().__init__(message or f"matrix is singular: det = {det:.3e}")


class NoConvergence(DarbouxError):
    """Custom exception for quadrature that exhausted its subdivision budget"""
    pass


class OutOfDomain(DarbouxError):
    """Custom exception for evaluation outside a field's domain"""
    pass


class OrderUnavailable(DarbouxError):
    """Custom exception for derivative orders a field cannot provide"""
    pass


class UnknownSeed(DarbouxError):
    """Custom exception for seed identifiers missing from the seed catalog"""
    pass


class NodeOnInterval(DarbouxError):
    """Custom exception for spinors whose components both vanish on the interval"""
    pass


class QuadratureFailure(DarbouxError):
    """Custom exception for quadratures that produce non-finite values"""
    pass


class _NodeError(DarbouxError):
    def __init__(self, message: str, nodes: Sequence[float] = ()):
        self.nodes = [float(x) for x in nodes]
        if self.nodes:
            shown = ", ".join(f"{x:.6g}" for x in self.nodes[:8])
            message = f"{message} (nodes at {shown})"
        super().__init__(message)


class DegenerateOnGrid(_NodeError):
    """Custom exception for transformation matrices with vanishing determinant"""
    pass


class NodeInLog(_NodeError):
    """Custom exception for logarithmic derivatives of functions with zeros"""
    pass


class EqualEigenvalues(DarbouxError):
    """Custom exception for transformation functions with λ₁ = λ₂"""
    pass


class WrongBranch(DarbouxError):
    """Custom exception for a kernel spinor that does not fit the requested branch"""
    pass


class MissingStepData(DarbouxError):
    """Custom exception for reduction checks without the step's transformation data"""
    pass


class NonPositiveNormalization(DarbouxError):
    """Custom exception for norm checks with (E-λ₁)(E-λ₂) <= 0 or a zero spinor"""
    pass


class UnknownExample(DarbouxError):
    """Custom exception for catalog names that do not exist"""
    pass


class ParameterOutOfRegularRange(DarbouxError):
    """Custom exception for catalog parameters outside the regular range"""
    pass


class ChainSpecError(DarbouxError):
    """Custom exception for malformed chain specification files"""
    pass


class InvalidTransformFunction(DarbouxError):
    """Custom exception for columns of U that do not solve h0 u = l u"""

    def __init__(self, message: str, residual: float = float("nan"), location: Optional[float] = None):
        self.residual = residual
        self.location = location
        super().__init__(message)


class RouteMismatch(DarbouxError):
    """Custom exception for forward maps whose algebraic and derivative forms disagree"""

    def __init__(self, message: str, gap: float = float("nan"), location: Optional[float] = None):
        self.gap = gap
        self.location = location
        super().__init__(message)
