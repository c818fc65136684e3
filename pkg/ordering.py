# ordering.py - The s-ordering rule {b^dagger^n b^m} and expansions of operators in it
import math
from dataclasses import dataclass, field
from numbers import Real
from typing import Dict, List, Optional, Tuple

import numpy as np

from fock import OperatorMatrix, TruncationError, DimensionMismatch, squeezed_ladder
from logging_system import get_logger
from utils import ValidationError, NumericalError

logger = get_logger('numerics')

MAX_ORDER = 8
MAX_EXPANSION_DEGREE = 4
PARAM_TOL = 1e-12
RESIDUAL_TOL = 1e-9
COEFFICIENT_FLOOR = 1e-11


class OrderingRangeError(ValidationError):
    pass


class InvalidOrderingParams(ValidationError):
    pass


class NotInSpan(NumericalError):
    pass


@dataclass(frozen=True)
class OrderingParams:
    """Ordering parameter s < 0, squeeze r and kappa/omega = e^{2r}."""

    s: float
    r: float = 0.0
    kappa_over_omega: Optional[float] = None

    def __post_init__(self):
        if self.kappa_over_omega is None:
            object.__setattr__(self, "kappa_over_omega", math.exp(2 * self.r))
        self.validate()

    def validate(self):
        if not math.isfinite(self.s) or self.s >= 0:
            raise InvalidOrderingParams(f"s must be real and negative, got {self.s}")
        if not math.isfinite(self.r):
            raise InvalidOrderingParams(f"r must be finite, got {self.r}")
        if not (self.kappa_over_omega > 0 and math.isfinite(self.kappa_over_omega)):
            raise InvalidOrderingParams(f"kappa/omega must be positive, got {self.kappa_over_omega}")
        expected = math.exp(2 * self.r)
        if abs(expected - self.kappa_over_omega) > PARAM_TOL * max(1.0, expected):
            raise InvalidOrderingParams(
                f"kappa/omega = {self.kappa_over_omega} disagrees with e^(2r) = {expected}"
            )

    @classmethod
    def from_sr(cls, s: float, r: float = 0.0) -> "OrderingParams":
        return cls(float(s), float(r))

    @classmethod
    def from_widths(cls, sigma1: float, sigma2: float) -> "OrderingParams":
        """s = -4 sigma1 sigma2 and kappa/omega = sigma2/sigma1."""
        if sigma1 <= 0 or sigma2 <= 0:
            raise InvalidOrderingParams(f"widths must be positive, got ({sigma1}, {sigma2})")
        ratio = sigma2 / sigma1
        return cls(-4.0 * sigma1 * sigma2, 0.5 * math.log(ratio), ratio)


def _check_orders(n: int, m: int):
    if n < 0 or m < 0:
        raise OrderingRangeError(f"orders must be nonnegative, got ({n}, {m})")
    if n > MAX_ORDER or m > MAX_ORDER:
        raise OrderingRangeError(f"orders ({n}, {m}) exceed the supported maximum {MAX_ORDER}")


def ordering_terms(n: int, m: int, s: Real) -> List[Tuple[int, Real]]:
    """Contraction coefficients of {b^dagger^n b^m} in antinormal order.

    coefficient(k) = k! C(n,k) C(m,k) ((-s-1)/2)^k multiplies b^(m-k) b^dagger^(n-k).
    Passing a Fraction for s keeps the coefficients exact.
    """
    _check_orders(n, m)
    contraction = (-s - 1) / 2
    return [
        (k, math.factorial(k) * math.comb(n, k) * math.comb(m, k) * contraction ** k)
        for k in range(min(n, m) + 1)
    ]


def _normal_terms(n: int, m: int, s: Real) -> List[Tuple[int, Real]]:
    # Same monomial written normally ordered: b^dagger^(n-k) b^(m-k)
    contraction = (1 - s) / 2
    return [
        (k, math.factorial(k) * math.comb(n, k) * math.comb(m, k) * contraction ** k)
        for k in range(min(n, m) + 1)
    ]


def _check_margin(n: int, m: int, dim: int):
    if n + m > dim / 2:
        raise TruncationError(f"monomial degree {n}+{m} exceeds the truncation margin dim/2 = {dim / 2:g}")


def ordered_monomial_matrix(n: int, m: int, params: OrderingParams, dim: int) -> OperatorMatrix:
    """Matrix of {b^dagger^n b^m}: sum_k coefficient(k) b^(m-k) b^dagger^(n-k)."""
    _check_orders(n, m)
    _check_margin(n, m, dim)
    b = squeezed_ladder(dim, params.r)
    b_dagger = b.dagger()
    total = OperatorMatrix(np.zeros((dim, dim), dtype=complex))
    for k, coefficient in ordering_terms(n, m, params.s):
        total = total + float(coefficient) * (b.power(m - k) @ b_dagger.power(n - k))
    return total


def normal_ordered_monomial_matrix(n: int, m: int, params: OrderingParams, dim: int) -> OperatorMatrix:
    """Matrix of {b^dagger^n b^m} built from its normally ordered form."""
    _check_orders(n, m)
    _check_margin(n, m, dim)
    b = squeezed_ladder(dim, params.r)
    b_dagger = b.dagger()
    total = OperatorMatrix(np.zeros((dim, dim), dtype=complex))
    for k, coefficient in _normal_terms(n, m, params.s):
        total = total + float(coefficient) * (b_dagger.power(n - k) @ b.power(m - k))
    return total


def ordering_residual(n: int, m: int, params: OrderingParams, dim: int) -> float:
    """Frobenius gap between the antinormal and normal realizations on the exact block."""
    block = dim - (n + m)
    antinormal = ordered_monomial_matrix(n, m, params, dim).entries[:block, :block]
    normal = normal_ordered_monomial_matrix(n, m, params, dim).entries[:block, :block]
    return float(np.linalg.norm(antinormal - normal))


@dataclass(frozen=True)
class OrderingExpansion:
    """sum c_nm {b^dagger^n b^m} + constant."""

    terms: Dict[Tuple[int, int], complex] = field(default_factory=dict)
    constant: complex = 0.0
    params: OrderingParams = None

    @property
    def degree(self) -> int:
        return max((n + m for n, m in self.terms), default=0)

    def coefficient(self, n: int, m: int) -> complex:
        if (n, m) == (0, 0):
            return complex(self.constant)
        return complex(self.terms.get((n, m), 0.0))

    def matrix(self, dim: int) -> OperatorMatrix:
        total = complex(self.constant) * OperatorMatrix.identity(dim)
        for (n, m), c in sorted(self.terms.items()):
            total = total + complex(c) * ordered_monomial_matrix(n, m, self.params, dim)
        return total


def _basis(max_degree: int) -> List[Tuple[int, int]]:
    return [(n, degree - n) for degree in range(max_degree + 1) for n in range(degree + 1)]


def expand_in_ordered_basis(target: OperatorMatrix, params: OrderingParams,
                            dim: int = None, max_degree: int = 2) -> OrderingExpansion:
    """Least-squares expansion of `target` over {b^dagger^n b^m}, n+m <= max_degree.

    Only the leading (dim - 2 max_degree) block is fitted; products of that degree
    are exact there in the truncated basis.
    """
    dim = target.dim if dim is None else dim
    if target.dim != dim:
        raise DimensionMismatch(f"target dim {target.dim} does not match requested dim {dim}")
    if not 0 <= max_degree <= MAX_EXPANSION_DEGREE:
        raise OrderingRangeError(f"max_degree must be in [0, {MAX_EXPANSION_DEGREE}], got {max_degree}")
    if dim < 4 * max_degree:
        raise TruncationError(f"dim {dim} is too small for degree {max_degree} (need >= {4 * max_degree})")

    block = dim - 2 * max_degree
    basis = _basis(max_degree)
    columns = np.column_stack([
        ordered_monomial_matrix(n, m, params, dim).entries[:block, :block].ravel() for n, m in basis
    ])
    rhs = target.entries[:block, :block].ravel()

    norms = np.linalg.norm(columns, axis=0)
    solution, *_ = np.linalg.lstsq(columns / norms, rhs, rcond=None)
    coefficients = solution / norms

    residual = float(np.linalg.norm(columns @ coefficients - rhs))
    tolerance = RESIDUAL_TOL * max(1.0, float(np.linalg.norm(rhs)))
    if residual > tolerance:
        raise NotInSpan(
            f"target is not a combination of ordered monomials of degree <= {max_degree} "
            f"(residual {residual:.3e} > {tolerance:.3e})"
        )

    # Terms whose share of the fit is below solver noise are dropped
    floor = COEFFICIENT_FLOOR * max(1.0, float(np.linalg.norm(rhs)))
    terms = {}
    constant = 0j
    for (n, m), c, scaled in zip(basis, coefficients, solution):
        if abs(scaled) < floor:
            continue
        if (n, m) == (0, 0):
            constant = complex(c)
        else:
            terms[(n, m)] = complex(c)

    logger.debug(f"🧮 Expanded target in {len(terms)} ordered monomials, residual {residual:.2e}")
    return OrderingExpansion(terms, constant, params)


def qp2_expansion(params: OrderingParams) -> OrderingExpansion:
    """q p p = -sqrt(kappa/8) [{b^3} + {b^dagger^3} - {b^dagger b^2} - {b^dagger^2 b} - (s+2){b} - (s-2){b^dagger}]."""
    prefactor = -math.sqrt(params.kappa_over_omega / 8.0)
    s = params.s
    bracket = {
        (0, 3): 1.0,
        (3, 0): 1.0,
        (1, 2): -1.0,
        (2, 1): -1.0,
        (0, 1): -(s + 2),
        (1, 0): -(s - 2),
    }
    terms = {key: complex(prefactor * value) for key, value in bracket.items() if value != 0}
    return OrderingExpansion(terms, 0j, params)


def photon_number_expansion(params: OrderingParams) -> OrderingExpansion:
    """Closed form of a^dagger a in the ordered basis of the squeezed mode."""
    cosh2r = math.cosh(2 * params.r)
    sinh2r = math.sinh(2 * params.r)
    terms = {(1, 1): complex(cosh2r)}
    if sinh2r != 0:
        terms[(2, 0)] = complex(-sinh2r / 2)
        terms[(0, 2)] = complex(-sinh2r / 2)
    return OrderingExpansion(terms, complex(params.s / 2 * cosh2r - 0.5), params)
