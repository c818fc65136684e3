# moments.py - Operator expectation values recovered from Gaussian-smoothed distributions
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from fock import moment_operator
from logging_system import get_logger
from ordering import (
    OrderingExpansion, OrderingParams, expand_in_ordered_basis, photon_number_expansion, qp2_expansion,
)
from phasespace import PhaseSpaceField, integrate_moment, squeezed_amplitude, MAX_MOMENT_ORDER
from utils import ValidationError, NumericalError

logger = get_logger('numerics')

PARAM_TOL = 1e-9
SHORTCUT_TOL = 1e-12
DEFAULT_REL_PRECISION = 1e-3


class ParamMismatch(ValidationError):
    pass


class UnphysicalS(ValidationError):
    pass


class DegreeTooHigh(ValidationError):
    pass


class MomentMethod(str, Enum):
    GRID_QUADRATURE = "grid_quadrature"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class MomentEstimate:
    value: complex
    std_error: float = 0.0
    method: MomentMethod = MomentMethod.GRID_QUADRATURE
    params: OrderingParams = None

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))
        object.__setattr__(self, "std_error", float(self.std_error))
        object.__setattr__(self, "method", MomentMethod(self.method))
        if not (math.isfinite(self.value.real) and math.isfinite(self.value.imag)):
            raise NumericalError(f"moment estimate is not finite: {self.value}", reason="NonFiniteEstimate")
        if not math.isfinite(self.std_error) or self.std_error < 0:
            raise NumericalError(f"standard error must be finite and nonnegative, got {self.std_error}",
                                 reason="NonFiniteEstimate")
        if self.method is MomentMethod.GRID_QUADRATURE and self.std_error != 0:
            raise ValidationError("grid-quadrature estimates carry no standard error")


def check_degree(degree: int):
    if degree > MAX_MOMENT_ORDER:
        raise DegreeTooHigh(f"degree {degree} exceeds the supported maximum {MAX_MOMENT_ORDER}")


def check_params(sigma1: float, sigma2: float, params: OrderingParams):
    """Raise ParamMismatch unless the widths produce the ordering (s, r) of `params`."""
    if sigma1 <= 0 or sigma2 <= 0:
        raise ParamMismatch("distribution carries no smoothing widths; a Wigner function has no ordering to correct")
    s = -4.0 * sigma1 * sigma2
    r = 0.5 * math.log(sigma2 / sigma1)
    if abs(s - params.s) > PARAM_TOL:
        raise ParamMismatch(f"widths give s = {s:.12g} but the expansion uses s = {params.s:.12g}")
    if abs(r - params.r) > PARAM_TOL:
        raise ParamMismatch(f"widths give r = {r:.12g} but the expansion uses r = {params.r:.12g}")


def expectation_from_g(field: PhaseSpaceField, expansion: OrderingExpansion) -> MomentEstimate:
    """sum c_nm * integral(G conj(beta)^n beta^m) + constant."""
    check_degree(expansion.degree)
    check_params(field.sigma1, field.sigma2, expansion.params)
    r = expansion.params.r
    value = complex(expansion.constant)
    for (n, m), c in sorted(expansion.terms.items()):
        value += c * integrate_moment(field, n, m, r)
    return MomentEstimate(value, 0.0, MomentMethod.GRID_QUADRATURE, expansion.params)


def photon_number_from_g(field: PhaseSpaceField, params: OrderingParams) -> MomentEstimate:
    """<a^dagger a> from G; equal widths use integral(G |alpha|^2) + (s-1)/2."""
    if abs(params.r) < SHORTCUT_TOL:
        check_params(field.sigma1, field.sigma2, params)
        value = integrate_moment(field, 1, 1, 0.0) + 0.5 * (params.s - 1)
        return MomentEstimate(value, 0.0, MomentMethod.GRID_QUADRATURE, params)
    return expectation_from_g(field, photon_number_expansion(params))


def photon_number_from_q(field: PhaseSpaceField) -> MomentEstimate:
    """Perfect-detector form: integral(Q |alpha|^2) - 1."""
    params = OrderingParams.from_sr(-1.0)
    check_params(field.sigma1, field.sigma2, params)
    value = integrate_moment(field, 1, 1, 0.0) - 1.0
    return MomentEstimate(value, 0.0, MomentMethod.GRID_QUADRATURE, params)


def correction_factor(s: float) -> float:
    """(s+1)/2: what the imperfect-detector photon number adds to the Q-function formula."""
    if s > -1 + SHORTCUT_TOL:
        raise UnphysicalS(f"s = {s} > -1 would need sigma1 sigma2 < 1/4")
    return (s + 1) / 2


def qp2_from_g(field: PhaseSpaceField, params: OrderingParams) -> MomentEstimate:
    return expectation_from_g(field, qp2_expansion(params))


def moment_expansion(params: OrderingParams, n: int, m: int, dim: int) -> OrderingExpansion:
    """Ordered-basis expansion of a^dagger^n a^m; (1, 1) uses the closed form."""
    if (n, m) == (1, 1):
        return photon_number_expansion(params)
    return expand_in_ordered_basis(moment_operator(dim, n, m), params, dim, max_degree=n + m)


def expansion_polynomial(beta: np.ndarray, expansion: OrderingExpansion) -> np.ndarray:
    """sum c_nm conj(beta)^n beta^m, without the constant."""
    beta = np.asarray(beta, dtype=complex)
    conj = beta.conj()
    total = np.zeros_like(beta)
    for (n, m), c in sorted(expansion.terms.items()):
        total += c * conj ** n * beta ** m
    return total


def recovery_error_bound(field: PhaseSpaceField, expansion: OrderingExpansion,
                         rel_precision: float = DEFAULT_REL_PRECISION) -> float:
    """Worst-case error of the recovered value when every G sample has relative error `rel_precision`.

    Grows with the smoothing strength, since the ordering correction pushes weight
    onto the tails where |polynomial| is large.
    """
    check_degree(expansion.degree)
    check_params(field.sigma1, field.sigma2, expansion.params)
    beta = squeezed_amplitude(field.grid.alpha(), expansion.params.r)
    polynomial = np.abs(expansion_polynomial(beta, expansion))
    return float(rel_precision * np.sum(np.abs(field.values) * polynomial) * field.grid.cell_area)
