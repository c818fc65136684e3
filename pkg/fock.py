# fock.py - Truncated Fock-basis states, ladder operators and the direct-trace oracle
import math
import cmath
from dataclasses import dataclass
from enum import Enum
from typing import Tuple, Union

import numpy as np

from config import config
from logging_system import get_logger
from utils import ValidationError, NumericalError, parse_complex, format_float, format_complex

logger = get_logger('numerics')

LEAKAGE_LIMIT = 1e-8
TRACE_TOL = 1e-12
PSD_TOL = 1e-10


class InvalidSpec(ValidationError):
    pass


class InvalidDensityMatrix(ValidationError):
    pass


class LeakageError(NumericalError):
    pass


class TruncationError(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class StateKind(str, Enum):
    COHERENT = "coherent"
    FOCK = "fock"
    THERMAL = "thermal"
    CAT = "cat"
    SQUEEZED_VACUUM = "squeezed_vacuum"


_KIND_ALIASES = {
    "coherent": StateKind.COHERENT,
    "fock": StateKind.FOCK,
    "number": StateKind.FOCK,
    "thermal": StateKind.THERMAL,
    "cat": StateKind.CAT,
    "squeezed_vacuum": StateKind.SQUEEZED_VACUUM,
    "squeezed": StateKind.SQUEEZED_VACUUM,
}


@dataclass(frozen=True)
class StateSpec:
    """One entry of the test-state catalog.

    Only the fields relevant to `kind` are read: `alpha` for coherent and cat
    states, `phase` for cat states, `n` for Fock states, `nbar` for thermal
    states and `r0` for squeezed vacuum.
    """

    kind: StateKind
    alpha: complex = 0j
    n: int = 0
    nbar: float = 0.0
    phase: float = 0.0
    r0: float = 0.0

    @classmethod
    def coherent(cls, alpha: complex) -> "StateSpec":
        return cls(StateKind.COHERENT, alpha=complex(alpha))

    @classmethod
    def fock(cls, n: int) -> "StateSpec":
        return cls(StateKind.FOCK, n=int(n))

    @classmethod
    def vacuum(cls) -> "StateSpec":
        return cls.fock(0)

    @classmethod
    def thermal(cls, nbar: float) -> "StateSpec":
        return cls(StateKind.THERMAL, nbar=float(nbar))

    @classmethod
    def cat(cls, alpha: complex, phase: float = 0.0) -> "StateSpec":
        return cls(StateKind.CAT, alpha=complex(alpha), phase=float(phase))

    @classmethod
    def squeezed_vacuum(cls, r0: float) -> "StateSpec":
        return cls(StateKind.SQUEEZED_VACUUM, r0=float(r0))

    @classmethod
    def parse(cls, text: str) -> "StateSpec":
        """Parse the `kind:args` grammar, e.g. `coherent:1.5+0i`, `fock:2`, `cat:1.5,3.14159`."""
        raw = str(text).strip()
        if raw.lower() == "vacuum":
            return cls.vacuum()
        kind_text, sep, args_text = raw.partition(":")
        kind = _KIND_ALIASES.get(kind_text.strip().lower())
        if kind is None or not sep:
            raise InvalidSpec(f"unknown state spec {text!r}; expected kind:args")
        args = [a.strip() for a in args_text.split(",") if a.strip()]
        try:
            if kind is StateKind.COHERENT and len(args) == 1:
                return cls.coherent(parse_complex(args[0]))
            if kind is StateKind.FOCK and len(args) == 1:
                number = float(args[0])
                if not math.isfinite(number) or number != int(number):
                    raise ValueError(f"Fock index must be an integer, got {args[0]}")
                return cls.fock(int(number))
            if kind is StateKind.THERMAL and len(args) == 1:
                return cls.thermal(float(args[0]))
            if kind is StateKind.CAT and len(args) in (1, 2):
                phase = float(args[1]) if len(args) == 2 else 0.0
                return cls.cat(parse_complex(args[0]), phase)
            if kind is StateKind.SQUEEZED_VACUUM and len(args) == 1:
                return cls.squeezed_vacuum(float(args[0]))
        except (ValueError, OverflowError) as e:
            raise InvalidSpec(f"bad arguments in state spec {text!r}: {e}")
        raise InvalidSpec(f"wrong number of arguments in state spec {text!r}")

    def describe(self) -> str:
        """Inverse of `parse`."""
        if self.kind is StateKind.COHERENT:
            return f"coherent:{format_complex(self.alpha)}"
        if self.kind is StateKind.FOCK:
            return f"fock:{self.n}"
        if self.kind is StateKind.THERMAL:
            return f"thermal:{format_float(self.nbar)}"
        if self.kind is StateKind.CAT:
            return f"cat:{format_complex(self.alpha)},{format_float(self.phase)}"
        return f"squeezed_vacuum:{format_float(self.r0)}"

    def validate(self, dim: int):
        values = [self.alpha.real, self.alpha.imag, self.nbar, self.phase, self.r0]
        if not all(math.isfinite(v) for v in values):
            raise InvalidSpec(f"non-finite parameter in {self.describe()}")
        if self.kind is StateKind.FOCK and not 0 <= self.n < dim:
            raise InvalidSpec(f"Fock index {self.n} outside basis of dimension {dim}")
        if self.kind is StateKind.THERMAL and self.nbar < 0:
            raise InvalidSpec(f"thermal occupation must be nonnegative, got {self.nbar}")


@dataclass(frozen=True)
class DensityMatrix:
    """Trace-one Hermitian positive matrix over a truncated Fock basis."""

    entries: np.ndarray
    label: str = ""

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1] or entries.shape[0] < 2:
            raise InvalidDensityMatrix(f"density matrix must be square with dim >= 2, got shape {entries.shape}")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def populations(self) -> np.ndarray:
        return self.entries.diagonal().real

    @property
    def top_population(self) -> float:
        return float(self.entries[-1, -1].real)

    def check(self, leakage: bool = False):
        """Assert the density-matrix invariants, raising on the first violation."""
        if not np.all(np.isfinite(self.entries)):
            raise InvalidDensityMatrix("density matrix has non-finite entries")
        if not np.array_equal(self.entries, self.entries.conj().T):
            raise InvalidDensityMatrix("density matrix is not Hermitian")
        trace = np.trace(self.entries).real
        if abs(trace - 1.0) > TRACE_TOL:
            raise InvalidDensityMatrix(f"trace is {trace!r}, expected 1")
        smallest = np.linalg.eigvalsh(self.entries)[0]
        if smallest < -PSD_TOL:
            raise InvalidDensityMatrix(f"density matrix is not positive semidefinite (eigenvalue {smallest:.3e})")
        if leakage and self.top_population >= LEAKAGE_LIMIT:
            raise LeakageError(
                f"top Fock level {self.dim - 1} holds population {self.top_population:.3e} "
                f"(limit {LEAKAGE_LIMIT:g}); increase dim"
            )


@dataclass(frozen=True)
class OperatorMatrix:
    """Operator represented in the truncated Fock basis."""

    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DimensionMismatch(f"operator matrix must be square, got shape {entries.shape}")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @classmethod
    def identity(cls, dim: int) -> "OperatorMatrix":
        return cls(np.eye(dim, dtype=complex))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.entries.conj().T)

    def power(self, k: int) -> "OperatorMatrix":
        return OperatorMatrix(np.linalg.matrix_power(self.entries, k))

    def _check_dim(self, other: "OperatorMatrix"):
        if other.dim != self.dim:
            raise DimensionMismatch(f"operator dimensions differ: {self.dim} vs {other.dim}")

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check_dim(other)
        return OperatorMatrix(self.entries @ other.entries)

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check_dim(other)
        return OperatorMatrix(self.entries + other.entries)

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check_dim(other)
        return OperatorMatrix(self.entries - other.entries)

    def __mul__(self, scalar: Union[complex, float]) -> "OperatorMatrix":
        return OperatorMatrix(self.entries * complex(scalar))

    __rmul__ = __mul__


def _coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    amplitudes = np.empty(dim, dtype=complex)
    amplitudes[0] = cmath.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, dim):
        amplitudes[n] = amplitudes[n - 1] * alpha / math.sqrt(n)
    return amplitudes


def _squeezed_vacuum_amplitudes(r0: float, dim: int) -> np.ndarray:
    amplitudes = np.zeros(dim, dtype=complex)
    amplitudes[0] = 1.0 / math.sqrt(math.cosh(r0))
    ratio = -math.tanh(r0)
    for k in range(2, dim, 2):
        amplitudes[k] = amplitudes[k - 2] * ratio * math.sqrt(k * (k - 1)) / k
    return amplitudes


def _state_vector(spec: StateSpec, dim: int) -> np.ndarray:
    if spec.kind is StateKind.COHERENT:
        return _coherent_amplitudes(spec.alpha, dim)
    if spec.kind is StateKind.FOCK:
        vector = np.zeros(dim, dtype=complex)
        vector[spec.n] = 1.0
        return vector
    if spec.kind is StateKind.CAT:
        # Exact normalization: |N|^-2 = 2 + 2 Re(e^{i phase} <a|-a>)
        overlap = math.exp(-2 * abs(spec.alpha) ** 2)
        norm_sq = 2.0 + 2.0 * (cmath.exp(1j * spec.phase) * overlap).real
        if norm_sq <= 1e-14:
            raise InvalidSpec(f"cat state {spec.describe()} has zero norm")
        vector = _coherent_amplitudes(spec.alpha, dim) + cmath.exp(1j * spec.phase) * _coherent_amplitudes(-spec.alpha, dim)
        return vector / math.sqrt(norm_sq)
    if spec.kind is StateKind.SQUEEZED_VACUUM:
        return _squeezed_vacuum_amplitudes(spec.r0, dim)
    raise InvalidSpec(f"{spec.kind} is not a pure state")


def build_state(spec: StateSpec, dim: int = None) -> DensityMatrix:
    """Build the density matrix for `spec`, renormalized after truncation."""
    dim = config.DIM if dim is None else int(dim)
    if dim < 2:
        raise InvalidSpec(f"Fock dimension must be at least 2, got {dim}")
    spec.validate(dim)

    if spec.kind is StateKind.THERMAL:
        levels = np.arange(dim)
        populations = np.power(spec.nbar, levels) / np.power(1.0 + spec.nbar, levels + 1)
        entries = np.diag(populations).astype(complex)
    else:
        vector = _state_vector(spec, dim)
        entries = np.outer(vector, vector.conj())

    entries = entries / np.trace(entries).real
    entries = 0.5 * (entries + entries.conj().T)
    rho = DensityMatrix(entries, label=spec.describe())
    rho.check(leakage=True)
    logger.debug(f"🧪 Built {rho.label} at dim={dim}, top population {rho.top_population:.2e}")
    return rho


def ladder_matrices(dim: int) -> Tuple[OperatorMatrix, OperatorMatrix]:
    """Return (a, a_dagger) with a[n-1][n] = sqrt(n)."""
    if dim < 2:
        raise InvalidSpec(f"Fock dimension must be at least 2, got {dim}")
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)
    return OperatorMatrix(a), OperatorMatrix(a.conj().T)


def squeezed_ladder(dim: int, r: float) -> OperatorMatrix:
    """b = cosh(r) a + sinh(r) a_dagger, the annihilator of the squeezed mode."""
    if not math.isfinite(r):
        raise InvalidSpec(f"squeeze parameter must be finite, got {r}")
    a, a_dagger = ladder_matrices(dim)
    if r == 0:
        return a
    return math.cosh(r) * a + math.sinh(r) * a_dagger


def number_operator(dim: int) -> OperatorMatrix:
    a, a_dagger = ladder_matrices(dim)
    return a_dagger @ a


def quadrature_matrices(dim: int) -> Tuple[OperatorMatrix, OperatorMatrix]:
    """q = (a + a_dagger)/sqrt(2), p = -i(a - a_dagger)/sqrt(2) (hbar = m = omega = 1)."""
    a, a_dagger = ladder_matrices(dim)
    q = (a + a_dagger) * (1 / math.sqrt(2))
    p = (a - a_dagger) * (-1j / math.sqrt(2))
    return q, p


def qp2_matrix(dim: int) -> OperatorMatrix:
    """The bare product q p p."""
    q, p = quadrature_matrices(dim)
    return q @ p @ p


def moment_operator(dim: int, n: int, m: int) -> OperatorMatrix:
    """a_dagger^n a^m."""
    a, a_dagger = ladder_matrices(dim)
    return a_dagger.power(n) @ a.power(m)


def oracle_expectation(rho: DensityMatrix, operator: OperatorMatrix) -> complex:
    """Tr(rho O) by direct matrix arithmetic."""
    if operator.dim != rho.dim:
        raise DimensionMismatch(f"operator dim {operator.dim} does not match state dim {rho.dim}")
    # Tr(AB) = sum_ij A_ij B_ji
    return complex(np.sum(rho.entries * operator.entries.T))


def oracle_moment(rho: DensityMatrix, n: int, m: int) -> complex:
    """<a_dagger^n a^m> by direct trace; n + m is limited to dim/2."""
    if n < 0 or m < 0:
        raise TruncationError(f"moment orders must be nonnegative, got ({n}, {m})")
    if n + m > rho.dim / 2:
        raise TruncationError(f"moment order {n}+{m} exceeds the truncation margin dim/2 = {rho.dim / 2:g}")
    return oracle_expectation(rho, moment_operator(rho.dim, n, m))
