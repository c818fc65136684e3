# phasespace.py - Wigner, Q and Gaussian-smoothed (G) distributions on quadrature grids
import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
from scipy import ndimage

from config import config
from fock import DensityMatrix
from logging_system import get_logger
from utils import ValidationError, NumericalError, format_float, timed

logger = get_logger('numerics')

GRID_STEP_LIMIT = 0.25
MIN_GRID_POINTS = 33
KERNEL_REACH = 6.0  # kernel truncated at this many standard deviations
WIDTH_TOL = 1e-12
NONNEGATIVE_TOL = 1e-9
NORMALIZATION_TOL = 2e-3
ALIASING_TOL = 1e-10
ENVELOPE_FLOOR = 1e-30
MAX_MOMENT_ORDER = 6


class InvalidGrid(ValidationError):
    pass


class GridTooCoarse(ValidationError):
    pass


class KernelExceedsGrid(ValidationError):
    pass


class InvalidWidths(ValidationError):
    pass


class MomentOrderError(ValidationError):
    pass


class FieldFormatError(ValidationError):
    pass


class AliasingError(NumericalError):
    pass


class BoundaryMassError(NumericalError):
    pass


class NormalizationError(NumericalError):
    pass


class FieldLabel(str, Enum):
    WIGNER = "wigner"
    HUSIMI = "husimi"
    Q = "q"
    G = "g"


@dataclass(frozen=True)
class QuadratureGrid:
    """Uniform square grid; axis 1 is alpha_1 = Re(alpha), axis 2 is alpha_2 = Im(alpha)."""

    min: float
    max: float
    step: float

    def __post_init__(self):
        values = (self.min, self.max, self.step)
        if not all(math.isfinite(v) for v in values):
            raise InvalidGrid(f"grid bounds must be finite, got {values}")
        if self.step <= 0:
            raise InvalidGrid(f"grid step must be positive, got {self.step}")
        if self.max <= self.min:
            raise InvalidGrid(f"grid max ({self.max}) must exceed grid min ({self.min})")
        if abs(self.min + self.max) > 1e-12:
            raise InvalidGrid(f"grid must be symmetric about 0, got [{self.min}, {self.max}]")
        if self.points < MIN_GRID_POINTS:
            raise InvalidGrid(f"grid needs at least {MIN_GRID_POINTS} points per axis, got {self.points}")

    @classmethod
    def default(cls) -> "QuadratureGrid":
        return cls(config.GRID_MIN, config.GRID_MAX, config.GRID_STEP)

    @property
    def points(self) -> int:
        return int(round((self.max - self.min) / self.step)) + 1

    @property
    def axis(self) -> np.ndarray:
        return self.min + self.step * np.arange(self.points)

    @property
    def cell_area(self) -> float:
        return self.step * self.step

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.axis, self.axis, indexing='ij')

    def alpha(self) -> np.ndarray:
        alpha1, alpha2 = self.mesh()
        return alpha1 + 1j * alpha2

    def as_dict(self) -> dict:
        return {"min": self.min, "max": self.max, "step": self.step}


@dataclass(frozen=True)
class SmoothingWidths:
    """Standard deviations of the smoothing Gaussian along alpha_1 and alpha_2."""

    sigma1: float
    sigma2: float

    def __post_init__(self):
        for name, value in (("sigma1", self.sigma1), ("sigma2", self.sigma2)):
            if not math.isfinite(value) or value <= 0:
                raise InvalidWidths(f"{name} must be positive and finite, got {value}")

    @classmethod
    def isotropic(cls, sigma: float) -> "SmoothingWidths":
        return cls(sigma, sigma)

    @classmethod
    def from_ordering(cls, s: float, r: float = 0.0) -> "SmoothingWidths":
        """Invert s = -4 sigma1 sigma2, e^{2r} = sigma2/sigma1."""
        if s >= 0:
            raise InvalidWidths(f"ordering parameter s must be negative, got {s}")
        sigma = math.sqrt(-s / 4.0)
        return cls(sigma * math.exp(-r), sigma * math.exp(r))

    @property
    def product(self) -> float:
        return self.sigma1 * self.sigma2

    @property
    def physical(self) -> bool:
        """Uncertainty-relation flag: sigma1 sigma2 >= 1/4."""
        return self.product >= 0.25 - WIDTH_TOL


def _label_for(sigma1: float, sigma2: float) -> FieldLabel:
    if sigma1 == 0 and sigma2 == 0:
        return FieldLabel.WIGNER
    if abs(sigma1 - 0.5) <= WIDTH_TOL and abs(sigma2 - 0.5) <= WIDTH_TOL:
        return FieldLabel.Q
    if abs(sigma1 * sigma2 - 0.25) <= WIDTH_TOL:
        return FieldLabel.HUSIMI
    return FieldLabel.G


@dataclass(frozen=True)
class PhaseSpaceField:
    """Real samples of W, Q, H or G on a grid (values[i][j] at alpha_1 = axis[i], alpha_2 = axis[j])."""

    grid: QuadratureGrid
    values: np.ndarray
    label: FieldLabel
    sigma1: float = 0.0
    sigma2: float = 0.0

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        expected = (self.grid.points, self.grid.points)
        if values.shape != expected:
            raise FieldFormatError(f"field shape {values.shape} does not match grid {expected}")
        if not np.all(np.isfinite(values)):
            raise NumericalError("field has non-finite values", reason="NonFiniteField")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "label", FieldLabel(self.label))

    @property
    def widths(self) -> Optional[SmoothingWidths]:
        if self.sigma1 <= 0 or self.sigma2 <= 0:
            return None
        return SmoothingWidths(self.sigma1, self.sigma2)

    @property
    def physical(self) -> bool:
        return self.sigma1 * self.sigma2 >= 0.25 - WIDTH_TOL

    @property
    def min_value(self) -> float:
        return float(self.values.min())

    @property
    def max_value(self) -> float:
        return float(self.values.max())

    def normalization(self) -> float:
        return float(self.values.sum() * self.grid.cell_area)

    def boundary_max(self) -> float:
        """Largest |value| on the outermost ring of grid points."""
        v = np.abs(self.values)
        return float(max(v[0, :].max(), v[-1, :].max(), v[:, 0].max(), v[:, -1].max()))

    def check(self):
        """Raise if normalization or (for physical widths) nonnegativity fails."""
        norm = self.normalization()
        if abs(norm - 1.0) > NORMALIZATION_TOL:
            raise NormalizationError(
                f"{self.label.value} field integrates to {norm:.6f}; the grid does not hold the distribution"
            )
        if self.label is not FieldLabel.WIGNER and self.physical and self.min_value < -NONNEGATIVE_TOL:
            raise NumericalError(
                f"{self.label.value} field with physical widths has negative value {self.min_value:.3e}",
                reason="NegativeDistribution",
            )


def _laguerre_clenshaw(L: int, x: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Clenshaw evaluation of sum_n c_n (-1)^n sqrt(L! n!/(L+n)!) LaguerreL[n, L, x]."""
    if len(c) == 1:
        y0 = c[0]
        y1 = 0
    elif len(c) == 2:
        y0 = c[0]
        y1 = c[1]
    else:
        k = len(c)
        y0 = c[-2]
        y1 = c[-1]
        for i in range(3, len(c) + 1):
            k -= 1
            y0, y1 = (c[-i] - y1 * (float((k - 1) * (L + k - 1)) / ((L + k) * k)) ** 0.5,
                      y0 - y1 * ((L + 2 * k - 1) - x) * ((L + k) * k) ** -0.5)

    return y0 - y1 * ((L + 1) - x) * (L + 1) ** -0.5


def _check_sampling(grid: QuadratureGrid):
    if grid.step > GRID_STEP_LIMIT:
        raise GridTooCoarse(f"grid step {grid.step} exceeds {GRID_STEP_LIMIT}; Wigner fringes would be undersampled")


def wigner_grid(rho: DensityMatrix, grid: QuadratureGrid = None) -> PhaseSpaceField:
    """Wigner function from the Fock matrix elements of the Wigner kernel.

    W = (2/pi) e^{-2|alpha|^2} Re sum_L c_L (2 alpha)^L / sqrt(L!), with each c_L a
    Laguerre series over the L-th superdiagonal of rho, summed by Horner in L.
    """
    grid = grid or QuadratureGrid.default()
    _check_sampling(grid)

    with timed("wigner_grid", state=rho.label, dim=rho.dim, points=grid.points):
        two_alpha = 2.0 * grid.alpha()
        x = np.abs(two_alpha) ** 2
        dim = rho.dim

        # Off-diagonal elements enter twice (rho_mn and rho_nm)
        weighted = rho.entries * (2 * np.ones((dim, dim)) - np.eye(dim))
        w0 = weighted[0, -1] * np.ones_like(two_alpha)
        L = dim - 1
        while L > 0:
            L -= 1
            w0 = _laguerre_clenshaw(L, x, np.diag(weighted, L)) + w0 * two_alpha * (L + 1) ** -0.5

        values = (2.0 / np.pi) * w0.real * np.exp(-0.5 * x)

    field = PhaseSpaceField(grid, values, FieldLabel.WIGNER)
    field.check()
    logger.debug(f"🌊 Wigner of {rho.label}: range [{field.min_value:.5f}, {field.max_value:.5f}]")
    return field


def q_exact_grid(rho: DensityMatrix, grid: QuadratureGrid = None) -> PhaseSpaceField:
    """Q(alpha) = <alpha|rho|alpha>/pi from coherent-state overlaps, row by row."""
    grid = grid or QuadratureGrid.default()
    axis = grid.axis
    values = np.empty((grid.points, grid.points))

    with timed("q_exact_grid", state=rho.label, dim=rho.dim, points=grid.points):
        for i, alpha1 in enumerate(axis):
            alphas = alpha1 + 1j * axis
            overlaps = np.empty((axis.size, rho.dim), dtype=complex)
            overlaps[:, 0] = np.exp(-0.5 * np.abs(alphas) ** 2)
            for n in range(1, rho.dim):
                overlaps[:, n] = overlaps[:, n - 1] * alphas / math.sqrt(n)
            # <alpha|rho|alpha> = sum_mn conj(c_m) rho_mn c_n
            values[i] = np.sum((overlaps.conj() @ rho.entries) * overlaps, axis=1).real / np.pi

    field = PhaseSpaceField(grid, values, FieldLabel.Q, 0.5, 0.5)
    field.check()
    return field


def _gaussian_kernel(sigma: float, step: float) -> np.ndarray:
    half = int(math.ceil(KERNEL_REACH * sigma / step))
    offsets = step * np.arange(-half, half + 1)
    kernel = np.exp(-0.5 * (offsets / sigma) ** 2)
    return kernel / kernel.sum()


def smooth(field: PhaseSpaceField, widths: SmoothingWidths) -> PhaseSpaceField:
    """Separable Gaussian convolution; widths add in quadrature with the field's own."""
    grid = field.grid
    reach = KERNEL_REACH * max(widths.sigma1, widths.sigma2)
    if reach > (grid.max - grid.min) / 2:
        raise KernelExceedsGrid(
            f"kernel support {reach:.3f} exceeds half the grid span {(grid.max - grid.min) / 2:.3f}"
        )

    with timed("smooth", sigma1=widths.sigma1, sigma2=widths.sigma2, points=grid.points):
        values = ndimage.convolve1d(field.values, _gaussian_kernel(widths.sigma1, grid.step),
                                    axis=0, mode='constant', cval=0.0)
        values = ndimage.convolve1d(values, _gaussian_kernel(widths.sigma2, grid.step),
                                    axis=1, mode='constant', cval=0.0)

    sigma1 = math.hypot(field.sigma1, widths.sigma1)
    sigma2 = math.hypot(field.sigma2, widths.sigma2)
    result = PhaseSpaceField(grid, values, _label_for(sigma1, sigma2), sigma1, sigma2)
    result.check()
    return result


def g_grid(rho: DensityMatrix, widths: SmoothingWidths, grid: QuadratureGrid = None) -> PhaseSpaceField:
    """G by the convolution path: smooth(wigner_grid(rho), widths)."""
    return smooth(wigner_grid(rho, grid), widths)


def s_parameterized_grid(rho: DensityMatrix, s: float, grid: QuadratureGrid = None) -> PhaseSpaceField:
    """Isotropic smoothing sigma1 = sigma2 = sqrt(-s/4); s = 0 is the Wigner function itself."""
    if s == 0:
        return wigner_grid(rho, grid)
    return g_grid(rho, SmoothingWidths.from_ordering(s), grid)


def weyl_characteristic(rho: DensityMatrix, lam: np.ndarray) -> np.ndarray:
    """Tr(rho D(lambda)) from the Laguerre form of the displacement matrix elements."""
    lam = np.asarray(lam, dtype=complex)
    x = np.abs(lam) ** 2
    total = np.zeros_like(lam)
    raising = np.ones_like(lam)   # lambda^L / sqrt(L!)
    lowering = np.ones_like(lam)  # (-conj(lambda))^L / sqrt(L!)
    for L in range(rho.dim):
        if L > 0:
            raising = raising * lam / math.sqrt(L)
            lowering = lowering * (-lam.conj()) / math.sqrt(L)
        signs = (-1.0) ** np.arange(rho.dim - L)
        # <n+L|D|n> pairs with rho_{n,n+L}
        total += raising * _laguerre_clenshaw(L, x, np.diag(rho.entries, L) * signs)
        if L > 0:
            # <n|D|n+L> pairs with rho_{n+L,n}
            total += lowering * _laguerre_clenshaw(L, x, np.diag(rho.entries, -L) * signs)
    return total * np.exp(-0.5 * x)


def g_via_characteristic(rho: DensityMatrix, widths: SmoothingWidths,
                         grid: QuadratureGrid = None) -> PhaseSpaceField:
    """G from the characteristic function times the Gaussian ordering factor, inverted by FFT.

    chi_G(k) = Tr(rho D(lambda)) exp(-(sigma1^2 k1^2 + sigma2^2 k2^2)/2) with
    lambda = (-k2 + i k1)/2, so that chi_G(k) = integral G(alpha) e^{i k.alpha} d^2alpha.
    """
    grid = grid or QuadratureGrid.default()
    size = grid.points
    index = np.rint(np.fft.fftfreq(size) * size)
    k = 2 * np.pi * np.fft.fftfreq(size, d=grid.step)
    k1, k2 = np.meshgrid(k, k, indexing='ij')

    with timed("g_via_characteristic", state=rho.label, sigma1=widths.sigma1, sigma2=widths.sigma2):
        envelope = np.exp(-0.5 * ((widths.sigma1 * k1) ** 2 + (widths.sigma2 * k2) ** 2))
        # |Tr(rho D)| <= 1, so frequencies under the floor contribute nothing
        active = envelope > ENVELOPE_FLOOR
        chi = np.zeros(k1.shape, dtype=complex)
        lam = 0.5 * (-k2[active] + 1j * k1[active])
        chi[active] = weyl_characteristic(rho, lam) * envelope[active]

        edge = np.abs(index) == np.abs(index).max()
        nyquist = max(np.abs(chi[edge, :]).max(), np.abs(chi[:, edge]).max())
        if nyquist > ALIASING_TOL:
            raise AliasingError(
                f"characteristic function is {nyquist:.2e} at the Nyquist frequency; refine the grid step"
            )

        phase = np.exp(-1j * (k1 + k2) * grid.min)
        values = np.fft.fft2(chi * phase).real / (size * grid.step) ** 2

    field = PhaseSpaceField(grid, values, _label_for(widths.sigma1, widths.sigma2), widths.sigma1, widths.sigma2)
    field.check()
    return field


def squeezed_amplitude(alpha: np.ndarray, r: float) -> np.ndarray:
    """beta = alpha cosh r + conj(alpha) sinh r, i.e. beta_1 = e^r alpha_1 and beta_2 = e^-r alpha_2."""
    alpha = np.asarray(alpha, dtype=complex)
    if r == 0:
        return alpha
    return alpha * math.cosh(r) + alpha.conj() * math.sinh(r)


def integrate_moment(field: PhaseSpaceField, n: int, m: int, r: float = 0.0) -> complex:
    """Grid quadrature of field * conj(beta)^n beta^m with beta = alpha cosh r + conj(alpha) sinh r.

    The alpha -> beta map has unit Jacobian, so no density correction is needed.
    """
    if n < 0 or m < 0 or n + m > MAX_MOMENT_ORDER:
        raise MomentOrderError(f"moment order ({n}, {m}) outside 0 <= n+m <= {MAX_MOMENT_ORDER}")
    norm = field.normalization()
    if abs(norm - 1.0) > NORMALIZATION_TOL:
        raise NormalizationError(f"{field.label.value} field integrates to {norm:.6f}, not 1")
    boundary = field.boundary_max()
    if boundary > config.BOUNDARY_TOL:
        raise BoundaryMassError(
            f"field is {boundary:.2e} at the grid boundary (limit {config.BOUNDARY_TOL:g}); moment would be biased"
        )
    beta = squeezed_amplitude(field.grid.alpha(), r)
    integrand = field.values * beta.conj() ** n * beta ** m
    return complex(integrand.sum() * field.grid.cell_area)


def marginal(field: PhaseSpaceField, quadrature: int = 1) -> np.ndarray:
    """Distribution of alpha_1 (quadrature=1) or alpha_2 (quadrature=2) on grid.axis."""
    if quadrature not in (1, 2):
        raise ValidationError(f"quadrature must be 1 or 2, got {quadrature}")
    other_axis = 1 if quadrature == 1 else 0
    return field.values.sum(axis=other_axis) * field.grid.step


# ===================== EXPORT =====================

CSV_HEADER = "# label,sigma1,sigma2,min,max,step"


def field_to_csv(field: PhaseSpaceField) -> str:
    meta = [field.label.value] + [format_float(v) for v in
                                  (field.sigma1, field.sigma2, field.grid.min, field.grid.max, field.grid.step)]
    lines = [CSV_HEADER, "# " + ",".join(meta)]
    lines.extend(",".join(format_float(v) for v in row) for row in field.values)
    return "\n".join(lines) + "\n"


def field_from_csv(text: str) -> PhaseSpaceField:
    lines = [line for line in text.splitlines() if line.strip()]
    if len(lines) < 3 or lines[0].strip() != CSV_HEADER or not lines[1].startswith("#"):
        raise FieldFormatError("field CSV must start with the label/sigma/grid header lines")
    meta = [item.strip() for item in lines[1][1:].split(",")]
    if len(meta) != 6:
        raise FieldFormatError(f"field CSV metadata needs 6 entries, got {len(meta)}")
    try:
        label = FieldLabel(meta[0])
        sigma1, sigma2, grid_min, grid_max, step = (float(v) for v in meta[1:])
        values = np.array([[float(v) for v in line.split(",")] for line in lines[2:]])
    except ValueError as e:
        raise FieldFormatError(f"bad field CSV: {e}")
    return PhaseSpaceField(QuadratureGrid(grid_min, grid_max, step), values, label, sigma1, sigma2)


def field_to_json(field: PhaseSpaceField) -> dict:
    return {
        "label": field.label.value,
        "sigma1": field.sigma1,
        "sigma2": field.sigma2,
        "grid": field.grid.as_dict(),
        "values": field.values.tolist(),
    }


def field_from_json(data: dict) -> PhaseSpaceField:
    try:
        grid = QuadratureGrid(float(data["grid"]["min"]), float(data["grid"]["max"]), float(data["grid"]["step"]))
        return PhaseSpaceField(grid, np.array(data["values"], dtype=float), FieldLabel(data["label"]),
                               float(data["sigma1"]), float(data["sigma2"]))
    except (KeyError, TypeError, ValueError) as e:
        raise FieldFormatError(f"bad field JSON: {e}")


def write_field(field: PhaseSpaceField, path: Union[str, Path], fmt: str = None) -> Path:
    path = Path(path)
    fmt = (fmt or config.FORMAT).lower()
    if fmt == "csv":
        path.write_text(field_to_csv(field), encoding="utf-8")
    elif fmt == "json":
        path.write_text(json.dumps(field_to_json(field)), encoding="utf-8")
    else:
        raise FieldFormatError(f"unknown field format {fmt!r}")
    logger.info(f"💾 Wrote {field.label.value} field to {path}")
    return path


def read_field(path: Union[str, Path]) -> PhaseSpaceField:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        return field_from_json(json.loads(text))
    return field_from_csv(text)
