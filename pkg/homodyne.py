# homodyne.py - Eight-port homodyne detection with imperfect detectors, simulated
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from config import config
from fock import DensityMatrix, oracle_moment
from logging_system import get_logger, log_system_event
from moments import (
    MomentEstimate, MomentMethod, check_degree, check_params,
    expansion_polynomial, moment_expansion, recovery_error_bound,
)
from ordering import OrderingExpansion, OrderingParams
from phasespace import (
    BoundaryMassError, PhaseSpaceField, QuadratureGrid, SmoothingWidths, g_grid, squeezed_amplitude,
)
from utils import (
    ValidationError, NumericalError, complex_from_json, complex_to_json, format_count, format_duration,
    format_float, timed,
)

logger = get_logger('sampling')

NEGATIVE_TOL = 1e-9
MIN_ESTIMATE_SAMPLES = 100
MAX_TARGET_ORDER = 4
DEGRADATION_ETAS = (1.0, 0.8, 0.67, 0.5)
SAMPLES_HEADER = "# seed,eta1,eta2,count,state"


class UnphysicalEfficiency(ValidationError):
    pass


class NonPhysicalDistribution(NumericalError):
    pass


class InsufficientSamples(ValidationError):
    pass


class TargetOutOfRange(ValidationError):
    pass


class SampleFormatError(ValidationError):
    pass


@dataclass(frozen=True)
class DetectorModel:
    """Detector efficiencies and the smoothing/ordering parameters they imply."""

    eta1: float
    eta2: float
    omega: float = 1.0

    def __post_init__(self):
        for name, eta in (("eta1", self.eta1), ("eta2", self.eta2)):
            if not (math.isfinite(eta) and 0 < eta <= 1):
                raise UnphysicalEfficiency(f"{name} must lie in (0, 1], got {eta}")
        if not (math.isfinite(self.omega) and self.omega > 0):
            raise ValidationError(f"omega must be positive, got {self.omega}", reason="UnphysicalFrequency")

    @property
    def sigma1(self) -> float:
        # 4 sigma^2 = (2 - eta)/eta
        return 0.5 * math.sqrt((2 - self.eta1) / self.eta1)

    @property
    def sigma2(self) -> float:
        return 0.5 * math.sqrt((2 - self.eta2) / self.eta2)

    @property
    def kappa_over_omega(self) -> float:
        return self.sigma2 / self.sigma1

    @property
    def kappa(self) -> float:
        return self.omega * self.kappa_over_omega

    @property
    def s(self) -> float:
        return -4.0 * self.sigma1 * self.sigma2

    @property
    def r(self) -> float:
        return 0.5 * math.log(self.kappa_over_omega)

    @property
    def equal_efficiency(self) -> bool:
        return self.eta1 == self.eta2

    @property
    def widths(self) -> SmoothingWidths:
        return SmoothingWidths(self.sigma1, self.sigma2)

    @property
    def params(self) -> OrderingParams:
        return OrderingParams(self.s, self.r, self.kappa_over_omega)

    def as_dict(self) -> Dict[str, float]:
        return {
            "eta1": self.eta1, "eta2": self.eta2, "omega": self.omega,
            "sigma1": self.sigma1, "sigma2": self.sigma2,
            "kappa_over_omega": self.kappa_over_omega, "s": self.s, "r": self.r,
        }


def detector_params(eta1: float, eta2: float, omega: float = 1.0) -> DetectorModel:
    return DetectorModel(float(eta1), float(eta2), float(omega))


@dataclass(frozen=True)
class SampleSet:
    """Seeded joint quadrature outcomes, one (alpha_1, alpha_2) row per detection."""

    samples: np.ndarray
    seed: int
    detector: DetectorModel
    state_descriptor: str

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float).reshape(-1, 2)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def count(self) -> int:
        return int(self.samples.shape[0])

    @property
    def alpha(self) -> np.ndarray:
        return self.samples[:, 0] + 1j * self.samples[:, 1]


def _check_seed(seed: int):
    if not 0 <= int(seed) < 2 ** 64:
        raise ValidationError(f"seed must be a 64-bit unsigned integer, got {seed}", reason="InvalidSeed")


def sample_joint_counts(rho: DensityMatrix, detector: DetectorModel, count: int = None, seed: int = None,
                        grid: QuadratureGrid = None, distribution: PhaseSpaceField = None) -> SampleSet:
    """Draw `count` outcomes from p_ij = G_ij step^2 by inverse CDF over the flattened grid.

    PCG64 seeded with `seed` gives one stream per SampleSet, so equal inputs give
    bit-identical samples. A precomputed G field may be passed as `distribution`.
    """
    count = config.COUNT if count is None else int(count)
    seed = config.SEED if seed is None else int(seed)
    if count < 1:
        raise InsufficientSamples(f"sample count must be at least 1, got {count}")
    _check_seed(seed)

    if distribution is None:
        distribution = g_grid(rho, detector.widths, grid)
    else:
        check_params(distribution.sigma1, distribution.sigma2, detector.params)

    boundary = distribution.boundary_max()
    if boundary > config.BOUNDARY_TOL:
        raise BoundaryMassError(f"G is {boundary:.2e} at the grid boundary; samples would be truncated")
    if distribution.min_value < -NEGATIVE_TOL:
        raise NonPhysicalDistribution(
            f"G has negative value {distribution.min_value:.3e}; it is not a probability density"
        )

    with timed("sample_joint_counts", state=rho.label, count=count, seed=seed):
        weights = np.clip(distribution.values, 0.0, None).ravel() * distribution.grid.cell_area
        cdf = np.cumsum(weights)
        cdf /= cdf[-1]
        rng = np.random.Generator(np.random.PCG64(seed))
        draws = rng.random(count)
        index = np.searchsorted(cdf, draws, side='right')
        index = np.clip(index, 0, cdf.size - 1)
        rows, cols = np.unravel_index(index, distribution.values.shape)
        axis = distribution.grid.axis
        samples = np.column_stack([axis[rows], axis[cols]])

    logger.info(f"🎲 Drew {format_count(count)} joint counts for {rho.label} (seed {seed})")
    return SampleSet(samples, seed, detector, rho.label)


def _standard_error(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    spread = max(np.std(values.real, ddof=1), np.std(values.imag, ddof=1))
    return float(spread / math.sqrt(values.size))


def _check_sample_count(sample_set: SampleSet):
    if sample_set.count < MIN_ESTIMATE_SAMPLES:
        raise InsufficientSamples(
            f"moment estimates need at least {MIN_ESTIMATE_SAMPLES} samples, got {sample_set.count}"
        )


def estimate_moment(sample_set: SampleSet, n: int, m: int) -> MomentEstimate:
    """Empirical mean of conj(beta)^n beta^m, beta from the detector's squeeze parameter."""
    _check_sample_count(sample_set)
    if n < 0 or m < 0:
        raise ValidationError(f"moment orders must be nonnegative, got ({n}, {m})")
    check_degree(n + m)
    params = sample_set.detector.params
    if n == 0 and m == 0:
        return MomentEstimate(1.0, 0.0, MomentMethod.MONTE_CARLO, params)
    beta = squeezed_amplitude(sample_set.alpha, sample_set.detector.r)
    values = beta.conj() ** n * beta ** m
    return MomentEstimate(complex(values.mean()), _standard_error(values), MomentMethod.MONTE_CARLO, params)


def estimate_expansion(sample_set: SampleSet, expansion: OrderingExpansion) -> MomentEstimate:
    """Monte Carlo value of a whole expansion; the standard error accounts for term correlations."""
    _check_sample_count(sample_set)
    check_degree(expansion.degree)
    detector = sample_set.detector
    check_params(detector.sigma1, detector.sigma2, expansion.params)
    beta = squeezed_amplitude(sample_set.alpha, expansion.params.r)
    values = expansion_polynomial(beta, expansion)
    value = complex(values.mean()) + complex(expansion.constant)
    return MomentEstimate(value, _standard_error(values), MomentMethod.MONTE_CARLO, expansion.params)


@dataclass(frozen=True)
class ReconstructionEntry:
    target: Tuple[int, int]
    estimate: MomentEstimate
    oracle: complex

    @property
    def abs_error(self) -> float:
        return abs(self.estimate.value - self.oracle)

    @property
    def within_three_sigma(self) -> bool:
        return self.abs_error <= 3 * self.estimate.std_error

    def to_json(self) -> Dict[str, Any]:
        return {
            "target": list(self.target),
            "estimate": {
                "value": complex_to_json(self.estimate.value),
                "std_error": self.estimate.std_error,
                "method": self.estimate.method.value,
            },
            "oracle": complex_to_json(self.oracle),
            "abs_error": self.abs_error,
            "within_three_sigma": self.within_three_sigma,
        }


@dataclass(frozen=True)
class ReconstructionReport:
    entries: List[ReconstructionEntry]
    detector: DetectorModel
    sample_count: int
    wall_time: float
    seed: int
    state_descriptor: str
    samples: Optional[SampleSet] = field(default=None, compare=False, repr=False)

    def to_json(self) -> Dict[str, Any]:
        return {
            "state": self.state_descriptor,
            "detector": self.detector.as_dict(),
            "sample_count": self.sample_count,
            "seed": self.seed,
            "wall_time": self.wall_time,
            "entries": [entry.to_json() for entry in self.entries],
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "ReconstructionReport":
        try:
            detector_data = data["detector"]
            detector = DetectorModel(detector_data["eta1"], detector_data["eta2"], detector_data.get("omega", 1.0))
            entries = []
            for item in data["entries"]:
                estimate = MomentEstimate(
                    complex_from_json(item["estimate"]["value"]),
                    item["estimate"]["std_error"],
                    MomentMethod(item["estimate"]["method"]),
                    detector.params,
                )
                entries.append(ReconstructionEntry(tuple(item["target"]), estimate,
                                                   complex_from_json(item["oracle"])))
            return cls(entries, detector, int(data["sample_count"]), float(data["wall_time"]),
                       int(data["seed"]), data["state"])
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationError(f"bad reconstruction report: {e}", reason="ReportFormatError")

    def summary(self) -> str:
        parts = [f"({e.target[0]},{e.target[1]})={e.estimate.value.real:.6g}±{e.estimate.std_error:.2g}"
                 for e in self.entries]
        return f"{self.state_descriptor} η=({self.detector.eta1:g},{self.detector.eta2:g}): " + " ".join(parts)


def check_targets(targets: Sequence[Tuple[int, int]]) -> List[Tuple[int, int]]:
    checked = []
    for n, m in targets:
        n, m = int(n), int(m)
        if n < 0 or m < 0 or n + m > MAX_TARGET_ORDER:
            raise TargetOutOfRange(f"target ({n}, {m}) outside 0 <= n+m <= {MAX_TARGET_ORDER}")
        checked.append((n, m))
    if not checked:
        raise TargetOutOfRange("no targets given")
    return checked


def reconstruct(rho: DensityMatrix, detector: DetectorModel, targets: Sequence[Tuple[int, int]],
                count: int = None, seed: int = None, grid: QuadratureGrid = None,
                distribution: PhaseSpaceField = None) -> ReconstructionReport:
    """Simulate the measurement and recover <a^dagger^n a^m> for each target from the samples."""
    targets = check_targets(targets)
    seed = config.SEED if seed is None else int(seed)

    with timed("reconstruct", state=rho.label, eta1=detector.eta1, eta2=detector.eta2) as info:
        sample_set = sample_joint_counts(rho, detector, count, seed, grid, distribution)
        entries = []
        for n, m in targets:
            expansion = moment_expansion(detector.params, n, m, rho.dim)
            estimate = estimate_expansion(sample_set, expansion)
            entries.append(ReconstructionEntry((n, m), estimate, oracle_moment(rho, n, m)))
        info["targets"] = len(entries)

    report = ReconstructionReport(entries, detector, sample_set.count, info["duration"], seed, rho.label,
                                  samples=sample_set)
    logger.info(f"🔬 {report.summary()} in {format_duration(report.wall_time)}")
    for entry in report.entries:
        if not entry.within_three_sigma:
            logger.warning(f"⚠️ ({entry.target[0]},{entry.target[1]}) is {entry.abs_error:.3g} from the direct "
                           f"trace, more than 3 standard errors ({entry.estimate.std_error:.3g})")
    log_system_event("reconstruction_complete", {"state": rho.label, "count": sample_set.count,
                                                 "targets": [list(t) for t in targets]})
    return report


@dataclass(frozen=True)
class DegradationPoint:
    eta: float
    estimate: MomentEstimate
    oracle: complex
    error_bound: float

    @property
    def std_error(self) -> float:
        return self.estimate.std_error


def degradation_study(rho: DensityMatrix, etas: Sequence[float] = DEGRADATION_ETAS,
                      target: Tuple[int, int] = (2, 2), count: int = None, seed: int = None,
                      grid: QuadratureGrid = None) -> List[DegradationPoint]:
    """Recovered-moment uncertainty across equal-efficiency detectors, in the order given."""
    (n, m), = check_targets([target])
    points = []
    for eta in etas:
        detector = detector_params(eta, eta)
        distribution = g_grid(rho, detector.widths, grid)
        expansion = moment_expansion(detector.params, n, m, rho.dim)
        sample_set = sample_joint_counts(rho, detector, count, seed, grid, distribution)
        estimate = estimate_expansion(sample_set, expansion)
        bound = recovery_error_bound(distribution, expansion)
        points.append(DegradationPoint(eta, estimate, oracle_moment(rho, n, m), bound))
        logger.info(f"📉 η={eta:g}: ({n},{m}) standard error {estimate.std_error:.4g}, bound {bound:.4g}")
    return points


# ===================== EXPORT =====================

def samples_to_csv(sample_set: SampleSet) -> str:
    detector = sample_set.detector
    meta = [str(sample_set.seed), format_float(detector.eta1), format_float(detector.eta2),
            str(sample_set.count), sample_set.state_descriptor]
    lines = [SAMPLES_HEADER, "# " + ",".join(meta)]
    lines.extend(f"{format_float(a1)},{format_float(a2)}" for a1, a2 in sample_set.samples)
    return "\n".join(lines) + "\n"


def samples_from_csv(text: str) -> SampleSet:
    lines = [line for line in text.splitlines() if line.strip()]
    if len(lines) < 2 or lines[0].strip() != SAMPLES_HEADER or not lines[1].startswith("#"):
        raise SampleFormatError("sample CSV must start with the seed/eta/count/state header lines")
    # The state descriptor may itself contain a comma
    meta = lines[1][1:].strip().split(",", 4)
    if len(meta) != 5:
        raise SampleFormatError(f"sample CSV metadata needs 5 entries, got {len(meta)}")
    try:
        seed, count = int(meta[0]), int(meta[3])
        detector = detector_params(float(meta[1]), float(meta[2]))
        samples = np.array([[float(v) for v in line.split(",")] for line in lines[2:]], dtype=float)
    except ValueError as e:
        raise SampleFormatError(f"bad sample CSV: {e}")
    sample_set = SampleSet(samples, seed, detector, meta[4])
    if sample_set.count != count:
        raise SampleFormatError(f"header announces {count} samples, file holds {sample_set.count}")
    return sample_set


def write_samples_csv(sample_set: SampleSet, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(samples_to_csv(sample_set), encoding="utf-8")
    logger.info(f"💾 Wrote {format_count(sample_set.count)} samples to {path}")
    return path


def read_samples_csv(path: Union[str, Path]) -> SampleSet:
    return samples_from_csv(Path(path).read_text(encoding="utf-8"))


def write_report_json(report: ReconstructionReport, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(json.dumps(report.to_json(), indent=2), encoding="utf-8")
    return path
