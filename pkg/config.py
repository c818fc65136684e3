# config.py - Toolkit configuration with validation and health status
import os
import logging
from typing import List, Optional, Tuple
from datetime import datetime

from dotenv import load_dotenv

load_dotenv()

logger = logging.getLogger(__name__)

OUTPUT_FORMATS = ("csv", "json")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class ConfigValidator:
    """Parsers for environment values; each raises ValueError on bad input"""

    @staticmethod
    def parse_positive_int(name: str, raw: Optional[str], default: int) -> int:
        if raw is None or str(raw).strip() == "":
            return default
        try:
            value = int(str(raw).strip().replace("_", ""))
        except ValueError:
            raise ValueError(f"{name} must be an integer, got {raw!r}")
        if value <= 0:
            raise ValueError(f"{name} must be positive, got {value}")
        return value

    @staticmethod
    def parse_float(name: str, raw: Optional[str], default: float) -> float:
        if raw is None or str(raw).strip() == "":
            return default
        try:
            return float(str(raw).strip())
        except ValueError:
            raise ValueError(f"{name} must be a number, got {raw!r}")

    @staticmethod
    def parse_bool(raw: Optional[str], default: bool = False) -> bool:
        if raw is None:
            return default
        return str(raw).strip().lower() in ("1", "true", "yes", "on")

    @staticmethod
    def parse_choice(name: str, raw: Optional[str], choices: Tuple[str, ...], default: str) -> str:
        if raw is None or str(raw).strip() == "":
            return default
        value = str(raw).strip()
        # Formats are lower-case, levels upper-case
        for choice in choices:
            if value.lower() == choice.lower():
                return choice
        raise ValueError(f"{name} must be one of {', '.join(choices)}, got {raw!r}")

    @staticmethod
    def validate_grid(grid_min: float, grid_max: float, step: float) -> List[str]:
        """Return the problems with a quadrature grid triple (empty when fine)"""
        problems = []
        if step <= 0:
            problems.append(f"grid step must be positive, got {step}")
        if grid_max <= grid_min:
            problems.append(f"grid max ({grid_max}) must exceed grid min ({grid_min})")
        if abs(grid_min + grid_max) > 1e-12:
            problems.append(f"grid must be symmetric about 0, got [{grid_min}, {grid_max}]")
        if step > 0 and grid_max > grid_min:
            points = round((grid_max - grid_min) / step) + 1
            if points < 33:
                problems.append(f"grid needs at least 33 points per axis, got {points}")
        return problems


class ToolkitConfig:
    """Configuration loaded from the environment, validated on construction"""

    def __init__(self):
        self.validation_errors = []
        self.warnings = []
        self._load_config()
        self._validate_config()
        self._log_config_status()

    def _load_config(self):
        """Load all configuration from environment variables"""
        # Defaults first so a single bad value does not leave attributes unset
        self.DIM = 64
        self.GRID_MIN = -8.0
        self.GRID_MAX = 8.0
        self.GRID_STEP = 0.05
        self.COUNT = 1_000_000
        self.SEED = 42
        self.FORMAT = "csv"
        self.BOUNDARY_TOL = 1e-9
        self.LOG_LEVEL = "WARNING"
        self.LOG_DIR = os.environ.get("GSW_LOG_DIR", "logs")
        self.LOG_TO_FILE = ConfigValidator.parse_bool(os.environ.get("GSW_LOG_TO_FILE"), False)

        loaders = [
            ("DIM", lambda: ConfigValidator.parse_positive_int("GSW_DIM", os.environ.get("GSW_DIM"), 64)),
            ("GRID_MIN", lambda: ConfigValidator.parse_float("GSW_GRID_MIN", os.environ.get("GSW_GRID_MIN"), -8.0)),
            ("GRID_MAX", lambda: ConfigValidator.parse_float("GSW_GRID_MAX", os.environ.get("GSW_GRID_MAX"), 8.0)),
            ("GRID_STEP", lambda: ConfigValidator.parse_float("GSW_GRID_STEP", os.environ.get("GSW_GRID_STEP"), 0.05)),
            ("COUNT", lambda: ConfigValidator.parse_positive_int("GSW_COUNT", os.environ.get("GSW_COUNT"), 1_000_000)),
            ("SEED", lambda: int(os.environ.get("GSW_SEED", "42"))),
            ("FORMAT", lambda: ConfigValidator.parse_choice("GSW_FORMAT", os.environ.get("GSW_FORMAT"), OUTPUT_FORMATS, "csv")),
            ("BOUNDARY_TOL", lambda: ConfigValidator.parse_float("GSW_BOUNDARY_TOL", os.environ.get("GSW_BOUNDARY_TOL"), 1e-9)),
            ("LOG_LEVEL", lambda: ConfigValidator.parse_choice("GSW_LOG_LEVEL", os.environ.get("GSW_LOG_LEVEL"), LOG_LEVELS, "WARNING")),
        ]
        for attribute, loader in loaders:
            try:
                setattr(self, attribute, loader())
            except ValueError as e:
                self.validation_errors.append(str(e))

    def _validate_config(self):
        """Perform cross-field validation"""
        if self.DIM < 2:
            self.validation_errors.append("GSW_DIM must be at least 2")

        self.validation_errors.extend(
            ConfigValidator.validate_grid(self.GRID_MIN, self.GRID_MAX, self.GRID_STEP)
        )

        if self.BOUNDARY_TOL <= 0:
            self.validation_errors.append("GSW_BOUNDARY_TOL must be positive")
        elif self.BOUNDARY_TOL > 1e-6:
            self.warnings.append(
                f"GSW_BOUNDARY_TOL={self.BOUNDARY_TOL} is loose; moment estimates may be biased"
            )

        if self.GRID_STEP > 0.1:
            self.warnings.append(f"Grid step {self.GRID_STEP} is coarse; quadrature tolerances assume 0.05")

        if self.LOG_TO_FILE:
            try:
                os.makedirs(self.LOG_DIR, exist_ok=True)
                if not os.access(self.LOG_DIR, os.W_OK):
                    self.validation_errors.append(f"Log directory is not writable: {self.LOG_DIR}")
            except OSError as e:
                self.validation_errors.append(f"Cannot create log directory: {e}")

    def _log_config_status(self):
        """Log configuration status"""
        logger.debug(f"🔧 Fock dimension: {self.DIM}")
        logger.debug(f"📐 Grid: [{self.GRID_MIN}, {self.GRID_MAX}] step {self.GRID_STEP}")
        logger.debug(f"🎲 Samples: {self.COUNT} seed {self.SEED}")

        if self.validation_errors:
            logger.error("❌ Configuration Errors:")
            for error in self.validation_errors:
                logger.error(f"   • {error}")

        if self.warnings:
            for warning in self.warnings:
                logger.warning(f"⚠️ {warning}")

    def is_valid(self) -> bool:
        """Check if configuration is valid"""
        return len(self.validation_errors) == 0

    def get_health_status(self) -> dict:
        """Get configuration health status"""
        return {
            "valid": self.is_valid(),
            "errors": self.validation_errors,
            "warnings": self.warnings,
            "loaded_at": datetime.now().isoformat()
        }


# Create global config instance
config = ToolkitConfig()
