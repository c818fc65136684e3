# logging_system.py - Component loggers with colour console, rotation and buffering
import logging
import logging.handlers
import json
import traceback
from datetime import datetime
from pathlib import Path
from typing import Dict, Any, Optional

import colorlog

from config import config

CONSOLE_FORMAT = '%(log_color)s%(asctime)s - %(name)s - %(levelname)s - %(message)s'
FILE_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

LOG_COLORS = {
    'DEBUG': 'cyan',
    'INFO': 'green',
    'WARNING': 'yellow',
    'ERROR': 'red',
    'CRITICAL': 'purple',
}


class AdvancedLogger:
    """Named component loggers with console, optional rotating file and buffer output"""

    def __init__(self, level: Optional[str] = None, log_to_file: Optional[bool] = None):
        self.log_dir = Path(config.LOG_DIR)
        self.level = getattr(logging, (level or config.LOG_LEVEL).upper(), logging.WARNING)
        self.log_to_file = config.LOG_TO_FILE if log_to_file is None else log_to_file
        if self.log_to_file:
            self.log_dir.mkdir(exist_ok=True)

        self.loggers = {}
        self.log_buffer = []
        self.max_buffer_size = 1000
        self.error_count = 0
        self.warning_count = 0

        self._setup_loggers()

    def _setup_loggers(self):
        """Setup the component loggers"""
        # Command dispatch and user-facing progress
        self._create_logger('toolkit', level=self.level, console=True, file='toolkit.log',
                            max_bytes=10*1024*1024, backup_count=5)

        # Fock, phase-space, ordering and moment numerics
        self._create_logger('numerics', level=self.level, console=True, file='numerics.log',
                            max_bytes=10*1024*1024, backup_count=3)

        # Monte Carlo sampling and reconstruction
        self._create_logger('sampling', level=self.level, console=True, file='sampling.log',
                            max_bytes=10*1024*1024, backup_count=3)

        # Stage timings, never on the console
        self._create_logger('performance', level=logging.INFO, console=False, file='performance.log',
                            max_bytes=10*1024*1024, backup_count=5)

        # Tracebacks: file and buffer only
        self._create_logger('error', level=logging.ERROR, console=False, file='errors.log',
                            max_bytes=5*1024*1024, backup_count=10)

    def _create_logger(self, name: str, level: int, console: bool, file: str, max_bytes: int, backup_count: int):
        """Create a configured logger"""
        logger = logging.getLogger(f"gsw.{name}")
        logger.setLevel(level)
        logger.propagate = False

        # Clear existing handlers
        logger.handlers.clear()

        if file and self.log_to_file:
            file_handler = logging.handlers.RotatingFileHandler(
                self.log_dir / file,
                maxBytes=max_bytes,
                backupCount=backup_count,
                encoding='utf-8'
            )
            file_handler.setFormatter(logging.Formatter(FILE_FORMAT, datefmt='%Y-%m-%d %H:%M:%S'))
            logger.addHandler(file_handler)

        # stderr, so stdout stays clean for command output
        if console:
            console_handler = logging.StreamHandler()
            console_handler.setFormatter(colorlog.ColoredFormatter(
                CONSOLE_FORMAT, datefmt='%H:%M:%S', log_colors=LOG_COLORS
            ))
            logger.addHandler(console_handler)

        buffer_handler = BufferHandler(self)
        buffer_handler.setLevel(logging.DEBUG)
        logger.addHandler(buffer_handler)

        self.loggers[name] = logger

    def set_level(self, level: str):
        """Change the console verbosity of the non-performance loggers"""
        numeric = getattr(logging, level.upper(), logging.WARNING)
        for name in ('toolkit', 'numerics', 'sampling'):
            self.loggers[name].setLevel(numeric)

    def get_logger(self, name: str = 'toolkit') -> logging.Logger:
        """Get a specific logger"""
        return self.loggers.get(name, self.loggers['toolkit'])

    def log_performance(self, operation: str, duration: float, details: Dict[str, Any] = None):
        """Log stage timings"""
        self.loggers['performance'].info(
            f"{operation} completed in {duration:.3f}s - {json.dumps(details or {}, default=str)}",
            extra={'operation': operation, 'duration': duration},
        )

    def log_system_event(self, event: str, data: Dict[str, Any] = None):
        """Log system events"""
        self.loggers['toolkit'].info(
            f"SYSTEM EVENT: {event} - {json.dumps(data or {}, default=str)}"
        )

    def log_error_with_context(self, error: Exception, context: Dict[str, Any] = None):
        """Log error with context and traceback"""
        self.loggers['error'].error(
            f"{type(error).__name__}: {error}\n"
            f"Context: {json.dumps(context or {}, default=str)}\n"
            f"Traceback: {traceback.format_exc()}"
        )

    def get_stage_timings(self) -> Dict[str, float]:
        """Total seconds per timed numerical stage seen in the buffer"""
        totals: Dict[str, float] = {}
        for entry in self.log_buffer:
            if entry['logger'] != 'gsw.performance' or 'duration' not in entry:
                continue
            totals[entry['operation']] = totals.get(entry['operation'], 0.0) + entry['duration']
        return totals

    def get_log_stats(self) -> Dict[str, Any]:
        return {
            'buffered': len(self.log_buffer),
            'errors': self.error_count,
            'warnings': self.warning_count,
            'stages': self.get_stage_timings(),
        }


class BufferHandler(logging.Handler):
    """In-memory ring of recent records; also tallies errors and warnings"""

    def __init__(self, advanced_logger):
        super().__init__()
        self.advanced_logger = advanced_logger

    def emit(self, record):
        owner = self.advanced_logger
        entry = {
            'time': datetime.fromtimestamp(record.created).isoformat(timespec='milliseconds'),
            'level': record.levelname,
            'logger': record.name,
            'message': record.getMessage(),
        }
        # Stage timings carry structured fields next to the rendered message
        for key in ('operation', 'duration'):
            if hasattr(record, key):
                entry[key] = getattr(record, key)
        owner.log_buffer.append(entry)
        if len(owner.log_buffer) > owner.max_buffer_size:
            del owner.log_buffer[:len(owner.log_buffer) - owner.max_buffer_size // 2]

        if record.levelno >= logging.ERROR:
            owner.error_count += 1
        elif record.levelno == logging.WARNING:
            owner.warning_count += 1


# Initialize advanced logging system
advanced_logger = AdvancedLogger()


def get_logger(name: str = 'toolkit'):
    return advanced_logger.get_logger(name)


def set_level(level: str):
    return advanced_logger.set_level(level)


def log_performance(operation: str, duration: float, details: Dict[str, Any] = None):
    return advanced_logger.log_performance(operation, duration, details)


def log_system_event(event: str, data: Dict[str, Any] = None):
    return advanced_logger.log_system_event(event, data)


def log_error(error: Exception, context: Dict[str, Any] = None):
    return advanced_logger.log_error_with_context(error, context)
