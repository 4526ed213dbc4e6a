"""
Utility functions for logging setup and sweep progress tracking
"""
import logging
from datetime import datetime
from pathlib import Path
from typing import Dict, Optional, Union

from pythonjsonlogger import jsonlogger

from config.settings import LOG_FORMAT, LOG_LEVEL
from utils.errors import (
    CapacityError,
    ConfigError,
    DecompositionError,
    DimensionError,
    FiberLabError,
    ModelError,
    NumericalSingularityError,
    PreconditionError,
    ReasonCode,
    SolverError,
)


logger = logging.getLogger(__name__)


def configure_logging(level: Union[str, int] = LOG_LEVEL,
                      json_path: Optional[Path] = None) -> None:
    """
    Install the stream handler (LOG_FORMAT) and, if requested, a JSON file
    handler so sweep runs leave a machine-readable log.
    """
    root = logging.getLogger()
    root.setLevel(level)
    for handler in list(root.handlers):
        root.removeHandler(handler)

    stream = logging.StreamHandler()
    stream.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(stream)

    if json_path is not None:
        json_path = Path(json_path)
        json_path.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(json_path, encoding="utf-8")
        file_handler.setFormatter(
            jsonlogger.JsonFormatter("%(asctime)s %(name)s %(levelname)s %(message)s")
        )
        root.addHandler(file_handler)


class SweepProgress:
    """Track sweep progress and per-point failures"""

    def __init__(self, total: int):
        self.total = total
        self.stats = {
            'start_time': datetime.utcnow(),
            'points_done': 0,
            'points_failed': 0,
        }
        self.failures: Dict[int, str] = {}

    def update(self, grid_index: int, failed: bool = False, reason: str = ""):
        """Record one finished grid point"""
        self.stats['points_done'] += 1
        if failed:
            self.stats['points_failed'] += 1
            self.failures[grid_index] = reason
            logger.warning(
                f"Grid point {grid_index} failed: {reason}",
                extra={'grid_index': grid_index, 'reason_code': reason},
            )
        else:
            logger.info(
                f"Grid point {grid_index} done ({self.stats['points_done']}/{self.total})",
                extra={'grid_index': grid_index},
            )

    def get_progress(self) -> Dict:
        """Get current progress"""
        elapsed = (datetime.utcnow() - self.stats['start_time']).total_seconds()
        return {
            'total': self.total,
            'done': self.stats['points_done'],
            'failed': self.stats['points_failed'],
            'elapsed_seconds': elapsed,
        }


__all__ = [
    'configure_logging',
    'SweepProgress',
    'CapacityError',
    'ConfigError',
    'DecompositionError',
    'DimensionError',
    'FiberLabError',
    'ModelError',
    'NumericalSingularityError',
    'PreconditionError',
    'ReasonCode',
    'SolverError',
]
