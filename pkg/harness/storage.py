"""
Storage module for sweep results: CSV table plus JSON sidecar
"""
import json
import logging
from contextlib import contextmanager
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config.settings import CSV_FLOAT_FORMAT, CSV_HEADER_PREFIX, RESULT_COLUMNS
from harness.models import ResultRow, SweepConfig


logger = logging.getLogger(__name__)

INTEGER_COLUMNS = ("grid_index", "n_max", "degeneracy")


def _coerce(value: Any) -> Any:
    """json.dumps fallback for numpy scalars, arrays, paths and enums"""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def to_json(payload: Any) -> str:
    return json.dumps(payload, indent=2, default=_coerce)


def results_frame(rows: Sequence[ResultRow]) -> pd.DataFrame:
    """Rows in grid order with the fixed column order"""
    ordered = sorted(rows, key=lambda r: r.grid_index)
    frame = pd.DataFrame([row.csv_record() for row in ordered], columns=RESULT_COLUMNS)
    for column in INTEGER_COLUMNS:
        frame[column] = frame[column].astype("Int64")
    return frame


def write_table(frame: pd.DataFrame, path: Path, title: str = CSV_HEADER_PREFIX) -> Path:
    """One comment line naming the columns, the header row, then the data"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as handle:
        handle.write(f"{title}{','.join(frame.columns)}\n")
        frame.to_csv(handle, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    return path


def read_table(path: Path) -> pd.DataFrame:
    return pd.read_csv(path, comment='#', keep_default_na=True)


class ResultStorage:
    """Writes the results of one sweep into an output directory"""

    def __init__(self, output_dir: Path, stem: str = "results"):
        self.output_dir = Path(output_dir)
        self.csv_path = self.output_dir / f"{stem}.csv"
        self.json_path = self.output_dir / f"{stem}.json"

    @contextmanager
    def _cleanup_on_error(self, paths: List[Path]) -> Iterator[None]:
        """Remove every file of this write when any of them fails"""
        try:
            yield
        except OSError as e:
            logger.error(f"Error writing results to {self.output_dir}: {e}")
            for path in paths:
                if path.exists():
                    path.unlink()
                    logger.info(f"Removed partial file {path}")
            raise

    def save_sweep(self, rows: Sequence[ResultRow], config: SweepConfig,
                   progress: Optional[Dict] = None) -> Tuple[Path, Path]:
        """
        Save the CSV table and the JSON sidecar.
        Returns: (csv_path, json_path)
        """
        with self._cleanup_on_error([self.csv_path, self.json_path]):
            self.output_dir.mkdir(parents=True, exist_ok=True)
            write_table(results_frame(rows), self.csv_path)
            self.json_path.write_text(to_json(self.sidecar(rows, config, progress)), encoding='utf-8')
        logger.info(f"Saved {len(rows)} rows to {self.csv_path}")
        return self.csv_path, self.json_path

    @staticmethod
    def sidecar(rows: Sequence[ResultRow], config: SweepConfig,
                progress: Optional[Dict] = None) -> Dict:
        ordered = sorted(rows, key=lambda r: r.grid_index)
        return {
            'created_at': datetime.utcnow().isoformat(),
            'config': config.model_dump(mode='json'),
            'params_digest': config.template().digest(),
            'progress': progress or {},
            'failed_points': [r.grid_index for r in ordered if r.failed],
            'points': [
                {
                    'grid_index': r.grid_index,
                    'coordinates': r.coordinates,
                    'status': r.status,
                    'reason_codes': r.reason_codes,
                    'timing_seconds': r.timing_seconds,
                    'reports': r.details,
                }
                for r in ordered
            ],
        }

    def save_table(self, frame: pd.DataFrame, path: Path, title: str = CSV_HEADER_PREFIX) -> Path:
        path = Path(path)
        with self._cleanup_on_error([path]):
            write_table(frame, path, title)
        logger.info(f"Saved {len(frame)} rows to {path}")
        return path
