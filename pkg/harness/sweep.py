"""
Sweep driver: runs the configured checks at every grid point and writes the results

Grid points are the unit of work. Each point is analyzed independently from
(config, point), so the worker count never changes a number; rows are
reordered by grid index before the single parent process writes them.
"""
import logging
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import pandas as pd

from config.settings import FIGURE_COLUMNS, KNOWN_CHECKS, get_runtime_settings
from fock.basis import enumerate_basis
from harness.models import GridPoint, ResultRow, SweepConfig
from harness.storage import ResultStorage
from model.hamiltonian import build_bundle, decompose
from onebody.hypotheses import validate_hypotheses
from onebody.modes import ModelParams, masses
from pullthrough.formulas import moment_stability, pull_through_study
from spectra.analysis import (
    REQUIRED_HYPOTHESES,
    ConvergenceTable,
    Cutoffs,
    GroundStateReport,
    convergence_study,
    excited_state_check,
    ground_state_analysis,
    hvz_threshold_diagnostic,
)
from utils import SweepProgress
from utils.errors import ConfigError, FiberLabError, ReasonCode


logger = logging.getLogger(__name__)

# checks that need Hypotheses 1-4 at the grid point
SPECTRAL_CHECKS = ("ground", "excited", "hvz")


class PointAnalysis:
    """Runs the requested checks at one grid point and collects a ResultRow"""

    def __init__(self, config: SweepConfig, point: GridPoint):
        self.config = config
        self.point = point
        self.params, self.cutoffs = config.point_params(point)
        self.reasons: List[ReasonCode] = []
        self.details: Dict[str, Dict] = {}
        self.values: Dict = {}
        self._report: Optional[GroundStateReport] = None

    def ground_report(self) -> GroundStateReport:
        if self._report is None:
            self._report = ground_state_analysis(self.params, self.cutoffs)
            report = self._report
            self.values.update(
                E_full=report.e_full,
                E_minus=report.e_minus,
                E_plus=report.e_plus,
                gap=report.gap,
                degeneracy=report.degeneracy,
                excited_flag=report.excited_state_flag,
                leakage=report.leakage,
                offblock_norm=report.offblock_norm,
            )
        return self._report

    def check_decompose(self):
        basis = enumerate_basis(self.params.modes.count, self.cutoffs.n_max)
        bundle = build_bundle(self.params, basis)
        offblock, _ = decompose(bundle)
        self.values['offblock_norm'] = offblock
        self.details['decompose'] = {'offblock_norm': offblock, 'dimension': bundle.spin_basis.dim,
                                     'params_digest': bundle.params_digest}

    def check_ground(self):
        report = self.ground_report()
        self.reasons.extend(report.violations)
        self.details['ground'] = report.to_dict()

    def check_excited(self):
        m, _ = masses(self.params.modes)
        if not m > 0 or self.params.eta == 0:
            self.details['excited'] = {'status': 'not_applicable'}
            return
        check = excited_state_check(self.params, self.cutoffs, self.ground_report())
        if check.reason is not None:
            self.reasons.append(check.reason)
        self.details['excited'] = check.to_dict()

    def check_hvz(self):
        if not self.params.modes.essential_indices:
            self.details['hvz'] = {'status': 'not_applicable'}
            return
        hvz = hvz_threshold_diagnostic(self.params, self.cutoffs, self.ground_report())
        if not hvz.passed:
            self.reasons.append(ReasonCode.HVZ_MISSING)
        self.details['hvz'] = hvz.to_dict()

    def check_pullthrough(self):
        c = self.cutoffs
        study = pull_through_study(self.params, self.config.schedule_for(c.n_max),
                                   tol=c.tol, method=c.method, seed=c.seed)
        self.values['pullthrough_residual'] = study.reports[-1].relative
        if not study.decreasing:
            self.reasons.append(ReasonCode.PULLTHROUGH_RESIDUAL)
        self.details['pullthrough'] = study.to_dict()

    def check_convergence(self):
        c = self.cutoffs
        schedule = self.config.schedule_for(c.n_max)
        table = convergence_study(self.params, schedule, tol=c.tol, method=c.method, seed=c.seed)
        moments = moment_stability(self.params, schedule, tol=c.tol, method=c.method, seed=c.seed)
        if table.non_cauchy:
            self.reasons.append(ReasonCode.NOT_CAUCHY)
        if moments.reason is not None:
            self.reasons.append(moments.reason)
        self.details['convergence'] = {'table': table.to_dict(), 'moments': moments.to_dict()}

    def _run_check(self, name: str, check: Callable[[], None]):
        try:
            check()
        except FiberLabError as e:
            logger.warning(f"Check '{name}' failed at grid point {self.point.index}: {e}",
                           extra={'grid_index': self.point.index, 'reason_code': e.reason_code.value})
            self.reasons.append(e.reason_code)
            self.details[name] = {'status': 'error', 'reason': e.reason_code.value, 'message': str(e)}
        except Exception as e:
            logger.error(f"Internal error in check '{name}' at grid point {self.point.index}: {e}",
                         exc_info=True, extra={'grid_index': self.point.index})
            self.reasons.append(ReasonCode.INTERNAL)
            self.details[name] = {'status': 'error', 'reason': ReasonCode.INTERNAL.value,
                                  'message': f"{type(e).__name__}: {e}"}

    def run(self) -> ResultRow:
        start = time.perf_counter()
        hypotheses = validate_hypotheses(self.params)
        self.details['hypotheses'] = hypotheses.to_dict()
        hypotheses_ok = hypotheses.passes_all(REQUIRED_HYPOTHESES)

        for name in KNOWN_CHECKS:
            if name not in self.config.checks:
                continue
            if name in SPECTRAL_CHECKS and not hypotheses_ok:
                self.reasons.append(ReasonCode.HYPOTHESIS_FAILED)
                self.details[name] = {'status': 'skipped', 'reason': ReasonCode.HYPOTHESIS_FAILED.value,
                                      'message': "; ".join(hypotheses.failures())}
                continue
            self._run_check(name, getattr(self, f"check_{name}"))

        codes = sorted({r.value for r in self.reasons})
        return ResultRow(
            grid_index=self.point.index,
            coordinates=self.point.label(),
            eta=self.params.eta,
            coupling_scale=self.point.coordinates.get('coupling_scale', 1.0),
            n_max=self.cutoffs.n_max,
            status="fail" if codes else "ok",
            reason_codes=codes,
            timing_seconds=time.perf_counter() - start,
            details=self.details,
            **self.values,
        )


def analyze_point(config: SweepConfig, point: GridPoint) -> ResultRow:
    return PointAnalysis(config, point).run()


@dataclass(frozen=True)
class SweepOutcome:
    rows: List[ResultRow]
    csv_path: Optional[Path]
    json_path: Optional[Path]
    progress: Dict

    @property
    def failed(self) -> bool:
        return any(row.failed for row in self.rows)


def _collect_rows(config: SweepConfig, workers: int, progress: SweepProgress) -> List[ResultRow]:
    points = config.grid()
    rows: Dict[int, ResultRow] = {}

    def record(row: ResultRow):
        rows[row.grid_index] = row
        progress.update(row.grid_index, failed=row.failed, reason=",".join(row.reason_codes))

    if workers <= 1 or len(points) == 1:
        for point in points:
            record(analyze_point(config, point))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(analyze_point, config, point) for point in points]
            for future in as_completed(futures):
                record(future.result())
    return [rows[i] for i in sorted(rows)]


def resolve_workers(config: SweepConfig, override: Optional[int] = None) -> int:
    """CLI flag, then FIBERLAB_WORKERS, then the config file, then 1"""
    for candidate in (override, get_runtime_settings().workers, config.workers):
        if candidate is not None:
            if candidate < 1:
                raise ConfigError(f"worker count must be >= 1 (got {candidate})", field="workers")
            return int(candidate)
    return 1


def run_sweep(config: SweepConfig, output_dir: Optional[Path] = None,
              workers: Optional[int] = None) -> SweepOutcome:
    """Analyze every grid point and write results.csv plus results.json"""
    workers = resolve_workers(config, workers)
    output_dir = Path(output_dir) if output_dir is not None else Path(config.output)
    progress = SweepProgress(len(config.grid()))
    logger.info(f"Sweep '{config.label}': {progress.total} grid points, {workers} workers, "
                f"checks {config.checks}")

    rows = _collect_rows(config, workers, progress)
    storage = ResultStorage(output_dir)
    csv_path, json_path = storage.save_sweep(rows, config, progress.get_progress())
    return SweepOutcome(rows=rows, csv_path=csv_path, json_path=json_path,
                        progress=progress.get_progress())


def figure_frame(config: SweepConfig, rows: List[ResultRow]) -> pd.DataFrame:
    _, m_ess = masses(config.mode_set())
    frame = pd.DataFrame(
        [{'eta': r.eta, 'E_minus': r.E_minus, 'E_plus': r.E_plus} for r in rows],
        columns=FIGURE_COLUMNS[:3],
    ).astype(float)
    frame['threshold'] = frame['E_minus'] + m_ess
    return frame[FIGURE_COLUMNS]


def emit_figure_data(config: SweepConfig, path: Path,
                     workers: Optional[int] = None) -> Tuple[pd.DataFrame, List[ResultRow]]:
    """Per eta: E_minus, E_plus and the threshold line E_minus + m_ess"""
    if 'eta' not in config.sweep:
        raise ConfigError("figure data needs an eta axis in [sweep]", field="sweep.eta")
    ground_only = config.model_copy(update={'checks': ['ground']})
    progress = SweepProgress(len(ground_only.grid()))
    rows = _collect_rows(ground_only, resolve_workers(config, workers), progress)
    frame = figure_frame(config, rows)
    ResultStorage(Path(path).parent).save_table(frame, Path(path),
                                                title="# fiberlab figure data; columns: ")
    return frame, rows


def convergence_frame(table: ConvergenceTable, moments: Dict[int, List[float]]) -> pd.DataFrame:
    frame = table.to_frame()
    for a, values in moments.items():
        frame[f"moment_{a}"] = values
    return frame


def run_convergence(config: SweepConfig, path: Path) -> Tuple[ConvergenceTable, pd.DataFrame]:
    """Cutoff convergence of both fiber ground energies at the template along config.cutoffs"""
    params: ModelParams = config.template()
    table = convergence_study(params, config.cutoffs, tol=config.tol, method=config.method,
                              seed=config.seed)
    moments = moment_stability(params, config.cutoffs, tol=config.tol, method=config.method,
                               seed=config.seed)
    frame = convergence_frame(table, moments.values)
    ResultStorage(Path(path).parent).save_table(frame, Path(path),
                                                title="# fiberlab convergence; columns: ")
    if table.non_cauchy or moments.reason is not None:
        logger.warning(f"Convergence study flagged: non_cauchy={table.non_cauchy} "
                       f"moment_growth={moments.reason is not None}")
    return table, frame


def analyze(config: SweepConfig) -> Dict:
    """Full report for the first grid point (the template when there is no sweep)"""
    point = config.grid()[0]
    row = analyze_point(config, point)
    return {
        'label': config.label,
        'point': point.coordinates,
        'params_digest': config.point_params(point)[0].digest(),
        'summary': row.csv_record(),
        'timing_seconds': row.timing_seconds,
        'reports': row.details,
    }
